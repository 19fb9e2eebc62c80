#pragma once

#include <Eigen/Dense>

#include "topoconv/models.hpp"

namespace topoconv::exact {

struct GroundState {
  double energy = 0.0;
  std::vector<cxd> amplitudes;  // phase-fixed: largest-|.| entry real positive
};

// Lowest eigenpair of the dense Hamiltonian (Lanczos, deterministic seed).
GroundState ed_ground(const models::ModelSpec& spec);

// Three-level chains: exact diagonalization restricted to the subspace
// { sum_j Sz_j = m }. The sector penalty plays no role here; the returned
// amplitudes live in the full product basis (zeros outside the sector).
GroundState ed_ground_in_sector(const models::ModelSpec& spec, int m_target);

// Eigenvalues of the reduced density matrix of the contiguous block
// [first, first+count-1] (1-based), descending, clamped to >= 0.
std::vector<double> ed_block_spectrum(const std::vector<cxd>& psi, int n, int d,
                                      int first, int count);

// <psi| O_{s1} O_{s2} ... |psi> with identities elsewhere.
cxd ed_expectation(const std::vector<cxd>& psi, int n, int d,
                   const std::vector<std::pair<int, Eigen::MatrixXcd>>& factors);

// <psi| prod_j Z_j |psi> on two-level sites.
double ed_parity_z(const std::vector<cxd>& psi, int n);

// ---- free-fermion oracle for the two-level chain ----
//
// Majorana labels: f^{(1)}_k -> 2(k-1), f^{(2)}_k -> 2(k-1)+1 (0-based),
// H = (i/4) f^T K f with K real antisymmetric.

struct MajoranaModel {
  int sites = 0;
  Eigen::MatrixXd k;
};

// Couplings of the two-level chain including the edge pair terms.
MajoranaModel cluster_majorana(int n, double g, double eps = 0.0, int sign = 1);

struct FreeFermionGround {
  double energy = 0.0;
  Eigen::MatrixXd gamma;        // covariance <i f_a f_b> off-diagonal part
  std::vector<double> modes;    // single-particle energies >= 0, ascending
  bool degenerate = false;      // any mode below 1e-12
  // Occupying the lowest positive mode instead: gamma + lowest_mode_flip,
  // energy + modes.front() (modes.front() taken over positive modes).
  Eigen::MatrixXd lowest_mode_flip;
  // For each exactly-zero pair (position-localized, canonically filled):
  // the alternative filling is gamma - 2 * zero_flips[p].
  std::vector<Eigen::MatrixXd> zero_flips;
};

FreeFermionGround free_fermion_ground(const MajoranaModel& m);

// Mode occupations nu_k in [0,1] of a contiguous block (1-based first site).
std::vector<double> covariance_block_modes(const Eigen::MatrixXd& gamma,
                                           int first, int count);

// Renyi entropy of the block; alpha > 0, infinity allowed.
double covariance_block_renyi(const Eigen::MatrixXd& gamma, int first, int count,
                              double alpha);

// Full RDM spectrum of the block (2^count values, descending); count <= 16.
std::vector<double> covariance_block_spectrum(const Eigen::MatrixXd& gamma,
                                              int first, int count);

// Every RDM eigenvalue of the block above `floor`, descending. Pruned product
// expansion over the mode occupations, so large blocks are fine as long as
// the count of eigenvalues above the floor stays moderate.
std::vector<double> covariance_block_spectrum_floor(const Eigen::MatrixXd& gamma,
                                                    int first, int count,
                                                    double floor = 1e-14);

// Pfaffian by Parlett-Reid with pivoting; destroys its argument copy.
double pfaffian(Eigen::MatrixXd a);

// <prod_j Z_j> = Pf(gamma).
double covariance_parity(const Eigen::MatrixXd& gamma);

// <X_i X_j>, 1-based, i < j.
double xx_correlation(const Eigen::MatrixXd& gamma, int i, int j);

// String order (-1)^(N-2) <Y_1 (prod_{2..N-1} Z_j) Y_N> from the covariance.
double string_order_z_free(const Eigen::MatrixXd& gamma);

}  // namespace topoconv::exact
