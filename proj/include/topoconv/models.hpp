#pragma once

#include <Eigen/Dense>

#include "topoconv/kernels.hpp"

namespace topoconv::models {

enum class Family { ClusterIsing, LambdaD };
enum class Perturbation { None, ClusterEdge, ClusterEdgeXZ, SpinOneEdge };

// Open-chain Hamiltonians.
//
// ClusterIsing (two-level sites):
//   H = -sum_{j=2}^{N-1} X_{j-1} Z_j X_{j+1} + g sum_{j=1}^{N-1} Y_j Y_{j+1}
// optional degeneracy-lifting terms:
//   ClusterEdge:    eps * (Y_1 X_2 + sign * X_{N-1} Y_N)   [parity-even,
//                   quadratic under the fermion mapping: oracle-exact]
//   ClusterEdgeXZ:  eps * (X_1 Z_2 + sign * Z_{N-1} X_N)   [parity-odd:
//                   selects a symmetry-broken branch on the ordered side]
//   edge_field_y:   eps_y * (Y_1 - Y_N)
//   parity_pin:     -mu_p * prod_j Z_j
//
// LambdaD (three-level sites, S^z = diag(+1,0,-1)):
//   H = sum_{j=1}^{N-1} [ Sx_j Sx_{j+1} + Sy_j Sy_{j+1} + lambda Sz_j Sz_{j+1} ]
//       + d_field sum_j (Sz_j)^2
// optional terms:
//   SpinOneEdge:    eps * (Sz_1 + sign * Sz_N)
//   sector penalty: mu * (sum_j Sz_j - m)^2
struct ModelSpec {
  Family family = Family::ClusterIsing;
  int sites = 0;
  double g = 0.0;
  double lambda = 1.0;
  double d_field = 0.0;
  Perturbation pert = Perturbation::None;
  double pert_eps = 0.0;
  int pert_sign = 1;
  double edge_field_y = 0.0;
  double parity_pin = 0.0;
  bool sector_active = false;
  double sector_m = 0.0;
  double sector_mu = 10.0;

  int local_dim() const { return family == Family::ClusterIsing ? 2 : 3; }
  void validate() const;  // throws Error(Config) on inconsistent settings
};

// Returns the spec with the sector penalty switched off (the perturbation and
// pinning terms stay); used to report penalty-free energies.
ModelSpec bare(const ModelSpec& spec);

struct Mpo {
  int n = 0, d = 0;
  std::vector<kernels::Tensor4> w;  // w[0].wl == 1 and w[n-1].wr == 1
};

Mpo build_mpo(const ModelSpec& spec);

// Dense matrix on the full product basis. Site 1 is the slowest index:
// basis index = sum_j s_j d^(n-j). Capped at d^n <= 20000.
Eigen::MatrixXcd build_dense(const ModelSpec& spec);

// MPO action on a statevector, without building the dense matrix.
std::vector<cxd> mpo_apply_statevector(const Mpo& mpo, const std::vector<cxd>& v);

// Dense matrix of an MPO; capped at d^n <= 1024 (test sizes).
Eigen::MatrixXcd mpo_to_dense(const Mpo& mpo);

Eigen::MatrixXcd pauli_id();
Eigen::MatrixXcd pauli_x();
Eigen::MatrixXcd pauli_y();
Eigen::MatrixXcd pauli_z();

Eigen::MatrixXcd spin1_id();
Eigen::MatrixXcd spin1_x();
Eigen::MatrixXcd spin1_y();
Eigen::MatrixXcd spin1_z();
Eigen::MatrixXcd spin1_exp_pi_x();  // exp(i pi Sx) = I - 2 Sx^2
Eigen::MatrixXcd spin1_exp_pi_z();  // diag(-1, 1, -1)

Mpo total_sz_mpo(int n);     // sum_j Sz_j on three-level sites
Mpo total_sz_sq_mpo(int n);  // (sum_j Sz_j)^2

// h += coef * O_{s1} O_{s2} ... embedded in identities; sites 1-based,
// strictly increasing.
void add_product_term(Eigen::MatrixXcd& h, int n, int d, cxd coef,
                      const std::vector<std::pair<int, Eigen::MatrixXcd>>& factors);

}  // namespace topoconv::models
