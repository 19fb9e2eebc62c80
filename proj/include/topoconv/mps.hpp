#pragma once

#include <Eigen/Dense>
#include <string>

#include "topoconv/models.hpp"

namespace topoconv::mps {

// Open-boundary matrix product state. Site tensors are [left bond, physical,
// right bond]; boundary bonds have dimension 1. `center` is the 1-based
// orthogonality center when known (-1 otherwise): tensors left of it are
// left-orthonormal, tensors right of it right-orthonormal.
struct Mps {
  int d = 0;
  std::vector<kernels::Tensor3> t;  // t[j-1] holds site j
  int center = -1;

  int sites() const { return static_cast<int>(t.size()); }
  // Dimension of the bond to the right of site j (j = 0 gives the left edge).
  int bond(int j) const { return j == 0 ? t.front().dl : t[j - 1].dr; }
};

// |level_1 level_2 ...>; `levels` has one entry per site, or a single entry
// replicated across the chain.
Mps product_state(int n, int d, const std::vector<int>& levels);

// Normalized state with dense random tensors, bond dimension min(chi, d^j,
// d^(n-j)). Deterministic in the seed.
Mps random_state(int n, int d, int chi, std::uint64_t seed);

// Full amplitude vector, site 1 slowest (matches models::build_dense).
// Guarded to d^n <= 2^20.
Eigen::VectorXcd to_statevector(const Mps& m);

// Exact MPS of a statevector by successive decompositions; Schmidt values
// below `tol` (relative to the largest) are dropped.
Mps from_statevector(const Eigen::VectorXcd& v, int n, int d,
                     double tol = 1e-14);

cxd overlap(const Mps& a, const Mps& b);  // <a|b>
double norm(const Mps& m);
void normalize(Mps& m);

// Re-gauges in place around `center`; the represented vector is unchanged.
void canonicalize(Mps& m, int center);

struct PartitionSpec {
  enum class Kind { BoundaryCut, MiddleBlock };
  Kind kind = Kind::BoundaryCut;
  int cut_after = 0;      // BoundaryCut: A = 1..cut_after, B = rest
  int start = 0;          // MiddleBlock: B = start..start+length-1
  int length = 0;

  std::string label() const;  // "cut8" or "block4x3" style, filesystem-safe
};

struct RdmSpectrum {
  PartitionSpec part;
  std::vector<double> eigenvalues;  // descending, clamped to >= 0, sum 1
};

// Squared Schmidt values across the bond after `cut_after`.
RdmSpectrum boundary_cut_spectrum(const Mps& m, int cut_after);

// Nonzero spectrum of the reduced density matrix of an interior block,
// via the Gram matrix of block vectors in the orthonormal environment
// bases; cost is polynomial in the bond dimension, independent of d^length.
// Requires chi_left * chi_right <= cap.
RdmSpectrum middle_block_spectrum(const Mps& m, int start, int length,
                                  int cap = 4096);

// <psi|O|psi>; the imaginary part must vanish to 1e-10 (Hermitian O).
double expectation_mpo(const Mps& m, const models::Mpo& op);

// Expectation of a product of single-site operators, identity elsewhere.
// Sites 1-based, strictly increasing.
cxd string_expectation(const Mps& m,
                       const std::vector<std::pair<int, Eigen::MatrixXcd>>& ops);

// <psi|O_site|psi> for Hermitian O (imaginary part checked to 1e-8).
double local_expectation(const Mps& m, const Eigen::MatrixXcd& op, int site);

// All single-site expectations of one Hermitian operator in a single sweep.
std::vector<double> site_expectations(const Mps& m, const Eigen::MatrixXcd& op);

struct CompressStats {
  double max_bond_discarded = 0.0;  // largest relative squared weight dropped
  double total_discarded = 0.0;     // sum over bonds
};

// Truncates every bond to chi_max, additionally dropping relative squared
// Schmidt weight up to discard_tol. Result is normalized, center at site n.
Mps compress(const Mps& m, int chi_max, double discard_tol,
             CompressStats* stats = nullptr);

// Self-describing binary container (little-endian doubles).
void save(const Mps& m, const std::string& path);
Mps load(const std::string& path);

}  // namespace topoconv::mps
