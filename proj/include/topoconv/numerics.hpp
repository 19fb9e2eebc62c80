#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "topoconv/common.hpp"

namespace topoconv::numerics {

struct SvdResult {
  Eigen::MatrixXcd u;       // thin
  Eigen::VectorXd s;        // descending, non-negative
  Eigen::MatrixXcd v;       // a = u * s.asDiagonal() * v.adjoint()
};

SvdResult svd(const Eigen::MatrixXcd& a);

// Largest k with s[k-1] > rel_tol * s[0]; at least 1 for a nonzero matrix.
int svd_rank(const Eigen::VectorXd& s, double rel_tol = 1e-14);

struct EigResult {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns
};

// Throws Error(Numerical) when the Hermiticity defect exceeds herm_tol.
EigResult hermitian_eig(const Eigen::MatrixXcd& a, double herm_tol = 1e-9);

// Matrix-free Hermitian operator.
struct LinearOperator {
  std::int64_t dim = 0;
  std::function<void(const cxd* x, cxd* y)> apply;
};

struct LanczosOptions {
  double tol = 1e-10;        // residual norm target for the lowest Ritz pair
  int max_matvecs = 400;
  int basis = 30;            // Krylov dimension per restart cycle
  std::uint64_t seed = 7;    // deterministic fallback start vectors
};

struct LanczosResult {
  double value = 0.0;
  std::vector<cxd> vector;
  double residual = 0.0;
  int matvecs = 0;
  bool converged = false;
};

// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
// The guess may be empty; deterministic for fixed inputs and options.
LanczosResult lanczos_lowest(const LinearOperator& op,
                             const std::vector<cxd>& guess,
                             const LanczosOptions& opt);

// Wrapper that throws Error(Numerical) on non-convergence.
std::pair<double, std::vector<cxd>> extremal_eigenpair(
    const LinearOperator& op, const std::vector<cxd>& guess,
    const LanczosOptions& opt);

// Deterministic uniforms in [0,1): raw mt19937_64 bits, no distribution
// adapters (their output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  std::uint64_t raw();

 private:
  std::mt19937_64 engine_;
};

}  // namespace topoconv::numerics
