#include <doctest.h>

#include <memory>

#include <Eigen/Dense>

#include "support.hpp"
#include "topoconv/numerics.hpp"

using namespace topoconv;
using namespace topoconv::numerics;

TEST_CASE("svd reconstructs the input and orders singular values") {
  Rng rng(5);
  Eigen::MatrixXcd a(6, 4);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      a(i, j) = cxd(rng.uniform() - 0.5, rng.uniform() - 0.5);
  SvdResult r = svd(a);
  Eigen::MatrixXcd back = r.u * r.s.asDiagonal() * r.v.adjoint();
  CHECK((back - a).cwiseAbs().maxCoeff() < 1e-13);
  for (int k = 1; k < r.s.size(); ++k) CHECK(r.s[k] <= r.s[k - 1] + 1e-15);
  CHECK((r.u.adjoint() * r.u - Eigen::MatrixXcd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-13);
}

TEST_CASE("svd_rank counts values above the relative cutoff") {
  Eigen::VectorXd s(4);
  s << 1.0, 0.5, 1e-10, 1e-16;
  CHECK(svd_rank(s, 1e-14) == 3);
  CHECK(svd_rank(s, 1e-8) == 2);
}

TEST_CASE("hermitian_eig on a known 2x2") {
  Eigen::MatrixXcd a(2, 2);
  a << cxd(1, 0), cxd(0, -1), cxd(0, 1), cxd(1, 0);
  EigResult r = hermitian_eig(a);
  CHECK(r.values[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.values[1] == doctest::Approx(2.0).epsilon(1e-12));
  Eigen::VectorXcd v0 = r.vectors.col(0);
  CHECK((a * v0 - r.values[0] * v0).norm() < 1e-12);
}

TEST_CASE("hermitian_eig rejects a non-hermitian matrix") {
  Eigen::MatrixXcd a(2, 2);
  a << cxd(1, 0), cxd(5, 0), cxd(0, 0), cxd(1, 0);
  CHECK_THROWS_AS(hermitian_eig(a), Error);
}

namespace {

LinearOperator dense_op(const Eigen::MatrixXcd& h) {
  auto hp = std::make_shared<Eigen::MatrixXcd>(h);
  LinearOperator op;
  op.dim = h.rows();
  op.apply = [hp](const cxd* x, cxd* y) {
    Eigen::Map<const Eigen::VectorXcd> xv(x, hp->rows());
    Eigen::Map<Eigen::VectorXcd> yv(y, hp->rows());
    yv.noalias() = (*hp) * xv;
  };
  return op;
}

}  // namespace

TEST_CASE("lanczos finds the lowest eigenpair of a random hermitian matrix") {
  const int n = 60;
  Rng rng(9);
  Eigen::MatrixXcd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b(i, j) = cxd(rng.uniform() - 0.5, rng.uniform() - 0.5);
  Eigen::MatrixXcd h = (b + b.adjoint()) * 0.5;
  EigResult exact = hermitian_eig(h);

  LanczosOptions opt;
  opt.tol = 1e-11;
  opt.max_matvecs = 600;
  LanczosResult r = lanczos_lowest(dense_op(h), {}, opt);
  REQUIRE(r.converged);
  CHECK(r.value == doctest::Approx(exact.values[0]).epsilon(1e-9));
  Eigen::Map<const Eigen::VectorXcd> x(r.vector.data(), n);
  CHECK((h * x - r.value * x).norm() < 1e-8);
}

TEST_CASE("lanczos with a guess equal to an excited eigenvector still descends") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(8, 8);
  for (int i = 0; i < 8; ++i) h(i, i) = double(i) - 3.0;
  std::vector<cxd> guess(8, cxd(0, 0));
  guess[7] = 1.0;  // exact eigenvector of the highest eigenvalue
  LanczosOptions opt;
  opt.tol = 1e-12;
  LanczosResult r = lanczos_lowest(dense_op(h), guess, opt);
  REQUIRE(r.converged);
  CHECK(r.value == doctest::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("lanczos handles degenerate lowest levels deterministically") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(6, 6);
  h(0, 0) = -2.0;
  h(1, 1) = -2.0;
  h(2, 2) = 1.0;
  h(3, 3) = 1.5;
  h(4, 4) = 2.0;
  h(5, 5) = 3.0;
  LanczosOptions opt;
  LanczosResult a = lanczos_lowest(dense_op(h), {}, opt);
  LanczosResult b = lanczos_lowest(dense_op(h), {}, opt);
  REQUIRE(a.converged);
  CHECK(a.value == doctest::Approx(-2.0).epsilon(1e-10));
  REQUIRE(b.converged);
  CHECK(testsup::max_abs_diff(a.vector, b.vector) < 1e-12);
}

TEST_CASE("rng uniforms are deterministic and in range") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}
