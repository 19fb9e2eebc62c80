#include <doctest.h>

#include "support.hpp"

using namespace topoconv;
using namespace topoconv::kernels;

TEST_CASE("two-site apply: parallel matches serial reference") {
  const int chi = 9, d1 = 2, d2 = 3, w = 5, wm = 4;
  EnvBlock left = testsup::random_env(w, chi, chi, 11);
  EnvBlock right = testsup::random_env(w, chi, chi, 12);
  Tensor4 w1 = testsup::random_tensor4(w, wm, d1, 13);
  Tensor4 w2 = testsup::random_tensor4(wm, w, d2, 14);
  const std::size_t n = std::size_t(chi) * d1 * d2 * chi;
  auto x = testsup::random_vec(n, 15);
  std::vector<cxd> ys(n), yp(n);
  serial::apply_two_site(left, w1, w2, right, x.data(), ys.data());
  parallel::apply_two_site(left, w1, w2, right, x.data(), yp.data());
  CHECK(testsup::max_abs_diff(ys, yp) < 1e-12);
}

TEST_CASE("two-site apply: identity MPO with identity environments") {
  const int chi = 4, d = 2;
  EnvBlock left(1, chi, chi), right(1, chi, chi);
  for (int i = 0; i < chi; ++i) {
    left.at(0, i, i) = 1.0;
    right.at(0, i, i) = 1.0;
  }
  Tensor4 w1(1, 1, d), w2(1, 1, d);
  for (int s = 0; s < d; ++s) {
    w1.at(0, 0, s, s) = 1.0;
    w2.at(0, 0, s, s) = 1.0;
  }
  const std::size_t n = std::size_t(chi) * d * d * chi;
  auto x = testsup::random_vec(n, 3);
  std::vector<cxd> y(n);
  apply_two_site(left, w1, w2, right, x.data(), y.data());
  CHECK(testsup::max_abs_diff(x, y) < 1e-14);
}

TEST_CASE("transfer kernels: parallel matches serial reference") {
  const int chi = 7, d = 3, wl = 4, wr = 5;
  Tensor3 m = testsup::random_tensor3(chi, d, chi, 21);
  Tensor4 w = testsup::random_tensor4(wl, wr, d, 22);

  EnvBlock left = testsup::random_env(wl, chi, chi, 23);
  EnvBlock ls = serial::transfer_left(left, w, m);
  EnvBlock lp = parallel::transfer_left(left, w, m);
  REQUIRE(ls.a.size() == lp.a.size());
  CHECK(testsup::max_abs_diff(ls.a, lp.a) < 1e-12);

  EnvBlock right = testsup::random_env(wr, chi, chi, 24);
  EnvBlock rs = serial::transfer_right(right, w, m);
  EnvBlock rp = parallel::transfer_right(right, w, m);
  REQUIRE(rs.a.size() == rp.a.size());
  CHECK(testsup::max_abs_diff(rs.a, rp.a) < 1e-12);
}

TEST_CASE("left/right environments assemble the same scalar") {
  // <psi|H|psi> contracted from the left must equal the contraction from the
  // right on a random 3-site chain with boundary MPO slices.
  const int chi = 5, d = 2, w = 4;
  Tensor3 m1 = testsup::random_tensor3(1, d, chi, 31);
  Tensor3 m2 = testsup::random_tensor3(chi, d, chi, 32);
  Tensor3 m3 = testsup::random_tensor3(chi, d, 1, 33);
  Tensor4 w1 = testsup::random_tensor4(1, w, d, 34);
  Tensor4 w2 = testsup::random_tensor4(w, w, d, 35);
  Tensor4 w3 = testsup::random_tensor4(w, 1, d, 36);

  EnvBlock l = EnvBlock::trivial();
  l = transfer_left(l, w1, m1);
  l = transfer_left(l, w2, m2);
  l = transfer_left(l, w3, m3);

  EnvBlock r = EnvBlock::trivial();
  r = transfer_right(r, w3, m3);
  r = transfer_right(r, w2, m2);
  r = transfer_right(r, w1, m1);

  REQUIRE(l.a.size() == 1);
  REQUIRE(r.a.size() == 1);
  CHECK(std::abs(l.a[0] - r.a[0]) < 1e-12);
}

TEST_CASE("dense matvec: parallel matches serial on a 300-dim operator") {
  const int n = 300;
  auto h = testsup::random_vec(std::size_t(n) * n, 41);
  auto x = testsup::random_vec(n, 42);
  std::vector<cxd> ys(n), yp(n);
  serial::dense_matvec(h.data(), n, x.data(), ys.data());
  parallel::dense_matvec(h.data(), n, x.data(), yp.data());
  CHECK(testsup::max_abs_diff(ys, yp) < 1e-10);
}

TEST_CASE("execution mode toggles the dispatched path") {
  set_execution(Exec::Serial);
  CHECK(execution() == Exec::Serial);
  set_execution(Exec::Parallel);
  CHECK(execution() == Exec::Parallel);
}
