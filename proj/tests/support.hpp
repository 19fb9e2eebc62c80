#pragma once

#include <vector>

#include "topoconv/kernels.hpp"
#include "topoconv/numerics.hpp"

namespace testsup {

using topoconv::cxd;

inline topoconv::kernels::Tensor3 random_tensor3(int dl, int dp, int dr,
                                                 std::uint64_t seed) {
  topoconv::numerics::Rng rng(seed);
  topoconv::kernels::Tensor3 t(dl, dp, dr);
  for (auto& x : t.a) x = cxd(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return t;
}

inline topoconv::kernels::Tensor4 random_tensor4(int wl, int wr, int d,
                                                 std::uint64_t seed) {
  topoconv::numerics::Rng rng(seed);
  topoconv::kernels::Tensor4 t(wl, wr, d);
  for (auto& x : t.a) x = cxd(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return t;
}

inline topoconv::kernels::EnvBlock random_env(int w, int dout, int din,
                                              std::uint64_t seed) {
  topoconv::numerics::Rng rng(seed);
  topoconv::kernels::EnvBlock e(w, dout, din);
  for (auto& x : e.a) x = cxd(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return e;
}

inline std::vector<cxd> random_vec(std::size_t n, std::uint64_t seed) {
  topoconv::numerics::Rng rng(seed);
  std::vector<cxd> v(n);
  for (auto& x : v) x = cxd(rng.uniform() - 0.5, rng.uniform() - 0.5);
  return v;
}

inline double max_abs_diff(const std::vector<cxd>& a, const std::vector<cxd>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testsup
