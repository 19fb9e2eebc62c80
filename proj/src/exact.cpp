#include "topoconv/exact.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>

#include "topoconv/numerics.hpp"
#include "topoconv/kernels.hpp"

namespace topoconv::exact {

namespace {

std::int64_t ipow(int b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void phase_fix(std::vector<cxd>& v) {
  std::size_t imax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > best + 1e-14) {
      best = m;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const cxd rot = std::conj(v[imax]) / best;
  for (auto& x : v) x *= rot;
}

}  // namespace

GroundState ed_ground(const models::ModelSpec& spec) {
  auto h = std::make_shared<Eigen::MatrixXcd>(models::build_dense(spec));
  const std::int64_t dim = h->rows();
  // The matvec kernel reads row-major; Eigen stores column-major. For a
  // hermitian H the raw buffer read row-major equals conj(H), so conjugating
  // in place once lets the kernel compute H x directly.
  *h = h->conjugate();
  numerics::LinearOperator op;
  op.dim = dim;
  op.apply = [h, dim](const cxd* x, cxd* y) {
    kernels::dense_matvec(h->data(), static_cast<int>(dim), x, y);
  };
  numerics::LanczosOptions opt;
  opt.tol = 1e-11;
  opt.max_matvecs = 4000;
  opt.basis = 40;
  opt.seed = 811;
  auto [energy, vec] = numerics::extremal_eigenpair(op, {}, opt);
  phase_fix(vec);
  return {energy, std::move(vec)};
}

GroundState ed_ground_in_sector(const models::ModelSpec& spec, int m_target) {
  spec.validate();
  if (spec.family != models::Family::LambdaD)
    throw Error(ErrorKind::Config, "sector ED needs three-level sites");
  const int n = spec.sites, d = 3;
  const std::int64_t dim = ipow(d, n);
  if (dim > 200000)
    throw Error(ErrorKind::Config, "sector ED: chain too long");

  std::vector<std::int64_t> basis;
  std::unordered_map<std::int64_t, int> lookup;
  for (std::int64_t i = 0; i < dim; ++i) {
    int mtot = 0;
    std::int64_t v = i;
    for (int j = 0; j < n; ++j) {
      mtot += 1 - static_cast<int>(v % 3);
      v /= 3;
    }
    if (mtot == m_target) {
      lookup.emplace(i, static_cast<int>(basis.size()));
      basis.push_back(i);
    }
  }
  if (basis.empty())
    throw Error(ErrorKind::Config, "sector ED: empty sector");
  const int sdim = static_cast<int>(basis.size());

  // terms: per-bond SxSx + SySy + lambda SzSz, on-site d_field Sz^2 and the
  // optional edge fields; all applied digit-wise
  struct Term {
    int s1, s2;  // 1-based; s2 == 0 for on-site terms
    Eigen::MatrixXcd o1, o2;
    cxd coef;
  };
  std::vector<Term> terms;
  const auto sx = models::spin1_x(), sy = models::spin1_y(),
             sz = models::spin1_z();
  const Eigen::MatrixXcd sz2 = sz * sz;
  for (int j = 1; j <= n - 1; ++j) {
    terms.push_back({j, j + 1, sx, sx, cxd(1, 0)});
    terms.push_back({j, j + 1, sy, sy, cxd(1, 0)});
    terms.push_back({j, j + 1, sz, sz, cxd(spec.lambda, 0)});
  }
  if (spec.d_field != 0.0)
    for (int j = 1; j <= n; ++j)
      terms.push_back({j, 0, sz2, Eigen::MatrixXcd(), cxd(spec.d_field, 0)});
  if (spec.pert == models::Perturbation::SpinOneEdge && spec.pert_eps != 0.0) {
    terms.push_back({1, 0, sz, Eigen::MatrixXcd(), cxd(spec.pert_eps, 0)});
    terms.push_back(
        {n, 0, sz, Eigen::MatrixXcd(), cxd(spec.pert_sign * spec.pert_eps, 0)});
  }

  Eigen::MatrixXcd hs = Eigen::MatrixXcd::Zero(sdim, sdim);
  for (int col = 0; col < sdim; ++col) {
    const std::int64_t gi = basis[col];
    for (const auto& t : terms) {
      const std::int64_t str1 = ipow(d, n - t.s1);
      const int in1 = static_cast<int>((gi / str1) % d);
      if (t.s2 == 0) {
        for (int out1 = 0; out1 < d; ++out1) {
          const cxd val = t.coef * t.o1(out1, in1);
          if (val == cxd(0, 0)) continue;
          const std::int64_t gj = gi + (out1 - in1) * str1;
          auto it = lookup.find(gj);
          if (it != lookup.end()) hs(it->second, col) += val;
        }
      } else {
        const std::int64_t str2 = ipow(d, n - t.s2);
        const int in2 = static_cast<int>((gi / str2) % d);
        for (int out1 = 0; out1 < d; ++out1)
          for (int out2 = 0; out2 < d; ++out2) {
            const cxd val = t.coef * t.o1(out1, in1) * t.o2(out2, in2);
            if (val == cxd(0, 0)) continue;
            const std::int64_t gj =
                gi + (out1 - in1) * str1 + (out2 - in2) * str2;
            auto it = lookup.find(gj);
            if (it != lookup.end()) hs(it->second, col) += val;
          }
      }
    }
  }

  numerics::EigResult eig = numerics::hermitian_eig(hs, 1e-9);
  GroundState g;
  g.energy = eig.values[0];
  g.amplitudes.assign(dim, cxd(0, 0));
  for (int i = 0; i < sdim; ++i) g.amplitudes[basis[i]] = eig.vectors(i, 0);
  phase_fix(g.amplitudes);
  return g;
}

std::vector<double> ed_block_spectrum(const std::vector<cxd>& psi, int n, int d,
                                      int first, int count) {
  if (first < 1 || count < 1 || first + count - 1 > n)
    throw Error(ErrorKind::Shape, "ed_block_spectrum: block out of range");
  const std::int64_t dim = ipow(d, n);
  if (static_cast<std::int64_t>(psi.size()) != dim)
    throw Error(ErrorKind::Shape, "ed_block_spectrum: dimension mismatch");
  const std::int64_t db = ipow(d, count);
  const std::int64_t dpost = ipow(d, n - (first - 1) - count);
  const std::int64_t dpre = dim / (db * dpost);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(db, db);
  Eigen::VectorXcd v(db);
  for (std::int64_t pre = 0; pre < dpre; ++pre)
    for (std::int64_t post = 0; post < dpost; ++post) {
      for (std::int64_t b = 0; b < db; ++b)
        v[b] = psi[(pre * db + b) * dpost + post];
      rho.noalias() += v * v.adjoint();
    }

  numerics::EigResult eig = numerics::hermitian_eig(rho, 1e-9);
  std::vector<double> out(eig.values.size());
  for (int i = 0; i < eig.values.size(); ++i) {
    double x = eig.values[eig.values.size() - 1 - i];
    out[i] = x < 1e-14 ? 0.0 : x;
  }
  return out;
}

cxd ed_expectation(const std::vector<cxd>& psi, int n, int d,
                   const std::vector<std::pair<int, Eigen::MatrixXcd>>& factors) {
  const std::int64_t dim = ipow(d, n);
  if (static_cast<std::int64_t>(psi.size()) != dim)
    throw Error(ErrorKind::Shape, "ed_expectation: dimension mismatch");
  const int k = static_cast<int>(factors.size());
  std::vector<std::int64_t> stride(k);
  for (int i = 0; i < k; ++i) {
    if (i > 0 && factors[i].first <= factors[i - 1].first)
      throw Error(ErrorKind::Shape, "ed_expectation: sites must increase");
    stride[i] = ipow(d, n - factors[i].first);
  }
  const std::int64_t combos = ipow(d, k);
  cxd acc(0, 0);
  for (std::int64_t col = 0; col < dim; ++col) {
    if (psi[col] == cxd(0, 0)) continue;
    for (std::int64_t c = 0; c < combos; ++c) {
      std::int64_t row = col;
      cxd val = psi[col];
      std::int64_t cc = c;
      for (int i = 0; i < k; ++i) {
        const int in = static_cast<int>((col / stride[i]) % d);
        const int out = static_cast<int>(cc % d);
        cc /= d;
        val *= factors[i].second(out, in);
        row += (out - in) * stride[i];
      }
      if (val != cxd(0, 0)) acc += std::conj(psi[row]) * val;
    }
  }
  return acc;
}

double ed_parity_z(const std::vector<cxd>& psi, int n) {
  const std::int64_t dim = ipow(2, n);
  if (static_cast<std::int64_t>(psi.size()) != dim)
    throw Error(ErrorKind::Shape, "ed_parity_z: dimension mismatch");
  double acc = 0.0;
  for (std::int64_t i = 0; i < dim; ++i) {
    const double w = std::norm(psi[i]);
    if (w == 0.0) continue;
    int ones = 0;
    std::int64_t v = i;
    while (v) {
      ones += static_cast<int>(v & 1);
      v >>= 1;
    }
    acc += (ones % 2 == 0 ? w : -w);
  }
  return acc;
}

namespace {

inline int midx(int site, int a) { return 2 * (site - 1) + (a - 1); }  // 1-based

}  // namespace

MajoranaModel cluster_majorana(int n, double g, double eps, int sign) {
  if (n < 2) throw Error(ErrorKind::Config, "cluster_majorana: need >= 2 sites");
  MajoranaModel m;
  m.sites = n;
  m.k = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  auto add = [&](int a, int b, double gamma) {
    // i*gamma f_a f_b contributes K[a,b] += 2 gamma (antisymmetrized)
    m.k(a, b) += 2.0 * gamma;
    m.k(b, a) -= 2.0 * gamma;
  };
  // -X_k Z_{k+1} X_{k+2} = +i f^{(2)}_k f^{(1)}_{k+2}
  for (int k = 1; k <= n - 2; ++k) add(midx(k, 2), midx(k + 2, 1), 1.0);
  // g Y_k Y_{k+1} = i g f^{(1)}_k f^{(2)}_{k+1}
  for (int k = 1; k <= n - 1; ++k) add(midx(k, 1), midx(k + 1, 2), g);
  if (eps != 0.0) {
    // eps Y_1 X_2 = i eps f^{(1)}_1 f^{(1)}_2
    add(midx(1, 1), midx(2, 1), eps);
    // sign*eps X_{N-1} Y_N = -i sign*eps f^{(2)}_{N-1} f^{(2)}_N
    add(midx(n - 1, 2), midx(n, 2), -sign * eps);
  }
  return m;
}

FreeFermionGround free_fermion_ground(const MajoranaModel& m) {
  const int two_n = static_cast<int>(m.k.rows());
  const Eigen::MatrixXcd mm = cxd(0, 1) * m.k.cast<cxd>();
  numerics::EigResult eig = numerics::hermitian_eig(mm, 1e-10);

  const double ztol = 1e-12;
  FreeFermionGround out;
  out.gamma = Eigen::MatrixXd::Zero(two_n, two_n);

  Eigen::MatrixXcd pplus = Eigen::MatrixXcd::Zero(two_n, two_n);
  std::vector<int> zero_idx;
  double lowest_pos = 0.0;
  int lowest_i = -1;
  for (int i = 0; i < two_n; ++i) {
    const double e = eig.values[i];
    if (e > ztol) {
      pplus.noalias() += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
      out.energy -= 0.5 * e;
      out.modes.push_back(e);
      if (lowest_i < 0 || e < lowest_pos) {
        lowest_pos = e;
        lowest_i = i;
      }
    } else if (std::abs(e) <= ztol) {
      zero_idx.push_back(i);
    }
  }
  std::sort(out.modes.begin(), out.modes.end());
  out.gamma = -2.0 * pplus.imag();
  out.degenerate = !zero_idx.empty();

  if (lowest_i >= 0) {
    const Eigen::MatrixXcd uu =
        eig.vectors.col(lowest_i) * eig.vectors.col(lowest_i).adjoint();
    out.lowest_mode_flip = 4.0 * uu.imag();
  } else {
    out.lowest_mode_flip = Eigen::MatrixXd::Zero(two_n, two_n);
  }

  if (!zero_idx.empty()) {
    // Real orthonormal basis of the zero space, then localize on the site
    // position operator so that pairing is canonical and deterministic.
    std::vector<Eigen::VectorXd> basis;
    auto push_orth = [&](Eigen::VectorXd v) {
      for (const auto& b : basis) v -= b.dot(v) * b;
      for (const auto& b : basis) v -= b.dot(v) * b;
      const double nn = v.norm();
      if (nn > 1e-7) basis.push_back(v / nn);
    };
    for (int i : zero_idx) {
      push_orth(eig.vectors.col(i).real());
      push_orth(eig.vectors.col(i).imag());
    }
    const int kz = static_cast<int>(basis.size());
    if (kz != static_cast<int>(zero_idx.size()) || kz % 2 != 0)
      throw Error(ErrorKind::Numerical,
                  "free_fermion_ground: zero-space basis extraction failed");
    Eigen::MatrixXd v(two_n, kz);
    for (int i = 0; i < kz; ++i) v.col(i) = basis[i];
    Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(two_n, two_n);
    for (int a = 0; a < two_n; ++a) pos(a, a) = a / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(v.transpose() * pos * v);
    Eigen::MatrixXd loc = v * ps.eigenvectors();
    for (int i = 0; i < kz; ++i) {
      int am = 0;
      double best = -1.0;
      for (int a = 0; a < two_n; ++a)
        if (std::abs(loc(a, i)) > best + 1e-12) {
          best = std::abs(loc(a, i));
          am = a;
        }
      if (loc(am, i) < 0) loc.col(i) *= -1.0;
    }
    for (int p = 0; p + 1 < kz; p += 2) {
      const Eigen::MatrixXd a =
          loc.col(p) * loc.col(p + 1).transpose() -
          loc.col(p + 1) * loc.col(p).transpose();
      out.gamma += a;
      out.zero_flips.push_back(a);
    }
  }

  const double defect =
      (out.gamma * out.gamma.transpose() -
       Eigen::MatrixXd::Identity(two_n, two_n))
          .cwiseAbs()
          .maxCoeff();
  if (defect > 1e-8)
    throw Error(ErrorKind::Numerical,
                "free_fermion_ground: covariance not pure, defect " +
                    std::to_string(defect));
  return out;
}

std::vector<double> covariance_block_modes(const Eigen::MatrixXd& gamma,
                                           int first, int count) {
  const int n = static_cast<int>(gamma.rows()) / 2;
  if (first < 1 || count < 1 || first + count - 1 > n)
    throw Error(ErrorKind::Shape, "covariance_block_modes: block out of range");
  const int off = 2 * (first - 1), len = 2 * count;
  const Eigen::MatrixXd gb = gamma.block(off, off, len, len);
  const Eigen::MatrixXcd mb = cxd(0, 1) * gb.cast<cxd>();
  numerics::EigResult eig = numerics::hermitian_eig(mb, 1e-9);
  std::vector<double> nu(count);
  for (int i = 0; i < count; ++i) {
    double x = eig.values[len - 1 - i];  // positive half, descending
    if (x < 0.0) x = 0.0;
    if (x > 1.0) {
      if (x > 1.0 + 1e-8)
        throw Error(ErrorKind::Numerical, "covariance mode above 1");
      x = 1.0;
    }
    nu[i] = x;
  }
  return nu;
}

double covariance_block_renyi(const Eigen::MatrixXd& gamma, int first, int count,
                              double alpha) {
  if (!(alpha > 0.0))
    throw Error(ErrorKind::Config, "renyi order must be positive");
  const std::vector<double> nu = covariance_block_modes(gamma, first, count);
  double s = 0.0;
  for (double v : nu) {
    const double p = 0.5 * (1.0 + v), q = 0.5 * (1.0 - v);
    // Occupations below the eigensolver's resolution are noise on pure modes.
    // For alpha < 1 they would contribute O(q^alpha) garbage, so treat the
    // mode as exactly pure (zero entropy).
    if (q < 1e-13) continue;
    if (std::isinf(alpha)) {
      s += -std::log(p);
    } else if (alpha == 1.0) {
      if (p > 0.0) s -= p * std::log(p);
      if (q > 0.0) s -= q * std::log(q);
    } else {
      s += std::log(std::pow(p, alpha) + std::pow(q, alpha)) / (1.0 - alpha);
    }
  }
  return s;
}

std::vector<double> covariance_block_spectrum(const Eigen::MatrixXd& gamma,
                                              int first, int count) {
  if (count > 16)
    throw Error(ErrorKind::Config, "covariance_block_spectrum: block too large");
  const std::vector<double> nu = covariance_block_modes(gamma, first, count);
  std::vector<double> spec{1.0};
  for (double v : nu) {
    const double p = 0.5 * (1.0 + v), q = 0.5 * (1.0 - v);
    std::vector<double> next;
    next.reserve(spec.size() * 2);
    for (double x : spec) {
      next.push_back(x * p);
      next.push_back(x * q);
    }
    spec.swap(next);
  }
  std::sort(spec.begin(), spec.end(), std::greater<double>());
  return spec;
}

std::vector<double> covariance_block_spectrum_floor(const Eigen::MatrixXd& gamma,
                                                    int first, int count,
                                                    double floor) {
  if (!(floor > 0.0))
    throw Error(ErrorKind::Config, "spectrum floor must be positive");
  const std::vector<double> nu = covariance_block_modes(gamma, first, count);
  // RDM eigenvalues are products over modes of p_k or q_k. Start from the
  // all-majority product and flip modes in order of decreasing q/p ratio;
  // the running product only shrinks, so branches prune exactly at `floor`.
  double base = 1.0;
  std::vector<double> ratio;
  ratio.reserve(nu.size());
  for (double v : nu) {
    const double p = 0.5 * (1.0 + v), q = 0.5 * (1.0 - v);
    const double hi = std::max(p, q), lo = std::min(p, q);
    base *= hi;
    ratio.push_back(lo > 0.0 ? lo / hi : 0.0);
  }
  std::sort(ratio.begin(), ratio.end(), std::greater<double>());
  std::vector<double> spec;
  struct Frame {
    std::size_t next;
    double prod;
  };
  std::vector<Frame> stack{{0, base}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    spec.push_back(f.prod);
    if (spec.size() > (1u << 22))
      throw Error(ErrorKind::Numerical,
                  "block spectrum has too many eigenvalues above the floor");
    for (std::size_t i = f.next; i < ratio.size(); ++i) {
      const double prod = f.prod * ratio[i];
      if (prod < floor) break;
      stack.push_back({i + 1, prod});
    }
  }
  std::sort(spec.begin(), spec.end(), std::greater<double>());
  return spec;
}

double pfaffian(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  if (n % 2 != 0) return 0.0;
  double pf = 1.0;
  for (int k = 0; k + 1 < n; k += 2) {
    int p = k + 1;
    double mx = std::abs(a(k + 1, k));
    for (int i = k + 2; i < n; ++i)
      if (std::abs(a(i, k)) > mx) {
        mx = std::abs(a(i, k));
        p = i;
      }
    if (mx == 0.0) return 0.0;
    if (p != k + 1) {
      a.row(p).swap(a.row(k + 1));
      a.col(p).swap(a.col(k + 1));
      pf = -pf;
    }
    const double piv = a(k, k + 1);
    pf *= piv;
    for (int i = k + 2; i < n; ++i) {
      const double t = a(k, i) / piv;
      if (t != 0.0) {
        a.row(i) -= t * a.row(k + 1);
        a.col(i) -= t * a.col(k + 1);
      }
    }
  }
  return pf;
}

double covariance_parity(const Eigen::MatrixXd& gamma) { return pfaffian(gamma); }

double xx_correlation(const Eigen::MatrixXd& gamma, int i, int j) {
  const int n = static_cast<int>(gamma.rows()) / 2;
  if (i < 1 || j <= i || j > n)
    throw Error(ErrorKind::Shape, "xx_correlation: bad site pair");
  std::vector<int> idx;
  idx.push_back(midx(i, 2));
  for (int l = i + 1; l <= j - 1; ++l) {
    idx.push_back(midx(l, 1));
    idx.push_back(midx(l, 2));
  }
  idx.push_back(midx(j, 1));
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) sub(r, c) = gamma(idx[r], idx[c]);
  // X_i X_j = (-i)^(j-i) f^(2)_i [prod f^(1) f^(2)] f^(1)_j and Wick gives
  // another (-i)^(j-i) from <f_a f_b> = -i Gamma_ab.
  const double sign = (j - i) % 2 == 0 ? 1.0 : -1.0;
  return sign * pfaffian(std::move(sub));
}

double string_order_z_free(const Eigen::MatrixXd& gamma) {
  // Y_1 (prod_{2..N-1} Z) Y_N = i f^(1)_1 f^(2)_N, expectation Gamma(0,2N-1).
  const int n = static_cast<int>(gamma.rows()) / 2;
  const double sign = n % 2 == 0 ? 1.0 : -1.0;
  return sign * gamma(0, 2 * n - 1);
}

}  // namespace topoconv::exact
