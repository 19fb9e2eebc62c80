#include "topoconv/models.hpp"

#include <cmath>
#include <cstring>

namespace topoconv::models {

namespace {

constexpr cxd kI{0.0, 1.0};

std::int64_t ipow(int b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

void ModelSpec::validate() const {
  if (sites < 2) throw Error(ErrorKind::Config, "model: need at least 2 sites");
  if (family == Family::ClusterIsing) {
    if (pert == Perturbation::SpinOneEdge)
      throw Error(ErrorKind::Config, "model: SpinOneEdge needs three-level sites");
    if (sector_active)
      throw Error(ErrorKind::Config,
                  "model: sector projection is defined for three-level sites");
    if (pert == Perturbation::ClusterEdgeXZ && sites < 3)
      throw Error(ErrorKind::Config, "model: ClusterEdgeXZ needs at least 3 sites");
  } else {
    if (pert == Perturbation::ClusterEdge || pert == Perturbation::ClusterEdgeXZ)
      throw Error(ErrorKind::Config, "model: ClusterEdge needs two-level sites");
    if (edge_field_y != 0.0 || parity_pin != 0.0)
      throw Error(ErrorKind::Config,
                  "model: edge_field_y/parity_pin apply to two-level chains");
    if (sector_active) {
      if (sector_mu <= 0.0)
        throw Error(ErrorKind::Config, "model: sector penalty must be positive");
      if (std::abs(sector_m) > sites)
        throw Error(ErrorKind::Config, "model: sector target out of range");
    }
  }
  if (pert != Perturbation::None && pert_sign != 1 && pert_sign != -1)
    throw Error(ErrorKind::Config, "model: perturbation sign must be +1 or -1");
}

ModelSpec bare(const ModelSpec& spec) {
  ModelSpec b = spec;
  b.sector_active = false;
  return b;
}

Eigen::MatrixXcd pauli_id() { return Eigen::MatrixXcd::Identity(2, 2); }

Eigen::MatrixXcd pauli_x() {
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Eigen::MatrixXcd pauli_y() {
  Eigen::MatrixXcd m(2, 2);
  m << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
  return m;
}

Eigen::MatrixXcd pauli_z() {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Eigen::MatrixXcd spin1_id() { return Eigen::MatrixXcd::Identity(3, 3); }

Eigen::MatrixXcd spin1_x() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 1) = r;
  m(1, 0) = r;
  m(1, 2) = r;
  m(2, 1) = r;
  return m;
}

Eigen::MatrixXcd spin1_y() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 1) = -kI * r;
  m(1, 0) = kI * r;
  m(1, 2) = -kI * r;
  m(2, 1) = kI * r;
  return m;
}

Eigen::MatrixXcd spin1_z() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

Eigen::MatrixXcd spin1_exp_pi_x() {
  Eigen::MatrixXcd sx = spin1_x();
  return Eigen::MatrixXcd::Identity(3, 3) - 2.0 * sx * sx;
}

Eigen::MatrixXcd spin1_exp_pi_z() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 0) = -1.0;
  m(1, 1) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

void add_product_term(Eigen::MatrixXcd& h, int n, int d, cxd coef,
                      const std::vector<std::pair<int, Eigen::MatrixXcd>>& factors) {
  const std::int64_t dim = ipow(d, n);
  const int k = static_cast<int>(factors.size());
  std::vector<std::int64_t> stride(k);
  for (int i = 0; i < k; ++i) {
    const int site = factors[i].first;
    if (site < 1 || site > n)
      throw Error(ErrorKind::Shape, "add_product_term: site out of range");
    if (i > 0 && site <= factors[i - 1].first)
      throw Error(ErrorKind::Shape, "add_product_term: sites must increase");
    stride[i] = ipow(d, n - site);
  }
  const std::int64_t combos = ipow(d, k);
  for (std::int64_t col = 0; col < dim; ++col) {
    std::vector<int> in(k);
    for (int i = 0; i < k; ++i) in[i] = static_cast<int>((col / stride[i]) % d);
    for (std::int64_t c = 0; c < combos; ++c) {
      std::int64_t row = col;
      cxd val = coef;
      std::int64_t cc = c;
      for (int i = 0; i < k; ++i) {
        const int out = static_cast<int>(cc % d);
        cc /= d;
        val *= factors[i].second(out, in[i]);
        row += (out - in[i]) * stride[i];
      }
      if (val != cxd(0.0, 0.0)) h(row, col) += val;
    }
  }
}

Eigen::MatrixXcd build_dense(const ModelSpec& spec) {
  spec.validate();
  const int n = spec.sites, d = spec.local_dim();
  const std::int64_t dim = ipow(d, n);
  if (dim > 20000)
    throw Error(ErrorKind::Config, "build_dense: basis too large");
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

  if (spec.family == Family::ClusterIsing) {
    const auto x = pauli_x(), y = pauli_y(), z = pauli_z();
    for (int j = 2; j <= n - 1; ++j)
      add_product_term(h, n, d, cxd(-1.0, 0.0),
                       {{j - 1, x}, {j, z}, {j + 1, x}});
    for (int j = 1; j <= n - 1; ++j)
      add_product_term(h, n, d, cxd(spec.g, 0.0), {{j, y}, {j + 1, y}});
    if (spec.pert == Perturbation::ClusterEdge && spec.pert_eps != 0.0) {
      add_product_term(h, n, d, cxd(spec.pert_eps, 0.0), {{1, y}, {2, x}});
      add_product_term(h, n, d, cxd(spec.pert_sign * spec.pert_eps, 0.0),
                       {{n - 1, x}, {n, y}});
    }
    if (spec.pert == Perturbation::ClusterEdgeXZ && spec.pert_eps != 0.0) {
      add_product_term(h, n, d, cxd(spec.pert_eps, 0.0), {{1, x}, {2, z}});
      add_product_term(h, n, d, cxd(spec.pert_sign * spec.pert_eps, 0.0),
                       {{n - 1, z}, {n, x}});
    }
    if (spec.edge_field_y != 0.0) {
      add_product_term(h, n, d, cxd(spec.edge_field_y, 0.0), {{1, y}});
      add_product_term(h, n, d, cxd(-spec.edge_field_y, 0.0), {{n, y}});
    }
    if (spec.parity_pin != 0.0) {
      // -mu_p * prod_j Z_j is diagonal: parity of the bit-sum.
      for (std::int64_t i = 0; i < dim; ++i) {
        int ones = 0;
        std::int64_t v = i;
        while (v) {
          ones += static_cast<int>(v & 1);
          v >>= 1;
        }
        h(i, i) += (ones % 2 == 0 ? -spec.parity_pin : spec.parity_pin);
      }
    }
  } else {
    const auto sx = spin1_x(), sy = spin1_y(), sz = spin1_z();
    const Eigen::MatrixXcd sz2 = sz * sz;
    for (int j = 1; j <= n - 1; ++j) {
      add_product_term(h, n, d, cxd(1.0, 0.0), {{j, sx}, {j + 1, sx}});
      add_product_term(h, n, d, cxd(1.0, 0.0), {{j, sy}, {j + 1, sy}});
      add_product_term(h, n, d, cxd(spec.lambda, 0.0), {{j, sz}, {j + 1, sz}});
    }
    if (spec.d_field != 0.0)
      for (int j = 1; j <= n; ++j)
        add_product_term(h, n, d, cxd(spec.d_field, 0.0), {{j, sz2}});
    if (spec.pert == Perturbation::SpinOneEdge && spec.pert_eps != 0.0) {
      add_product_term(h, n, d, cxd(spec.pert_eps, 0.0), {{1, sz}});
      add_product_term(h, n, d, cxd(spec.pert_sign * spec.pert_eps, 0.0),
                       {{n, sz}});
    }
    if (spec.sector_active) {
      // Diagonal penalty mu * (m_tot - m)^2; digit 0 -> m=+1, 2 -> m=-1.
      for (std::int64_t i = 0; i < dim; ++i) {
        int mtot = 0;
        std::int64_t v = i;
        for (int j = 0; j < n; ++j) {
          mtot += 1 - static_cast<int>(v % 3);
          v /= 3;
        }
        const double dm = mtot - spec.sector_m;
        h(i, i) += spec.sector_mu * dm * dm;
      }
    }
  }
  return h;
}

namespace {

struct MpoBuilder {
  int w;
  std::vector<kernels::Tensor4> site;

  MpoBuilder(int n, int w_, int d) : w(w_), site(n, kernels::Tensor4(w_, w_, d)) {}

  // 1-based site.
  void add(int j, int from, int to, const Eigen::MatrixXcd& op, cxd coef) {
    auto& t = site[j - 1];
    for (int s = 0; s < t.d; ++s)
      for (int u = 0; u < t.d; ++u)
        if (op(s, u) != cxd(0.0, 0.0)) t.at(from, to, s, u) += coef * op(s, u);
  }

  Mpo finish(int n, int d, int fin) {
    Mpo m;
    m.n = n;
    m.d = d;
    m.w.resize(n);
    // interior sites keep the full square tensor
    for (int j = 1; j < n - 1; ++j) m.w[j] = site[j];
    // row 0 slice at the first site
    kernels::Tensor4 first(1, w, d);
    for (int b = 0; b < w; ++b)
      for (int s = 0; s < d; ++s)
        for (int u = 0; u < d; ++u) first.at(0, b, s, u) = site[0].at(0, b, s, u);
    m.w[0] = first;
    // final-state column slice at the last site
    kernels::Tensor4 last(w, 1, d);
    for (int a = 0; a < w; ++a)
      for (int s = 0; s < d; ++s)
        for (int u = 0; u < d; ++u)
          last.at(a, 0, s, u) = site[n - 1].at(a, fin, s, u);
    m.w[n - 1] = last;
    return m;
  }
};

}  // namespace

Mpo build_mpo(const ModelSpec& spec) {
  spec.validate();
  const int n = spec.sites, d = spec.local_dim();

  if (spec.family == Family::ClusterIsing) {
    // Automaton states: 0 idle, 1 X placed, 2 XZ placed, 3 Y placed,
    // 4 right-edge X placed, 5 final, 6 parity string (optional).
    const bool pin = spec.parity_pin != 0.0;
    const int fin = 5, par = 6;
    MpoBuilder b(n, pin ? 7 : 6, d);
    const auto id = pauli_id(), x = pauli_x(), y = pauli_y(), z = pauli_z();
    for (int j = 1; j <= n; ++j) {
      b.add(j, 0, 0, id, 1.0);
      b.add(j, fin, fin, id, 1.0);
      if (j <= n - 2) b.add(j, 0, 1, x, 1.0);
      if (j >= 2 && j <= n - 1) b.add(j, 1, 2, z, 1.0);
      if (j >= 3) b.add(j, 2, fin, x, -1.0);
      if (j <= n - 1) b.add(j, 0, 3, y, 1.0);
      if (j >= 2) b.add(j, 3, fin, y, spec.g);
    }
    if (spec.pert == Perturbation::ClusterEdge && spec.pert_eps != 0.0) {
      b.add(2, 3, fin, x, spec.pert_eps);
      b.add(n - 1, 0, 4, x, 1.0);
      b.add(n, 4, fin, y, spec.pert_sign * spec.pert_eps);
    }
    if (spec.pert == Perturbation::ClusterEdgeXZ && spec.pert_eps != 0.0) {
      // X_1 Z_2 rides the existing "X placed" state; Z_{N-1} X_N uses the
      // right-edge carrier like the quadratic variant does.
      b.add(2, 1, fin, z, spec.pert_eps);
      b.add(n - 1, 0, 4, z, 1.0);
      b.add(n, 4, fin, x, spec.pert_sign * spec.pert_eps);
    }
    if (spec.edge_field_y != 0.0) {
      b.add(1, 0, fin, y, spec.edge_field_y);
      b.add(n, 0, fin, y, -spec.edge_field_y);
    }
    if (pin) {
      b.add(1, 0, par, z, -spec.parity_pin);
      for (int j = 2; j <= n - 1; ++j) b.add(j, par, par, z, 1.0);
      b.add(n, par, fin, z, 1.0);
    }
    return b.finish(n, d, fin);
  }

  // Automaton states: 0 idle, 1 Sx, 2 Sy, 3 Sz placed, then the optional
  // penalty chain, then final.
  const bool pen = spec.sector_active;
  const int penst = 4;
  const int fin = pen ? 5 : 4;
  MpoBuilder b(n, pen ? 6 : 5, d);
  const auto id = spin1_id(), sx = spin1_x(), sy = spin1_y(), sz = spin1_z();
  const Eigen::MatrixXcd sz2 = sz * sz;
  for (int j = 1; j <= n; ++j) {
    b.add(j, 0, 0, id, 1.0);
    b.add(j, fin, fin, id, 1.0);
    if (j <= n - 1) {
      b.add(j, 0, 1, sx, 1.0);
      b.add(j, 0, 2, sy, 1.0);
      b.add(j, 0, 3, sz, 1.0);
    }
    if (j >= 2) {
      b.add(j, 1, fin, sx, 1.0);
      b.add(j, 2, fin, sy, 1.0);
      b.add(j, 3, fin, sz, spec.lambda);
    }
    if (spec.d_field != 0.0) b.add(j, 0, fin, sz2, spec.d_field);
    if (pen) {
      b.add(j, 0, fin, sz2, spec.sector_mu);
      b.add(j, 0, fin, sz, -2.0 * spec.sector_mu * spec.sector_m);
      b.add(j, 0, fin, id,
            spec.sector_mu * spec.sector_m * spec.sector_m / n);
      if (j <= n - 1) b.add(j, 0, penst, sz, 1.0);
      if (j >= 2 && j <= n - 1) b.add(j, penst, penst, id, 1.0);
      if (j >= 2) b.add(j, penst, fin, sz, 2.0 * spec.sector_mu);
    }
  }
  if (spec.pert == Perturbation::SpinOneEdge && spec.pert_eps != 0.0) {
    b.add(1, 0, fin, sz, spec.pert_eps);
    b.add(n, 0, fin, sz, spec.pert_sign * spec.pert_eps);
  }
  return b.finish(n, d, fin);
}

std::vector<cxd> mpo_apply_statevector(const Mpo& mpo, const std::vector<cxd>& v) {
  const int n = mpo.n, d = mpo.d;
  const std::int64_t dim = ipow(d, n);
  if (static_cast<std::int64_t>(v.size()) != dim)
    throw Error(ErrorKind::Shape, "mpo_apply_statevector: dimension mismatch");

  // t[a][prefix][suffix]: output digits fixed so far in `prefix`.
  std::vector<cxd> t(v);
  std::int64_t prefix = 1, suffix = dim;
  int wl = 1;
  for (int k = 0; k < n; ++k) {
    const auto& w = mpo.w[k];
    const std::int64_t nsuf = suffix / d;
    std::vector<cxd> nt(static_cast<std::size_t>(w.wr) * prefix * d * nsuf);
    for (int a = 0; a < w.wl; ++a)
      for (int bb = 0; bb < w.wr; ++bb)
        for (int s = 0; s < d; ++s)
          for (int u = 0; u < d; ++u) {
            const cxd c = w.at(a, bb, s, u);
            if (c == cxd(0.0, 0.0)) continue;
            for (std::int64_t p = 0; p < prefix; ++p) {
              cxd* dst = &nt[((static_cast<std::size_t>(bb) * prefix + p) * d + s) * nsuf];
              const cxd* src =
                  &t[((static_cast<std::size_t>(a) * prefix + p) * d + u) * nsuf];
              for (std::int64_t q = 0; q < nsuf; ++q) dst[q] += c * src[q];
            }
          }
    t.swap(nt);
    prefix *= d;
    suffix = nsuf;
    wl = w.wr;
  }
  if (wl != 1)
    throw Error(ErrorKind::Shape, "mpo_apply_statevector: open MPO boundary");
  return t;
}

Eigen::MatrixXcd mpo_to_dense(const Mpo& mpo) {
  const std::int64_t dim = ipow(mpo.d, mpo.n);
  if (dim > 1024) throw Error(ErrorKind::Config, "mpo_to_dense: basis too large");
  Eigen::MatrixXcd h(dim, dim);
  std::vector<cxd> e(dim, cxd(0.0, 0.0));
  for (std::int64_t c = 0; c < dim; ++c) {
    e[c] = 1.0;
    std::vector<cxd> col = mpo_apply_statevector(mpo, e);
    for (std::int64_t r = 0; r < dim; ++r) h(r, c) = col[r];
    e[c] = 0.0;
  }
  return h;
}

Mpo total_sz_mpo(int n) {
  MpoBuilder b(n, 2, 3);
  const auto id = spin1_id(), sz = spin1_z();
  for (int j = 1; j <= n; ++j) {
    b.add(j, 0, 0, id, 1.0);
    b.add(j, 1, 1, id, 1.0);
    b.add(j, 0, 1, sz, 1.0);
  }
  return b.finish(n, 3, 1);
}

Mpo total_sz_sq_mpo(int n) {
  MpoBuilder b(n, 3, 3);
  const auto id = spin1_id(), sz = spin1_z();
  const Eigen::MatrixXcd sz2 = sz * sz;
  for (int j = 1; j <= n; ++j) {
    b.add(j, 0, 0, id, 1.0);
    b.add(j, 2, 2, id, 1.0);
    b.add(j, 0, 2, sz2, 1.0);
    b.add(j, 0, 1, sz, 1.0);
    if (j >= 2) {
      b.add(j, 1, 1, id, 1.0);
      b.add(j, 1, 2, sz, 2.0);
    }
  }
  return b.finish(n, 3, 2);
}

}  // namespace topoconv::models
