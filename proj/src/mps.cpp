#include "topoconv/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <unsupported/Eigen/KroneckerProduct>

#include "topoconv/numerics.hpp"

namespace topoconv::mps {

namespace {

using RM = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RM>;
using CMapRM = Eigen::Map<const RM>;
using StridedCMap = Eigen::Map<const RM, 0, Eigen::OuterStride<>>;

// A_s as a (dl x dr) matrix; rows stride over the physical index.
StridedCMap phys_slice(const kernels::Tensor3& t, int s) {
  return StridedCMap(t.a.data() + static_cast<std::size_t>(s) * t.dr, t.dl,
                     t.dr, Eigen::OuterStride<>(static_cast<long>(t.dp) * t.dr));
}

// The tensor viewed as (dl*dp) x dr — contiguous in the row-major layout.
CMapRM left_fold(const kernels::Tensor3& t) {
  return CMapRM(t.a.data(), static_cast<long>(t.dl) * t.dp, t.dr);
}

// The tensor viewed as dl x (dp*dr).
CMapRM right_fold(const kernels::Tensor3& t) {
  return CMapRM(t.a.data(), t.dl, static_cast<long>(t.dp) * t.dr);
}

// Accepts the matrix in either fold of the target shape: row-major storage
// of (dl*dp) x dr and dl x (dp*dr) flattens identically.
kernels::Tensor3 tensor_from(const Eigen::MatrixXcd& m, int dl, int dp, int dr) {
  kernels::Tensor3 t(dl, dp, dr);
  if (static_cast<std::size_t>(m.rows()) * m.cols() != t.size())
    throw Error(ErrorKind::Shape, "tensor_from: size mismatch");
  MapRM(t.a.data(), m.rows(), m.cols()) = m;
  return t;
}

void check_site(const Mps& m, int site, const char* what) {
  if (site < 1 || site > m.sites())
    throw Error(ErrorKind::Config,
                std::string(what) + ": site index out of range");
}

std::int64_t checked_dim(int n, int d, std::int64_t cap) {
  std::int64_t dim = 1;
  for (int j = 0; j < n; ++j) {
    dim *= d;
    if (dim > cap)
      throw Error(ErrorKind::Config, "statevector dimension exceeds cap");
  }
  return dim;
}

struct ThinQr {
  Eigen::MatrixXcd q;  // rows x k, orthonormal columns
  Eigen::MatrixXcd r;  // k x cols, upper triangular
};

ThinQr thin_qr(const Eigen::MatrixXcd& m) {
  const long k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

// Moves the orthogonality center one site to the right (QR based).
void shift_center_right(Mps& m, int j) {
  const kernels::Tensor3& a = m.t[j - 1];
  ThinQr qr = thin_qr(left_fold(a));
  const int k = static_cast<int>(qr.q.cols());
  kernels::Tensor3 next =
      tensor_from(qr.r * right_fold(m.t[j]), k, m.d, m.t[j].dr);
  m.t[j - 1] = tensor_from(qr.q, a.dl, m.d, k);
  m.t[j] = std::move(next);
}

// Moves the orthogonality center one site to the left.
void shift_center_left(Mps& m, int j) {
  const kernels::Tensor3& a = m.t[j - 1];
  // LQ of the right fold via QR of its adjoint: M = R^H Q^H.
  ThinQr qr = thin_qr(right_fold(a).adjoint());
  const int k = static_cast<int>(qr.q.cols());
  kernels::Tensor3 prev = tensor_from(
      Eigen::MatrixXcd(left_fold(m.t[j - 2]) * qr.r.adjoint()),
      m.t[j - 2].dl, m.d, k);
  m.t[j - 1] = tensor_from(qr.q.adjoint(), k, m.d, a.dr);
  m.t[j - 2] = std::move(prev);
}

// sum_s A_s^H E B_s, optionally with an operator mixing the physical legs.
Eigen::MatrixXcd transfer_site(const Eigen::MatrixXcd& e,
                               const kernels::Tensor3& bra,
                               const kernels::Tensor3& ket,
                               const Eigen::MatrixXcd* op) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(bra.dr, ket.dr);
  if (op == nullptr) {
    for (int s = 0; s < bra.dp; ++s)
      out.noalias() += phys_slice(bra, s).adjoint() * e * phys_slice(ket, s);
    return out;
  }
  for (int s = 0; s < bra.dp; ++s) {
    Eigen::MatrixXcd partial = Eigen::MatrixXcd::Zero(e.rows(), ket.dr);
    for (int t = 0; t < ket.dp; ++t) {
      const cxd c = (*op)(s, t);
      if (c != cxd(0.0, 0.0)) partial.noalias() += c * (e * phys_slice(ket, t));
    }
    out.noalias() += phys_slice(bra, s).adjoint() * partial;
  }
  return out;
}

// Clamps noise, sorts descending, and drops entries at numerical zero
// (below 1e-14 they carry no entanglement-spectrum information).
double clamp_spectrum(std::vector<double>& vals) {
  double sum = 0.0;
  for (double& v : vals) {
    if (v < -1e-8)
      throw Error(ErrorKind::Numerical,
                  "density-matrix eigenvalue below -1e-8");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  while (!vals.empty() && vals.back() < 1e-14) vals.pop_back();
  return sum;
}

void check_unit_sum(double sum) {
  if (std::abs(sum - 1.0) > 1e-8)
    throw Error(ErrorKind::Numerical, "reduced density matrix trace != 1");
}

}  // namespace

std::string PartitionSpec::label() const {
  if (kind == Kind::BoundaryCut) return "cut" + std::to_string(cut_after);
  return "block" + std::to_string(start) + "x" + std::to_string(length);
}

Mps product_state(int n, int d, const std::vector<int>& levels) {
  if (n < 1 || d < 2) throw Error(ErrorKind::Config, "bad chain shape");
  if (levels.size() != 1 && static_cast<int>(levels.size()) != n)
    throw Error(ErrorKind::Config, "levels must have 1 or n entries");
  Mps m;
  m.d = d;
  m.t.reserve(n);
  for (int j = 0; j < n; ++j) {
    const int lv = levels[levels.size() == 1 ? 0 : j];
    if (lv < 0 || lv >= d) throw Error(ErrorKind::Config, "level out of range");
    kernels::Tensor3 a(1, d, 1);
    a.at(0, lv, 0) = cxd(1.0, 0.0);
    m.t.push_back(std::move(a));
  }
  m.center = 1;
  return m;
}

Mps random_state(int n, int d, int chi, std::uint64_t seed) {
  if (n < 1 || d < 2 || chi < 1)
    throw Error(ErrorKind::Config, "bad random-state shape");
  numerics::Rng rng(seed);
  Mps m;
  m.d = d;
  std::vector<int> bonds(n + 1, 1);
  for (int j = 1; j < n; ++j) {
    double lo = std::pow(static_cast<double>(d), std::min(j, n - j));
    bonds[j] = static_cast<int>(std::min<double>(chi, lo));
  }
  for (int j = 0; j < n; ++j) {
    kernels::Tensor3 a(bonds[j], d, bonds[j + 1]);
    for (cxd& x : a.a)
      x = cxd(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    m.t.push_back(std::move(a));
  }
  canonicalize(m, 1);
  normalize(m);
  return m;
}

Eigen::VectorXcd to_statevector(const Mps& m) {
  const std::int64_t dim = checked_dim(m.sites(), m.d, 1 << 20);
  // Accumulate amplitudes row-wise: rows enumerate configurations of the
  // sites consumed so far (site 1 slowest), columns the open bond.
  RM acc = RM::Ones(1, 1);
  for (const kernels::Tensor3& a : m.t) {
    RM next(acc.rows() * m.d, a.dr);
    for (int s = 0; s < m.d; ++s) {
      RM block = acc * phys_slice(a, s);
      for (long r = 0; r < acc.rows(); ++r) next.row(r * m.d + s) = block.row(r);
    }
    acc = std::move(next);
  }
  if (acc.cols() != 1 || acc.rows() != dim)
    throw Error(ErrorKind::Shape, "open boundary bond != 1");
  return Eigen::VectorXcd(acc.col(0));
}

Mps from_statevector(const Eigen::VectorXcd& v, int n, int d, double tol) {
  const std::int64_t dim = checked_dim(n, d, 1 << 20);
  if (v.size() != dim)
    throw Error(ErrorKind::Shape, "statevector length != d^n");
  Mps m;
  m.d = d;
  // Peel sites off the left: rest is (chi*d) x d^(n-j), split by SVD.
  RM rest = RM::Zero(1, dim);
  rest.row(0) = v.transpose();
  int chi = 1;
  for (int j = 1; j <= n; ++j) {
    const long cols = rest.cols() / d;
    RM mat(static_cast<long>(chi) * d, cols);
    for (int l = 0; l < chi; ++l)
      for (int s = 0; s < d; ++s)
        mat.row(static_cast<long>(l) * d + s) =
            rest.row(l).segment(static_cast<long>(s) * cols, cols);
    if (j == n) {
      m.t.push_back(tensor_from(mat, chi, d, 1));
      break;
    }
    numerics::SvdResult svd = numerics::svd(mat);
    int k = 0;
    const double cut = tol * (svd.s.size() > 0 ? svd.s[0] : 0.0);
    while (k < static_cast<int>(svd.s.size()) && svd.s[k] > cut) ++k;
    k = std::max(k, 1);
    m.t.push_back(tensor_from(svd.u.leftCols(k), chi, d, k));
    rest = svd.s.head(k).asDiagonal() * svd.v.leftCols(k).adjoint();
    chi = k;
  }
  m.center = n;
  return m;
}

cxd overlap(const Mps& a, const Mps& b) {
  if (a.sites() != b.sites() || a.d != b.d)
    throw Error(ErrorKind::Shape, "overlap: mismatched states");
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Ones(1, 1);
  for (int j = 1; j <= a.sites(); ++j)
    e = transfer_site(e, a.t[j - 1], b.t[j - 1], nullptr);
  return e(0, 0);
}

double norm(const Mps& m) {
  const double n2 = std::real(overlap(m, m));
  return std::sqrt(std::max(0.0, n2));
}

void normalize(Mps& m) {
  const double nm = norm(m);
  if (nm <= 0.0) throw Error(ErrorKind::Numerical, "cannot normalize null state");
  kernels::Tensor3& t = m.t[m.center >= 1 ? m.center - 1 : 0];
  const cxd scale(1.0 / nm, 0.0);
  for (cxd& x : t.a) x *= scale;
}

void canonicalize(Mps& m, int center) {
  check_site(m, center, "canonicalize");
  for (int j = 1; j < center; ++j) shift_center_right(m, j);
  for (int j = m.sites(); j > center; --j) shift_center_left(m, j);
  m.center = center;
}

RdmSpectrum boundary_cut_spectrum(const Mps& m, int cut_after) {
  if (cut_after < 1 || cut_after >= m.sites())
    throw Error(ErrorKind::Config, "cut must leave sites on both sides");
  Mps c = m;
  canonicalize(c, cut_after);
  normalize(c);
  numerics::SvdResult svd = numerics::svd(left_fold(c.t[cut_after - 1]));
  RdmSpectrum out;
  out.part.kind = PartitionSpec::Kind::BoundaryCut;
  out.part.cut_after = cut_after;
  out.eigenvalues.reserve(svd.s.size());
  for (long i = 0; i < svd.s.size(); ++i)
    out.eigenvalues.push_back(svd.s[i] * svd.s[i]);
  check_unit_sum(clamp_spectrum(out.eigenvalues));
  return out;
}

RdmSpectrum middle_block_spectrum(const Mps& m, int start, int length, int cap) {
  check_site(m, start, "middle_block_spectrum");
  if (length < 1 || start + length - 1 > m.sites())
    throw Error(ErrorKind::Config, "block must lie inside the chain");
  Mps c = m;
  canonicalize(c, start);
  normalize(c);
  const int end = start + length - 1;
  const int chi_l = c.t[start - 1].dl;
  const int chi_r = c.t[end - 1].dr;
  if (static_cast<std::int64_t>(chi_l) * chi_r > cap)
    throw Error(ErrorKind::Config,
                "middle_block_spectrum: environment dimension " +
                    std::to_string(chi_l) + "x" + std::to_string(chi_r) +
                    " exceeds cap; truncate the state to lower bond dimension");
  // With orthonormal environment bases the block transfer matrix, reindexed,
  // is the Gram matrix of the block vectors; its spectrum is spec(rho_B).
  Eigen::MatrixXcd acc;
  for (int j = start; j <= end; ++j) {
    const kernels::Tensor3& a = c.t[j - 1];
    Eigen::MatrixXcd t =
        Eigen::MatrixXcd::Zero(static_cast<long>(a.dl) * a.dl,
                               static_cast<long>(a.dr) * a.dr);
    for (int s = 0; s < a.dp; ++s) {
      const Eigen::MatrixXcd as = phys_slice(a, s);
      t += Eigen::kroneckerProduct(as, as.conjugate());
    }
    if (j == start)
      acc = std::move(t);
    else
      acc = (acc * t).eval();
  }
  Eigen::MatrixXcd gram(static_cast<long>(chi_l) * chi_r,
                        static_cast<long>(chi_l) * chi_r);
  for (int al = 0; al < chi_l; ++al)
    for (int be = 0; be < chi_r; ++be)
      for (int al2 = 0; al2 < chi_l; ++al2)
        for (int be2 = 0; be2 < chi_r; ++be2)
          gram(static_cast<long>(al) * chi_r + be,
               static_cast<long>(al2) * chi_r + be2) =
              acc(static_cast<long>(al) * chi_l + al2,
                  static_cast<long>(be) * chi_r + be2);
  gram = 0.5 * (gram + gram.adjoint()).eval();
  numerics::EigResult eig = numerics::hermitian_eig(gram, 1e-9);
  RdmSpectrum out;
  out.part.kind = PartitionSpec::Kind::MiddleBlock;
  out.part.start = start;
  out.part.length = length;
  out.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
  check_unit_sum(clamp_spectrum(out.eigenvalues));
  return out;
}

double expectation_mpo(const Mps& m, const models::Mpo& op) {
  if (op.n != m.sites() || op.d != m.d)
    throw Error(ErrorKind::Shape, "expectation_mpo: mismatched operator");
  kernels::EnvBlock env = kernels::EnvBlock::trivial();
  for (int j = 1; j <= m.sites(); ++j)
    env = kernels::transfer_left(env, op.w[j - 1], m.t[j - 1]);
  if (env.w != 1 || env.dout != 1 || env.din != 1)
    throw Error(ErrorKind::Shape, "expectation_mpo: open boundary");
  const cxd val = env.at(0, 0, 0);
  if (std::abs(val.imag()) > 1e-10)
    throw Error(ErrorKind::Numerical, "expectation has imaginary part");
  return val.real();
}

cxd string_expectation(const Mps& m,
                       const std::vector<std::pair<int, Eigen::MatrixXcd>>& ops) {
  if (ops.empty()) return cxd(1.0, 0.0);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    check_site(m, ops[i].first, "string_expectation");
    if (i > 0 && ops[i].first <= ops[i - 1].first)
      throw Error(ErrorKind::Config,
                  "string_expectation: sites must strictly increase");
    if (ops[i].second.rows() != m.d || ops[i].second.cols() != m.d)
      throw Error(ErrorKind::Shape, "string_expectation: operator shape");
  }
  // Outside [lo, hi] the gauge makes the transfer an identity, so the
  // contraction can start and stop at the canonical window.
  int lo = 1, hi = m.sites();
  if (m.center >= 1) {
    lo = std::min(ops.front().first, m.center);
    hi = std::max(ops.back().first, m.center);
  }
  const int chi0 = m.bond(lo - 1);
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Identity(chi0, chi0);
  std::size_t next = 0;
  for (int j = lo; j <= hi; ++j) {
    const Eigen::MatrixXcd* op = nullptr;
    if (next < ops.size() && ops[next].first == j) op = &ops[next++].second;
    e = transfer_site(e, m.t[j - 1], m.t[j - 1], op);
  }
  return e.trace();
}

double local_expectation(const Mps& m, const Eigen::MatrixXcd& op, int site) {
  const cxd val = string_expectation(m, {{site, op}});
  if (std::abs(val.imag()) > 1e-8)
    throw Error(ErrorKind::Numerical, "local expectation not real");
  return val.real();
}

std::vector<double> site_expectations(const Mps& m, const Eigen::MatrixXcd& op) {
  if (op.rows() != m.d || op.cols() != m.d)
    throw Error(ErrorKind::Shape, "site_expectations: operator shape");
  Mps c = m;
  canonicalize(c, 1);
  std::vector<double> out(c.sites());
  for (int j = 1; j <= c.sites(); ++j) {
    const kernels::Tensor3& a = c.t[j - 1];
    cxd val(0.0, 0.0);
    for (int s = 0; s < c.d; ++s)
      for (int t = 0; t < c.d; ++t) {
        if (op(s, t) == cxd(0.0, 0.0)) continue;
        val += op(s, t) *
               (phys_slice(a, s).adjoint() * phys_slice(a, t)).trace();
      }
    if (std::abs(val.imag()) > 1e-8)
      throw Error(ErrorKind::Numerical, "site expectation not real");
    out[j - 1] = val.real();
    if (j < c.sites()) shift_center_right(c, j);
  }
  return out;
}

Mps compress(const Mps& m, int chi_max, double discard_tol,
             CompressStats* stats) {
  if (chi_max < 1) throw Error(ErrorKind::Config, "compress: chi_max < 1");
  if (discard_tol < 0.0)
    throw Error(ErrorKind::Config, "compress: negative discard_tol");
  Mps c = m;
  canonicalize(c, 1);
  CompressStats st;
  for (int j = 1; j < c.sites(); ++j) {
    numerics::SvdResult svd = numerics::svd(left_fold(c.t[j - 1]));
    const long full = svd.s.size();
    double total = 0.0;
    for (long i = 0; i < full; ++i) total += svd.s[i] * svd.s[i];
    // Keep the smallest head whose dropped relative weight fits the budget.
    long k = full;
    double tail = 0.0;
    while (k > 1) {
      const double w = svd.s[k - 1] * svd.s[k - 1];
      if (tail + w > discard_tol * total) break;
      tail += w;
      --k;
    }
    k = std::min<long>(k, chi_max);
    double dropped = 0.0;
    for (long i = k; i < full; ++i) dropped += svd.s[i] * svd.s[i];
    const double rel = total > 0.0 ? dropped / total : 0.0;
    st.max_bond_discarded = std::max(st.max_bond_discarded, rel);
    st.total_discarded += rel;
    c.t[j - 1] = tensor_from(svd.u.leftCols(k), c.t[j - 1].dl, c.d,
                             static_cast<int>(k));
    Eigen::MatrixXcd carry =
        svd.s.head(k).asDiagonal() * svd.v.leftCols(k).adjoint();
    c.t[j] = tensor_from(Eigen::MatrixXcd(carry * right_fold(c.t[j])),
                         static_cast<int>(k), c.d, c.t[j].dr);
  }
  c.center = c.sites();
  normalize(c);
  if (stats != nullptr) *stats = st;
  return c;
}

void save(const Mps& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  const char magic[8] = {'T', 'P', 'C', 'M', 'P', 'S', '0', '1'};
  f.write(magic, 8);
  auto put = [&f](std::int32_t x) {
    f.write(reinterpret_cast<const char*>(&x), sizeof x);
  };
  put(m.sites());
  put(m.d);
  put(m.center);
  for (const kernels::Tensor3& t : m.t) {
    put(t.dl);
    put(t.dp);
    put(t.dr);
    f.write(reinterpret_cast<const char*>(t.a.data()),
            static_cast<std::streamsize>(t.size() * sizeof(cxd)));
  }
  if (!f) throw Error(ErrorKind::Io, "short write to " + path);
}

Mps load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot read " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "TPCMPS01", 8) != 0)
    throw Error(ErrorKind::Io, "not a state file: " + path);
  auto get = [&f, &path]() {
    std::int32_t x = 0;
    f.read(reinterpret_cast<char*>(&x), sizeof x);
    if (!f) throw Error(ErrorKind::Io, "truncated state file: " + path);
    return x;
  };
  const int n = get(), d = get(), center = get();
  if (n < 1 || d < 2 || d > 8 || center < -1 || center > n)
    throw Error(ErrorKind::Io, "corrupt state header: " + path);
  Mps m;
  m.d = d;
  m.center = center;
  for (int j = 0; j < n; ++j) {
    const int dl = get(), dp = get(), dr = get();
    if (dl < 1 || dp != d || dr < 1 ||
        static_cast<std::int64_t>(dl) * dp * dr > (std::int64_t{1} << 28))
      throw Error(ErrorKind::Io, "corrupt tensor header: " + path);
    if (j == 0 && dl != 1)
      throw Error(ErrorKind::Io, "corrupt boundary bond: " + path);
    if (j > 0 && dl != m.t.back().dr)
      throw Error(ErrorKind::Io, "mismatched bonds in state file: " + path);
    kernels::Tensor3 t(dl, dp, dr);
    f.read(reinterpret_cast<char*>(t.a.data()),
           static_cast<std::streamsize>(t.size() * sizeof(cxd)));
    if (!f) throw Error(ErrorKind::Io, "truncated tensor data: " + path);
    m.t.push_back(std::move(t));
  }
  if (m.t.back().dr != 1)
    throw Error(ErrorKind::Io, "corrupt boundary bond: " + path);
  return m;
}

}  // namespace topoconv::mps
