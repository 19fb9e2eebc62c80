#include "topoconv/kernels.hpp"

#include <atomic>
#include <cstring>

#include <Eigen/Dense>
#include <omp.h>

namespace topoconv::kernels {

namespace {

using RM = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RM>;
using CMapRM = Eigen::Map<const RM>;

std::atomic<Exec> g_exec{Exec::Parallel};

}  // namespace

void set_execution(Exec mode) { g_exec.store(mode); }
Exec execution() { return g_exec.load(); }

namespace serial {

void apply_two_site(const EnvBlock& left, const Tensor4& w1, const Tensor4& w2,
                    const EnvBlock& right, const cxd* x, cxd* y) {
  const int lo = left.dout, li = left.din;
  const int ro = right.dout, ri = right.din;
  const int d1 = w1.d, d2 = w2.d;
  const int wa = w1.wl, wm = w1.wr, wb = w2.wr;
  const std::size_t in_tail = static_cast<std::size_t>(d1) * d2 * ri;

  std::vector<cxd> t1(static_cast<std::size_t>(wa) * lo * in_tail);
  for (int a = 0; a < wa; ++a)
    for (int l = 0; l < lo; ++l)
      for (int lp = 0; lp < li; ++lp) {
        const cxd c = left.at(a, l, lp);
        if (c == cxd(0.0, 0.0)) continue;
        cxd* dst = &t1[(static_cast<std::size_t>(a) * lo + l) * in_tail];
        const cxd* src = &x[lp * in_tail];
        for (std::size_t k = 0; k < in_tail; ++k) dst[k] += c * src[k];
      }

  const std::size_t t2_tail = static_cast<std::size_t>(d2) * ri;
  std::vector<cxd> t2(static_cast<std::size_t>(wm) * lo * d1 * t2_tail);
  for (int m = 0; m < wm; ++m)
    for (int s1 = 0; s1 < d1; ++s1)
      for (int a = 0; a < wa; ++a)
        for (int u1 = 0; u1 < d1; ++u1) {
          const cxd c = w1.at(a, m, s1, u1);
          if (c == cxd(0.0, 0.0)) continue;
          for (int l = 0; l < lo; ++l) {
            cxd* dst =
                &t2[((static_cast<std::size_t>(m) * lo + l) * d1 + s1) * t2_tail];
            const cxd* src =
                &t1[((static_cast<std::size_t>(a) * lo + l) * d1 + u1) * t2_tail];
            for (std::size_t k = 0; k < t2_tail; ++k) dst[k] += c * src[k];
          }
        }

  std::vector<cxd> t3(static_cast<std::size_t>(wb) * lo * d1 * d2 * ri);
  for (int b = 0; b < wb; ++b)
    for (int s2 = 0; s2 < d2; ++s2)
      for (int m = 0; m < wm; ++m)
        for (int u2 = 0; u2 < d2; ++u2) {
          const cxd c = w2.at(m, b, s2, u2);
          if (c == cxd(0.0, 0.0)) continue;
          for (int l = 0; l < lo; ++l)
            for (int s1 = 0; s1 < d1; ++s1) {
              cxd* dst = &t3[(((static_cast<std::size_t>(b) * lo + l) * d1 + s1) *
                                  d2 +
                              s2) *
                             ri];
              const cxd* src = &t2[(((static_cast<std::size_t>(m) * lo + l) * d1 +
                                     s1) *
                                        d2 +
                                    u2) *
                                   ri];
              for (int k = 0; k < ri; ++k) dst[k] += c * src[k];
            }
        }

  const std::size_t rows = static_cast<std::size_t>(lo) * d1 * d2;
  std::memset(y, 0, rows * ro * sizeof(cxd));
  for (int b = 0; b < wb; ++b)
    for (std::size_t row = 0; row < rows; ++row)
      for (int r = 0; r < ro; ++r) {
        cxd acc(0.0, 0.0);
        const cxd* src = &t3[(static_cast<std::size_t>(b) * rows + row) * ri];
        for (int rp = 0; rp < ri; ++rp) acc += right.at(b, r, rp) * src[rp];
        y[row * ro + r] += acc;
      }
}

EnvBlock transfer_left(const EnvBlock& left, const Tensor4& w, const Tensor3& m) {
  const int lo = left.dout, li = left.din;
  EnvBlock out(w.wr, m.dr, m.dr);
  for (int b = 0; b < w.wr; ++b)
    for (int rb = 0; rb < m.dr; ++rb)
      for (int rk = 0; rk < m.dr; ++rk) {
        cxd acc(0.0, 0.0);
        for (int a = 0; a < w.wl; ++a)
          for (int s = 0; s < w.d; ++s)
            for (int t = 0; t < w.d; ++t) {
              const cxd c = w.at(a, b, s, t);
              if (c == cxd(0.0, 0.0)) continue;
              for (int lb = 0; lb < lo; ++lb)
                for (int lk = 0; lk < li; ++lk)
                  acc += std::conj(m.at(lb, s, rb)) * c * m.at(lk, t, rk) *
                         left.at(a, lb, lk);
            }
        out.at(b, rb, rk) = acc;
      }
  return out;
}

EnvBlock transfer_right(const EnvBlock& right, const Tensor4& w,
                        const Tensor3& m) {
  const int ro = right.dout, ri = right.din;
  EnvBlock out(w.wl, m.dl, m.dl);
  for (int a = 0; a < w.wl; ++a)
    for (int lb = 0; lb < m.dl; ++lb)
      for (int lk = 0; lk < m.dl; ++lk) {
        cxd acc(0.0, 0.0);
        for (int b = 0; b < w.wr; ++b)
          for (int s = 0; s < w.d; ++s)
            for (int t = 0; t < w.d; ++t) {
              const cxd c = w.at(a, b, s, t);
              if (c == cxd(0.0, 0.0)) continue;
              for (int rb = 0; rb < ro; ++rb)
                for (int rk = 0; rk < ri; ++rk)
                  acc += std::conj(m.at(lb, s, rb)) * c * m.at(lk, t, rk) *
                         right.at(b, rb, rk);
            }
        out.at(a, lb, lk) = acc;
      }
  return out;
}

void dense_matvec(const cxd* h, int n, const cxd* x, cxd* y) {
  for (int i = 0; i < n; ++i) {
    cxd acc(0.0, 0.0);
    const cxd* row = h + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

}  // namespace serial

namespace parallel {

void apply_two_site(const EnvBlock& left, const Tensor4& w1, const Tensor4& w2,
                    const EnvBlock& right, const cxd* x, cxd* y) {
  const int lo = left.dout, li = left.din;
  const int ro = right.dout, ri = right.din;
  const int d1 = w1.d, d2 = w2.d;
  const int wa = w1.wl, wm = w1.wr, wb = w2.wr;
  const int in_tail = d1 * d2 * ri;

  std::vector<cxd> t1(static_cast<std::size_t>(wa) * lo * in_tail);
  CMapRM xm(x, li, in_tail);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int a = 0; a < wa; ++a) {
    CMapRM la(&left.a[static_cast<std::size_t>(a) * lo * li], lo, li);
    MapRM out(&t1[static_cast<std::size_t>(a) * lo * in_tail], lo, in_tail);
    out.noalias() = la * xm;
  }

  const int t2_tail = d2 * ri;
  std::vector<cxd> t2(static_cast<std::size_t>(wm) * lo * d1 * t2_tail);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int m = 0; m < wm; ++m)
    for (int s1 = 0; s1 < d1; ++s1)
      for (int a = 0; a < wa; ++a)
        for (int u1 = 0; u1 < d1; ++u1) {
          const cxd c = w1.at(a, m, s1, u1);
          if (c == cxd(0.0, 0.0)) continue;
          for (int l = 0; l < lo; ++l) {
            cxd* dst =
                &t2[((static_cast<std::size_t>(m) * lo + l) * d1 + s1) * t2_tail];
            const cxd* src =
                &t1[((static_cast<std::size_t>(a) * lo + l) * d1 + u1) * t2_tail];
            for (int k = 0; k < t2_tail; ++k) dst[k] += c * src[k];
          }
        }

  std::vector<cxd> t3(static_cast<std::size_t>(wb) * lo * d1 * d2 * ri);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int b = 0; b < wb; ++b)
    for (int s2 = 0; s2 < d2; ++s2)
      for (int m = 0; m < wm; ++m)
        for (int u2 = 0; u2 < d2; ++u2) {
          const cxd c = w2.at(m, b, s2, u2);
          if (c == cxd(0.0, 0.0)) continue;
          for (int l = 0; l < lo; ++l)
            for (int s1 = 0; s1 < d1; ++s1) {
              cxd* dst = &t3[(((static_cast<std::size_t>(b) * lo + l) * d1 + s1) *
                                  d2 +
                              s2) *
                             ri];
              const cxd* src = &t2[(((static_cast<std::size_t>(m) * lo + l) * d1 +
                                     s1) *
                                        d2 +
                                    u2) *
                                   ri];
              for (int k = 0; k < ri; ++k) dst[k] += c * src[k];
            }
        }

  const int rows = lo * d1 * d2;
  MapRM ym(y, rows, ro);
  ym.setZero();
  for (int b = 0; b < wb; ++b) {
    CMapRM t3b(&t3[static_cast<std::size_t>(b) * rows * ri], rows, ri);
    CMapRM rb(&right.a[static_cast<std::size_t>(b) * ro * ri], ro, ri);
    ym.noalias() += t3b * rb.transpose();
  }
}

EnvBlock transfer_left(const EnvBlock& left, const Tensor4& w, const Tensor3& m) {
  const int lo = left.dout, li = left.din;
  const int d = w.d, chi_r = m.dr;
  const int tail = d * chi_r;

  std::vector<cxd> p(static_cast<std::size_t>(w.wl) * lo * tail);
  CMapRM mm(m.a.data(), li, tail);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int a = 0; a < w.wl; ++a) {
    CMapRM la(&left.a[static_cast<std::size_t>(a) * lo * li], lo, li);
    MapRM out(&p[static_cast<std::size_t>(a) * lo * tail], lo, tail);
    out.noalias() = la * mm;
  }

  std::vector<cxd> q(static_cast<std::size_t>(w.wr) * lo * tail);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int b = 0; b < w.wr; ++b)
    for (int s = 0; s < d; ++s)
      for (int a = 0; a < w.wl; ++a)
        for (int t = 0; t < d; ++t) {
          const cxd c = w.at(a, b, s, t);
          if (c == cxd(0.0, 0.0)) continue;
          for (int l = 0; l < lo; ++l) {
            cxd* dst = &q[((static_cast<std::size_t>(b) * lo + l) * d + s) * chi_r];
            const cxd* src =
                &p[((static_cast<std::size_t>(a) * lo + l) * d + t) * chi_r];
            for (int k = 0; k < chi_r; ++k) dst[k] += c * src[k];
          }
        }

  EnvBlock out(w.wr, chi_r, chi_r);
  CMapRM bra(m.a.data(), static_cast<std::size_t>(m.dl) * d, chi_r);
  for (int b = 0; b < w.wr; ++b) {
    CMapRM qb(&q[static_cast<std::size_t>(b) * lo * tail],
              static_cast<std::size_t>(lo) * d, chi_r);
    MapRM ob(&out.a[static_cast<std::size_t>(b) * chi_r * chi_r], chi_r, chi_r);
    ob.noalias() = bra.adjoint() * qb;
  }
  return out;
}

EnvBlock transfer_right(const EnvBlock& right, const Tensor4& w,
                        const Tensor3& m) {
  const int ro = right.dout, ri = right.din;
  const int d = w.d, chi_l = m.dl;

  // p[b][(l t)][r_bra]
  std::vector<cxd> p(static_cast<std::size_t>(w.wr) * chi_l * d * ro);
  CMapRM mm(m.a.data(), static_cast<std::size_t>(chi_l) * d, m.dr);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int b = 0; b < w.wr; ++b) {
    CMapRM rb(&right.a[static_cast<std::size_t>(b) * ro * ri], ro, ri);
    MapRM out(&p[static_cast<std::size_t>(b) * chi_l * d * ro],
              static_cast<std::size_t>(chi_l) * d, ro);
    out.noalias() = mm * rb.transpose();
  }

  // q[a][l_ket][(s r_bra)]
  std::vector<cxd> q(static_cast<std::size_t>(w.wl) * chi_l * d * ro);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int a = 0; a < w.wl; ++a)
    for (int s = 0; s < d; ++s)
      for (int b = 0; b < w.wr; ++b)
        for (int t = 0; t < d; ++t) {
          const cxd c = w.at(a, b, s, t);
          if (c == cxd(0.0, 0.0)) continue;
          for (int l = 0; l < chi_l; ++l) {
            cxd* dst = &q[((static_cast<std::size_t>(a) * chi_l + l) * d + s) * ro];
            const cxd* src =
                &p[((static_cast<std::size_t>(b) * chi_l + l) * d + t) * ro];
            for (int k = 0; k < ro; ++k) dst[k] += c * src[k];
          }
        }

  EnvBlock out(w.wl, chi_l, chi_l);
  CMapRM bra(m.a.data(), chi_l, static_cast<std::size_t>(d) * m.dr);
  for (int a = 0; a < w.wl; ++a) {
    CMapRM qa(&q[static_cast<std::size_t>(a) * chi_l * d * ro], chi_l,
              static_cast<std::size_t>(d) * ro);
    MapRM oa(&out.a[static_cast<std::size_t>(a) * chi_l * chi_l], chi_l, chi_l);
    oa.noalias() = bra.conjugate() * qa.transpose();
  }
  return out;
}

void dense_matvec(const cxd* h, int n, const cxd* x, cxd* y) {
  Eigen::Map<const Eigen::VectorXcd> xv(x, n);
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
  for (int i0 = 0; i0 < n; i0 += 256) {
    const int nr = std::min(256, n - i0);
    CMapRM hm(h + static_cast<std::size_t>(i0) * n, nr, n);
    Eigen::Map<Eigen::VectorXcd> yv(y + i0, nr);
    yv.noalias() = hm * xv;
  }
}

}  // namespace parallel

void apply_two_site(const EnvBlock& left, const Tensor4& w1, const Tensor4& w2,
                    const EnvBlock& right, const cxd* x, cxd* y) {
  if (execution() == Exec::Serial)
    serial::apply_two_site(left, w1, w2, right, x, y);
  else
    parallel::apply_two_site(left, w1, w2, right, x, y);
}

EnvBlock transfer_left(const EnvBlock& left, const Tensor4& w, const Tensor3& m) {
  return execution() == Exec::Serial ? serial::transfer_left(left, w, m)
                                     : parallel::transfer_left(left, w, m);
}

EnvBlock transfer_right(const EnvBlock& right, const Tensor4& w,
                        const Tensor3& m) {
  return execution() == Exec::Serial ? serial::transfer_right(right, w, m)
                                     : parallel::transfer_right(right, w, m);
}

void dense_matvec(const cxd* h, int n, const cxd* x, cxd* y) {
  if (execution() == Exec::Serial)
    serial::dense_matvec(h, n, x, y);
  else
    parallel::dense_matvec(h, n, x, y);
}

}  // namespace topoconv::kernels
