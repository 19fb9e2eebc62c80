#pragma once

#include <cstddef>

#include "topoconv/common.hpp"

namespace topoconv::kernels {

// Rank-3 tensor [left bond, physical, right bond], row-major.
struct Tensor3 {
  int dl = 0, dp = 0, dr = 0;
  std::vector<cxd> a;

  Tensor3() = default;
  Tensor3(int l, int p, int r)
      : dl(l), dp(p), dr(r), a(static_cast<std::size_t>(l) * p * r) {}

  cxd& at(int l, int s, int r) {
    return a[(static_cast<std::size_t>(l) * dp + s) * dr + r];
  }
  const cxd& at(int l, int s, int r) const {
    return a[(static_cast<std::size_t>(l) * dp + s) * dr + r];
  }
  std::size_t size() const { return a.size(); }
};

// MPO site tensor [left virtual, right virtual, phys out, phys in], row-major.
// Element (a,b,s,t) multiplies ket amplitude t and produces amplitude s.
struct Tensor4 {
  int wl = 0, wr = 0, d = 0;
  std::vector<cxd> a;

  Tensor4() = default;
  Tensor4(int l, int r, int phys)
      : wl(l), wr(r), d(phys),
        a(static_cast<std::size_t>(l) * r * phys * phys) {}

  cxd& at(int l, int r, int s, int t) {
    return a[((static_cast<std::size_t>(l) * wr + r) * d + s) * d + t];
  }
  const cxd& at(int l, int r, int s, int t) const {
    return a[((static_cast<std::size_t>(l) * wr + r) * d + s) * d + t];
  }
};

// Environment block: for each MPO virtual index, a (bra bond x ket bond)
// matrix. `out` contracts against the conjugated (bra) tensor network half.
struct EnvBlock {
  int w = 0, dout = 0, din = 0;
  std::vector<cxd> a;

  EnvBlock() = default;
  EnvBlock(int w_, int dout_, int din_)
      : w(w_), dout(dout_), din(din_),
        a(static_cast<std::size_t>(w_) * dout_ * din_) {}

  cxd& at(int k, int o, int i) {
    return a[(static_cast<std::size_t>(k) * dout + o) * din + i];
  }
  const cxd& at(int k, int o, int i) const {
    return a[(static_cast<std::size_t>(k) * dout + o) * din + i];
  }

  static EnvBlock trivial() {
    EnvBlock e(1, 1, 1);
    e.a[0] = cxd(1.0, 0.0);
    return e;
  }
};

enum class Exec { Serial, Parallel };

void set_execution(Exec mode);
Exec execution();

// y[l,s1,s2,r] = sum L(a;l,l') W1(a,m;s1,t1) W2(m,b;s2,t2) R(b;r,r')
//                    x[l',t1,t2,r']
// where (l,s1,s2,r) index the output (bra-side) and primed indices the input.
// x and y have extent L.dout*W1.d*W2.d*R.dout == L.din*...*R.din (square).
void apply_two_site(const EnvBlock& left, const Tensor4& w1, const Tensor4& w2,
                    const EnvBlock& right, const cxd* x, cxd* y);

// Absorb one site into a left environment:
// L'(b; r_bra, r_ket) = sum conj(M(l_bra,s,r_bra)) W(a,b;s,t) M(l_ket,t,r_ket)
//                           L(a; l_bra, l_ket)
EnvBlock transfer_left(const EnvBlock& left, const Tensor4& w, const Tensor3& m);

// Mirror image: absorb one site into a right environment.
EnvBlock transfer_right(const EnvBlock& right, const Tensor4& w, const Tensor3& m);

// Dense y = H x with H row-major n x n.
void dense_matvec(const cxd* h, int n, const cxd* x, cxd* y);

// Reference implementations: straightforward loop nests, independent of the
// optimized path. Used by tests and the benchmark for cross-checking.
namespace serial {
void apply_two_site(const EnvBlock& left, const Tensor4& w1, const Tensor4& w2,
                    const EnvBlock& right, const cxd* x, cxd* y);
EnvBlock transfer_left(const EnvBlock& left, const Tensor4& w, const Tensor3& m);
EnvBlock transfer_right(const EnvBlock& right, const Tensor4& w, const Tensor3& m);
void dense_matvec(const cxd* h, int n, const cxd* x, cxd* y);
}  // namespace serial

namespace parallel {
void apply_two_site(const EnvBlock& left, const Tensor4& w1, const Tensor4& w2,
                    const EnvBlock& right, const cxd* x, cxd* y);
EnvBlock transfer_left(const EnvBlock& left, const Tensor4& w, const Tensor3& m);
EnvBlock transfer_right(const EnvBlock& right, const Tensor4& w, const Tensor3& m);
void dense_matvec(const cxd* h, int n, const cxd* x, cxd* y);
}  // namespace parallel

}  // namespace topoconv::kernels
