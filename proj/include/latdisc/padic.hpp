#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <climits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "latdisc/errors.hpp"

namespace latdisc {

using Int = mpz_class;

inline constexpr int kInfiniteValuation = INT_MAX;

inline bool is_small_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline Int ipow(long base, int e) {
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
  return r;
}

// Prime p and working precision N; arithmetic happens in Z/p^N.
class PadicContext {
 public:
  PadicContext(long p, int N) {
    require(is_small_prime(p), ErrorKind::PreconditionViolation, "p = " + std::to_string(p) + " is not prime");
    require(N >= 1, ErrorKind::PreconditionViolation, "precision must be at least 1");
    auto d = std::make_shared<Data>();
    d->p = p;
    d->N = N;
    d->powers.resize(N + 1);
    d->powers[0] = 1;
    for (int k = 1; k <= N; ++k) d->powers[k] = d->powers[k - 1] * p;
    data_ = std::move(d);
  }

  long p() const { return data_->p; }
  int N() const { return data_->N; }
  const Int& modulus() const { return data_->powers[data_->N]; }
  const Int& power(int k) const { return data_->powers.at(k); }

  Int reduce(const Int& x) const {
    Int r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), modulus().get_mpz_t());
    return r;
  }

  // Representative in (-p^N/2, p^N/2].
  Int balanced(const Int& x) const {
    Int r = reduce(x);
    if (2 * r > modulus()) r -= modulus();
    return r;
  }

  bool operator==(const PadicContext& o) const { return p() == o.p() && N() == o.N(); }
  bool operator!=(const PadicContext& o) const { return !(*this == o); }

 private:
  struct Data {
    long p = 2;
    int N = 1;
    std::vector<Int> powers;
  };
  std::shared_ptr<const Data> data_;
};

// Largest k <= N with p^k | x, reading x mod p^N.
inline int valuation(const Int& x, const PadicContext& ctx) {
  Int r = ctx.reduce(x);
  if (r == 0) return kInfiniteValuation;
  int k = 0;
  Int q = r;
  while (mpz_divisible_ui_p(q.get_mpz_t(), static_cast<unsigned long>(ctx.p()))) {
    mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(ctx.p()));
    ++k;
  }
  return k;
}

// Inverse of a p-adic unit modulo p^N.
inline Int unit_inverse(const Int& x, const PadicContext& ctx) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), ctx.reduce(x).get_mpz_t(), ctx.modulus().get_mpz_t()) == 0)
    fail(ErrorKind::NotAUnit, "element is divisible by p");
  return r;
}

class ModMatrix {
 public:
  ModMatrix(const PadicContext& ctx, int rows, int cols) : ctx_(ctx), rows_(rows), cols_(cols), a_(rows * cols) {
    require(rows >= 0 && cols >= 0, ErrorKind::PreconditionViolation, "negative dimension");
  }

  static ModMatrix identity(const PadicContext& ctx, int n) {
    ModMatrix m(ctx, n, n);
    for (int i = 0; i < n; ++i) m.a_[i * n + i] = 1;
    return m;
  }

  template <class T>
  static ModMatrix from_rows(const PadicContext& ctx, const std::vector<std::vector<T>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows[0].size()) : 0;
    ModMatrix m(ctx, r, c);
    for (int i = 0; i < r; ++i) {
      require(static_cast<int>(rows[i].size()) == c, ErrorKind::PreconditionViolation, "ragged matrix rows");
      for (int j = 0; j < c; ++j) m.set(i, j, Int(rows[i][j]));
    }
    return m;
  }

  const PadicContext& ctx() const { return ctx_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  const Int& operator()(int i, int j) const { return a_[i * cols_ + j]; }
  void set(int i, int j, const Int& v) { a_[i * cols_ + j] = ctx_.reduce(v); }

  ModMatrix operator+(const ModMatrix& o) const {
    check_same(o);
    require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::PreconditionViolation, "shape mismatch in +");
    ModMatrix r(ctx_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = ctx_.reduce(a_[k] + o.a_[k]);
    return r;
  }

  ModMatrix operator-(const ModMatrix& o) const {
    check_same(o);
    require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::PreconditionViolation, "shape mismatch in -");
    ModMatrix r(ctx_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = ctx_.reduce(a_[k] - o.a_[k]);
    return r;
  }

  ModMatrix operator*(const ModMatrix& o) const {
    check_same(o);
    require(cols_ == o.rows_, ErrorKind::PreconditionViolation, "shape mismatch in *");
    ModMatrix r(ctx_, rows_, o.cols_);
    Int acc;
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < o.cols_; ++j) {
        acc = 0;
        for (int k = 0; k < cols_; ++k) acc += a_[i * cols_ + k] * o.a_[k * o.cols_ + j];
        r.a_[i * o.cols_ + j] = ctx_.reduce(acc);
      }
    return r;
  }

  ModMatrix scaled(const Int& s) const {
    ModMatrix r(ctx_, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = ctx_.reduce(a_[k] * s);
    return r;
  }

  ModMatrix transpose() const {
    ModMatrix r(ctx_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r.a_[j * rows_ + i] = a_[i * cols_ + j];
    return r;
  }

  ModMatrix block(int r0, int c0, int nr, int nc) const {
    require(r0 >= 0 && c0 >= 0 && r0 + nr <= rows_ && c0 + nc <= cols_, ErrorKind::PreconditionViolation,
            "block out of range");
    ModMatrix r(ctx_, nr, nc);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) r.a_[i * nc + j] = a_[(r0 + i) * cols_ + c0 + j];
    return r;
  }

  void set_block(int r0, int c0, const ModMatrix& b) {
    check_same(b);
    require(r0 + b.rows_ <= rows_ && c0 + b.cols_ <= cols_, ErrorKind::PreconditionViolation, "block out of range");
    for (int i = 0; i < b.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j) a_[(r0 + i) * cols_ + c0 + j] = b.a_[i * b.cols_ + j];
  }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const Int& x) { return x == 0; });
  }

  bool is_symmetric() const {
    if (!square()) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < i; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  // Minimal entry valuation.
  int valuation() const {
    int v = kInfiniteValuation;
    for (const auto& x : a_) v = std::min(v, latdisc::valuation(x, ctx_));
    return v;
  }

  // Same p, different N: reduces when shrinking, zero-extends when growing.
  ModMatrix with_precision(const PadicContext& other) const {
    require(other.p() == ctx_.p(), ErrorKind::PreconditionViolation, "precision change across primes");
    ModMatrix r(other, rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = other.reduce(a_[k]);
    return r;
  }

  ModMatrix reduced_mod(int k) const { return with_precision(PadicContext(ctx_.p(), k)); }

  std::vector<std::vector<Int>> to_rows(bool balanced = false) const {
    std::vector<std::vector<Int>> out(rows_, std::vector<Int>(cols_));
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out[i][j] = balanced ? ctx_.balanced((*this)(i, j)) : (*this)(i, j);
    return out;
  }

  bool operator==(const ModMatrix& o) const {
    return ctx_ == o.ctx_ && rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }
  bool operator!=(const ModMatrix& o) const { return !(*this == o); }

 private:
  void check_same(const ModMatrix& o) const {
    require(ctx_ == o.ctx_, ErrorKind::PreconditionViolation, "mixed precision matrix arithmetic");
  }

  PadicContext ctx_;
  int rows_, cols_;
  std::vector<Int> a_;
};

// Exact division by p^k; the quotient is meaningful mod p^(N-k) and is returned at that precision.
inline ModMatrix divide_exact(const ModMatrix& m, int k) {
  const auto& ctx = m.ctx();
  require(k >= 0 && k < ctx.N(), ErrorKind::InsufficientPrecision, "cannot divide by p^" + std::to_string(k));
  PadicContext low(ctx.p(), ctx.N() - k);
  ModMatrix r(low, m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      require(latdisc::valuation(m(i, j), ctx) >= k, ErrorKind::PreconditionViolation,
              "exact division by p^" + std::to_string(k) + " of a non-divisible entry");
      Int q;
      mpz_divexact(q.get_mpz_t(), m(i, j).get_mpz_t(), ctx.power(k).get_mpz_t());
      r.set(i, j, q);
    }
  return r;
}

// Gauss-Jordan with unit pivots.
inline ModMatrix unit_inverse(const ModMatrix& m) {
  require(m.square(), ErrorKind::PreconditionViolation, "inverse of a non-square matrix");
  const auto& ctx = m.ctx();
  int n = m.rows();
  ModMatrix a = m;
  ModMatrix inv = ModMatrix::identity(ctx, n);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (latdisc::valuation(a(r, c), ctx) == 0) {
        piv = r;
        break;
      }
    if (piv < 0) fail(ErrorKind::NotAUnit, "determinant is divisible by p");
    if (piv != c)
      for (int j = 0; j < n; ++j) {
        Int t = a(c, j);
        a.set(c, j, a(piv, j));
        a.set(piv, j, t);
        t = inv(c, j);
        inv.set(c, j, inv(piv, j));
        inv.set(piv, j, t);
      }
    Int u = unit_inverse(a(c, c), ctx);
    for (int j = 0; j < n; ++j) {
      a.set(c, j, a(c, j) * u);
      inv.set(c, j, inv(c, j) * u);
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || a(r, c) == 0) continue;
      Int f = a(r, c);
      for (int j = 0; j < n; ++j) {
        a.set(r, j, a(r, j) - f * a(c, j));
        inv.set(r, j, inv(r, j) - f * inv(c, j));
      }
    }
  }
  return inv;
}

// Jordan scales and ranks of a block-diagonal Gram matrix.
struct BlockStructure {
  std::vector<int> scales;
  std::vector<int> ranks;
  std::vector<int> offsets;

  BlockStructure() = default;
  BlockStructure(std::vector<int> s, std::vector<int> r) : scales(std::move(s)), ranks(std::move(r)) {
    require(scales.size() == ranks.size(), ErrorKind::PreconditionViolation, "scales and ranks differ in length");
    int off = 0;
    for (size_t i = 0; i < ranks.size(); ++i) {
      require(ranks[i] >= 1, ErrorKind::PreconditionViolation, "block ranks must be positive");
      if (i) require(scales[i] > scales[i - 1], ErrorKind::PreconditionViolation, "scales must increase");
      offsets.push_back(off);
      off += ranks[i];
    }
  }

  int count() const { return static_cast<int>(ranks.size()); }
  int dim() const { return std::accumulate(ranks.begin(), ranks.end(), 0); }
  int max_scale() const { return scales.empty() ? 0 : scales.back(); }
  int min_scale() const { return scales.empty() ? 0 : scales.front(); }

  // Block index of a coordinate.
  int block_of(int k) const {
    for (int b = count() - 1; b >= 0; --b)
      if (k >= offsets[b]) return b;
    return 0;
  }

  int scale_of(int k) const { return scales[block_of(k)]; }

  // Blocks from index `from` on.
  BlockStructure tail(int from) const {
    return BlockStructure(std::vector<int>(scales.begin() + from, scales.end()),
                          std::vector<int>(ranks.begin() + from, ranks.end()));
  }
};

// Read/write access to the (i, j) block of a matrix under a block partition.
class BlockView {
 public:
  BlockView(ModMatrix& m, const BlockStructure& s) : m_(m), s_(s) {
    require(m.rows() == s.dim() && m.cols() == s.dim(), ErrorKind::PreconditionViolation,
            "block ranks do not sum to the matrix dimension");
  }
  ModMatrix get(int i, int j) const { return m_.block(s_.offsets[i], s_.offsets[j], s_.ranks[i], s_.ranks[j]); }
  void set(int i, int j, const ModMatrix& b) { m_.set_block(s_.offsets[i], s_.offsets[j], b); }
  int count() const { return s_.count(); }

 private:
  ModMatrix& m_;
  const BlockStructure& s_;
};

inline ModMatrix block_of(const ModMatrix& m, const BlockStructure& s, int i, int j) {
  return m.block(s.offsets[i], s.offsets[j], s.ranks[i], s.ranks[j]);
}

// Exact integer determinant by fraction-free elimination.
inline Int integer_determinant(std::vector<std::vector<Int>> a) {
  int n = static_cast<int>(a.size());
  if (n == 0) return 1;
  Int prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[k][k] == 0) {
      int sw = -1;
      for (int r = k + 1; r < n; ++r)
        if (a[r][k] != 0) {
          sw = r;
          break;
        }
      if (sw < 0) return 0;
      std::swap(a[k], a[sw]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) {
        Int t = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        a[i][j] = t;
      }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline int integer_valuation(Int x, long p) {
  if (x == 0) return kInfiniteValuation;
  int k = 0;
  while (mpz_divisible_ui_p(x.get_mpz_t(), static_cast<unsigned long>(p))) {
    mpz_divexact_ui(x.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(p));
    ++k;
  }
  return k;
}

}  // namespace latdisc
