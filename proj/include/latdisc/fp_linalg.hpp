#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "latdisc/errors.hpp"

namespace latdisc {

using Vec = std::vector<int>;

inline int mod_p(long x, int p) {
  long r = x % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

inline int inv_mod_p(int a, int p) {
  a = mod_p(a, p);
  require(a != 0, ErrorKind::NotAUnit, "zero has no inverse mod p");
  int r = 1;
  for (int e = p - 2, b = a; e > 0; e >>= 1, b = static_cast<int>(1L * b * b % p))
    if (e & 1) r = static_cast<int>(1L * r * b % p);
  return r;
}

// Dense matrix over F_p for small p; acts on row vectors x -> x M.
class FpMatrix {
 public:
  FpMatrix() = default;
  FpMatrix(int p, int rows, int cols) : p_(p), rows_(rows), cols_(cols), a_(rows * cols, 0) {}

  static FpMatrix identity(int p, int n) {
    FpMatrix m(p, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  static FpMatrix from_rows(int p, const std::vector<Vec>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows[0].size()) : 0;
    FpMatrix m(p, r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m.at(i, j) = mod_p(rows[i][j], p);
    return m;
  }

  int p() const { return p_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int& at(int i, int j) { return a_[i * cols_ + j]; }
  int at(int i, int j) const { return a_[i * cols_ + j]; }
  int operator()(int i, int j) const { return at(i, j); }

  Vec row(int i) const { return Vec(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_); }
  void set_row(int i, const Vec& v) {
    for (int j = 0; j < cols_; ++j) at(i, j) = mod_p(v[j], p_);
  }

  FpMatrix operator*(const FpMatrix& o) const {
    require(cols_ == o.rows_, ErrorKind::PreconditionViolation, "shape mismatch in F_p product");
    FpMatrix r(p_, rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        int x = at(i, k);
        if (!x) continue;
        for (int j = 0; j < o.cols_; ++j) r.at(i, j) = (r.at(i, j) + x * o.at(k, j)) % p_;
      }
    return r;
  }

  FpMatrix operator+(const FpMatrix& o) const {
    FpMatrix r = *this;
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = (a_[k] + o.a_[k]) % p_;
    return r;
  }

  FpMatrix transpose() const {
    FpMatrix r(p_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  bool operator==(const FpMatrix& o) const {
    return p_ == o.p_ && rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }
  bool operator!=(const FpMatrix& o) const { return !(*this == o); }

  std::vector<Vec> to_rows() const {
    std::vector<Vec> out;
    for (int i = 0; i < rows_; ++i) out.push_back(row(i));
    return out;
  }

  const std::vector<int>& data() const { return a_; }

 private:
  int p_ = 2;
  int rows_ = 0, cols_ = 0;
  std::vector<int> a_;
};

inline Vec vec_mul(const Vec& x, const FpMatrix& m) {
  Vec r(m.cols(), 0);
  for (int k = 0; k < m.rows(); ++k) {
    if (!x[k]) continue;
    for (int j = 0; j < m.cols(); ++j) r[j] = (r[j] + x[k] * m.at(k, j)) % m.p();
  }
  return r;
}

inline Vec vec_add(const Vec& a, const Vec& b, int p, int scale = 1) {
  Vec r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = mod_p(a[k] + scale * b[k], p);
  return r;
}

inline bool vec_is_zero(const Vec& v) {
  for (int x : v)
    if (x) return false;
  return true;
}

struct Echelon {
  FpMatrix reduced;
  std::vector<int> pivots;
};

// Reduced row echelon form.
inline Echelon rref(FpMatrix m) {
  int p = m.p();
  std::vector<int> piv;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int s = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m.at(i, c)) {
        s = i;
        break;
      }
    if (s < 0) continue;
    for (int j = 0; j < m.cols(); ++j) std::swap(m.at(r, j), m.at(s, j));
    int u = inv_mod_p(m.at(r, c), p);
    for (int j = 0; j < m.cols(); ++j) m.at(r, j) = m.at(r, j) * u % p;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || !m.at(i, c)) continue;
      int f = m.at(i, c);
      for (int j = 0; j < m.cols(); ++j) m.at(i, j) = mod_p(m.at(i, j) - f * m.at(r, j), p);
    }
    piv.push_back(c);
    ++r;
  }
  return {m, piv};
}

inline int rank(const FpMatrix& m) { return static_cast<int>(rref(m).pivots.size()); }

// Basis of {x : A x = 0} (column vectors).
inline std::vector<Vec> nullspace(const FpMatrix& a) {
  auto e = rref(a);
  int p = a.p();
  std::vector<bool> is_piv(a.cols(), false);
  for (int c : e.pivots) is_piv[c] = true;
  std::vector<Vec> out;
  for (int f = 0; f < a.cols(); ++f) {
    if (is_piv[f]) continue;
    Vec x(a.cols(), 0);
    x[f] = 1;
    for (size_t i = 0; i < e.pivots.size(); ++i) x[e.pivots[i]] = mod_p(-e.reduced.at(i, f), p);
    out.push_back(x);
  }
  return out;
}

// Some x with A x = b, if any.
inline std::optional<Vec> solve(const FpMatrix& a, const Vec& b) {
  int p = a.p();
  FpMatrix aug(p, a.rows(), a.cols() + 1);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) aug.at(i, j) = a.at(i, j);
    aug.at(i, a.cols()) = mod_p(b[i], p);
  }
  auto e = rref(aug);
  Vec x(a.cols(), 0);
  for (size_t i = 0; i < e.pivots.size(); ++i) {
    if (e.pivots[i] == a.cols()) return std::nullopt;
    x[e.pivots[i]] = e.reduced.at(i, a.cols());
  }
  return x;
}

inline FpMatrix inverse(const FpMatrix& m) {
  int n = m.rows();
  int p = m.p();
  FpMatrix aug(p, n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, n + i) = 1;
  }
  auto e = rref(aug);
  require(static_cast<int>(e.pivots.size()) >= n && e.pivots[n - 1] == n - 1, ErrorKind::NotAUnit,
          "matrix is singular mod p");
  FpMatrix inv(p, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.at(i, j) = e.reduced.at(i, n + j);
  return inv;
}

inline int determinant(FpMatrix m) {
  int n = m.rows();
  int p = m.p();
  long det = 1;
  for (int c = 0; c < n; ++c) {
    int s = -1;
    for (int i = c; i < n; ++i)
      if (m.at(i, c)) {
        s = i;
        break;
      }
    if (s < 0) return 0;
    if (s != c) {
      for (int j = 0; j < n; ++j) std::swap(m.at(c, j), m.at(s, j));
      det = p - det;
    }
    det = det * m.at(c, c) % p;
    int u = inv_mod_p(m.at(c, c), p);
    for (int i = c + 1; i < n; ++i) {
      int f = m.at(i, c) * u % p;
      if (!f) continue;
      for (int j = c; j < n; ++j) m.at(i, j) = mod_p(m.at(i, j) - f * m.at(c, j), p);
    }
  }
  return static_cast<int>(mod_p(det, p));
}

inline bool is_square_mod_p(int a, int p) {
  a = mod_p(a, p);
  if (p == 2 || a == 0) return true;
  long r = 1, b = a;
  for (int e = (p - 1) / 2; e > 0; e >>= 1, b = b * b % p)
    if (e & 1) r = r * b % p;
  return r == 1;
}

// Encoding of vectors over F_p as integers in base p.
inline uint64_t encode(const Vec& v, int p) {
  uint64_t c = 0;
  for (int k = static_cast<int>(v.size()) - 1; k >= 0; --k) c = c * p + v[k];
  return c;
}

inline Vec decode(uint64_t c, int p, int n) {
  Vec v(n);
  for (int k = 0; k < n; ++k) {
    v[k] = static_cast<int>(c % p);
    c /= p;
  }
  return v;
}

}  // namespace latdisc
