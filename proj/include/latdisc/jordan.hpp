#pragma once

#include <string>
#include <vector>

#include "latdisc/elementary_forms.hpp"
#include "latdisc/errors.hpp"
#include "latdisc/padic.hpp"

namespace latdisc {

struct JordanBlock {
  int scale = 0;
  int rank = 0;
  ModMatrix gram{PadicContext(2, 1), 0, 0};
  bool odd = false;                 // p = 2 only
  std::vector<Int> oddity_vector;   // p = 2 only; zero for even blocks
  int oddity = 0;                   // p = 2 only, mod 8
  bool det_is_square = false;       // p odd only
};

struct JordanDecomposition {
  PadicContext ctx;
  std::vector<JordanBlock> blocks;
  ModMatrix base_change;
  ModMatrix source_gram;

  int rank() const { return source_gram.rows(); }
  long p() const { return ctx.p(); }

  BlockStructure structure() const {
    std::vector<int> s, r;
    for (const auto& b : blocks) {
      s.push_back(b.scale);
      r.push_back(b.rank);
    }
    return BlockStructure(s, r);
  }

  int max_scale() const { return blocks.empty() ? 0 : blocks.back().scale; }
  int min_scale() const { return blocks.empty() ? 0 : blocks.front().scale; }

  const JordanBlock* at_scale(int i) const {
    for (const auto& b : blocks)
      if (b.scale == i) return &b;
    return nullptr;
  }

  // Parity t_i; absent blocks count as even.
  int parity(int i) const {
    const JordanBlock* b = at_scale(i);
    return b && b->odd ? 1 : 0;
  }

  // Block diagonal matrix with blocks p^i gram_i.
  ModMatrix block_diagonal() const {
    ModMatrix out(ctx, rank(), rank());
    int off = 0;
    for (const auto& b : blocks) {
      out.set_block(off, off, b.gram.scaled(ctx.power(b.scale)));
      off += b.rank;
    }
    return out;
  }

  // Exponent of p in det(G).
  int det_valuation() const {
    int s = 0;
    for (const auto& b : blocks) s += b.scale * b.rank;
    return s;
  }
};

// y G^{-1} with y the diagonal of G; zero for even G.
inline std::vector<Int> oddity_vector_of(const ModMatrix& gram) {
  const auto& ctx = gram.ctx();
  require(ctx.p() == 2, ErrorKind::WrongPrime, "oddity vectors are defined at p = 2");
  int n = gram.rows();
  std::vector<Int> v(n, 0);
  bool odd = false;
  for (int k = 0; k < n; ++k)
    if (valuation(gram(k, k), ctx) == 0) odd = true;
  if (!odd) return v;
  ModMatrix y(ctx, 1, n);
  for (int k = 0; k < n; ++k) y.set(0, k, gram(k, k));
  ModMatrix r = y * unit_inverse(gram);
  for (int k = 0; k < n; ++k) v[k] = r(0, k);
  return v;
}

inline Int bilinear_value(const ModMatrix& gram, const std::vector<Int>& x, const std::vector<Int>& y) {
  Int acc = 0;
  for (int i = 0; i < gram.rows(); ++i)
    for (int j = 0; j < gram.cols(); ++j) acc += x[i] * gram(i, j) * y[j];
  return gram.ctx().reduce(acc);
}

inline int oddity_of(const ModMatrix& gram) {
  auto v = oddity_vector_of(gram);
  Int r = bilinear_value(gram, v, v);
  return static_cast<int>(mpz_fdiv_ui(r.get_mpz_t(), 8));
}

namespace detail {

inline void swap_sym(ModMatrix& A, ModMatrix& U, int a, int b) {
  if (a == b) return;
  int n = A.rows();
  for (int j = 0; j < n; ++j) {
    Int t = A(a, j);
    A.set(a, j, A(b, j));
    A.set(b, j, t);
    t = U(a, j);
    U.set(a, j, U(b, j));
    U.set(b, j, t);
  }
  for (int i = 0; i < n; ++i) {
    Int t = A(i, a);
    A.set(i, a, A(i, b));
    A.set(i, b, t);
  }
}

// row_r += c row_s and col_r += c col_s.
inline void add_sym(ModMatrix& A, ModMatrix& U, int r, int s, const Int& c) {
  int n = A.rows();
  for (int j = 0; j < n; ++j) {
    A.set(r, j, A(r, j) + c * A(s, j));
    U.set(r, j, U(r, j) + c * U(s, j));
  }
  for (int i = 0; i < n; ++i) A.set(i, r, A(i, r) + c * A(i, s));
}

inline Int exact_quotient(const Int& x, const Int& d) {
  Int q;
  mpz_divexact(q.get_mpz_t(), x.get_mpz_t(), d.get_mpz_t());
  return q;
}

}  // namespace detail

inline JordanDecomposition jordan_decompose(const ModMatrix& G) {
  const auto& ctx = G.ctx();
  require(G.is_symmetric(), ErrorKind::PreconditionViolation, "Gram matrix is not symmetric");
  int n = G.rows();
  long p = ctx.p();
  ModMatrix A = G;
  ModMatrix U = ModMatrix::identity(ctx, n);
  std::vector<std::pair<int, int>> pieces;  // (size, valuation) in order
  int k = 0;
  while (k < n) {
    int v = A.block(k, k, n - k, n - k).valuation();
    if (v == kInfiniteValuation) fail(ErrorKind::SingularGram, "determinant vanishes mod p^N");
    int dj = -1;
    for (int j = k; j < n && dj < 0; ++j)
      if (valuation(A(j, j), ctx) == v) dj = j;
    if (dj < 0) {
      int bi = -1, bj = -1;
      for (int i = k; i < n && bi < 0; ++i)
        for (int j = i + 1; j < n; ++j)
          if (valuation(A(i, j), ctx) == v) {
            bi = i;
            bj = j;
            break;
          }
      if (p != 2) {
        detail::add_sym(A, U, bi, bj, 1);
        continue;
      }
      detail::swap_sym(A, U, k, bi);
      detail::swap_sym(A, U, k + 1, bj == k ? bi : bj);
      const Int& pv = ctx.power(v);
      ModMatrix Bp(ctx, 2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) Bp.set(a, b, detail::exact_quotient(A(k + a, k + b), pv));
      ModMatrix Binv = unit_inverse(Bp);
      for (int r = k + 2; r < n; ++r) {
        Int r0 = detail::exact_quotient(A(r, k), pv), r1 = detail::exact_quotient(A(r, k + 1), pv);
        Int c0 = ctx.reduce(r0 * Binv(0, 0) + r1 * Binv(1, 0));
        Int c1 = ctx.reduce(r0 * Binv(0, 1) + r1 * Binv(1, 1));
        detail::add_sym(A, U, r, k, -c0);
        detail::add_sym(A, U, r, k + 1, -c1);
      }
      pieces.emplace_back(2, v);
      k += 2;
      continue;
    }
    detail::swap_sym(A, U, k, dj);
    const Int& pv = ctx.power(v);
    Int uinv = unit_inverse(detail::exact_quotient(A(k, k), pv), ctx);
    for (int r = k + 1; r < n; ++r) {
      if (A(r, k) == 0) continue;
      Int c = ctx.reduce(detail::exact_quotient(A(r, k), pv) * uinv);
      detail::add_sym(A, U, r, k, -c);
    }
    pieces.emplace_back(1, v);
    ++k;
  }

  JordanDecomposition J{ctx, {}, U, G};
  int off = 0;
  for (size_t t = 0; t < pieces.size();) {
    int v = pieces[t].second, size = 0;
    while (t < pieces.size() && pieces[t].second == v) size += pieces[t++].first;
    JordanBlock b;
    b.scale = v;
    b.rank = size;
    require(ctx.N() >= v + 3, ErrorKind::InsufficientPrecision,
            "precision " + std::to_string(ctx.N()) + " is below scale + 3 for scale " + std::to_string(v));
    b.gram = divide_exact(A.block(off, off, size, size), v).with_precision(ctx);
    if (p == 2) {
      for (int i = 0; i < size; ++i)
        if (valuation(b.gram(i, i), ctx) == 0) b.odd = true;
      b.oddity_vector = oddity_vector_of(b.gram);
      b.oddity = b.odd ? oddity_of(b.gram) : 0;
    } else {
      Int det = integer_determinant(b.gram.to_rows());
      b.det_is_square = is_square_mod_p(static_cast<int>(mpz_fdiv_ui(det.get_mpz_t(), p)), static_cast<int>(p));
    }
    J.blocks.push_back(std::move(b));
    off += size;
  }
  return J;
}

// Free iff both neighbouring constituents are even or absent; every constituent is free for odd p.
inline bool is_free(const JordanDecomposition& J, int i) {
  if (J.p() != 2) return true;
  return J.parity(i - 1) == 0 && J.parity(i + 1) == 0;
}

inline ElementaryForm rho(const JordanDecomposition& J, int i) {
  const JordanBlock* b = J.at_scale(i);
  require(b != nullptr, ErrorKind::PreconditionViolation, "no Jordan block at scale " + std::to_string(i));
  int p = static_cast<int>(J.p());
  std::vector<Vec> g(b->rank, Vec(b->rank));
  bool quad = is_free(J, i);
  for (int r = 0; r < b->rank; ++r)
    for (int c = 0; c < b->rank; ++c) {
      unsigned long m = (p == 2 && quad && r == c) ? 4 : p;
      g[r][c] = static_cast<int>(mpz_fdiv_ui(b->gram(r, c).get_mpz_t(), m));
    }
  return ElementaryForm::from_gram(p, quad ? FormKind::quadratic : FormKind::bilinear, g);
}

// Quadratic form q_i mod p regardless of freeness.
inline ElementaryForm rho_quadratic(const JordanDecomposition& J, int i) {
  const JordanBlock* b = J.at_scale(i);
  require(b != nullptr, ErrorKind::PreconditionViolation, "no Jordan block at scale " + std::to_string(i));
  int p = static_cast<int>(J.p());
  std::vector<Vec> g(b->rank, Vec(b->rank));
  for (int r = 0; r < b->rank; ++r)
    for (int c = 0; c < b->rank; ++c)
      g[r][c] = static_cast<int>(mpz_fdiv_ui(b->gram(r, c).get_mpz_t(), (p == 2 && r == c) ? 4 : p));
  return ElementaryForm::from_gram(p, FormKind::quadratic, g);
}

inline ElementaryForm rho_bilinear(const JordanDecomposition& J, int i) {
  auto q = rho_quadratic(J, i);
  return J.p() == 2 ? q.bilinear() : q;
}

}  // namespace latdisc
