#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "latdisc/errors.hpp"
#include "latdisc/f2_solver.hpp"
#include "latdisc/jordan.hpp"
#include "latdisc/padic.hpp"

namespace latdisc {

struct ApproximateTriple {
  ModMatrix F, G, Z;
  BlockStructure blocks;
  int level = 0;
};

// F_(i,j) = 0 mod p^max(i-j, 0).
inline bool is_compatible(const ModMatrix& F, const BlockStructure& s) {
  const auto& ctx = F.ctx();
  for (int bi = 0; bi < s.count(); ++bi)
    for (int bj = 0; bj < bi; ++bj) {
      int need = s.scales[bi] - s.scales[bj];
      if (block_of(F, s, bi, bj).valuation() < need) return false;
    }
  (void)ctx;
  return true;
}

// Highest level a measurable at this precision.
inline int level_cap(const PadicContext& ctx, const BlockStructure& s) { return ctx.N() - s.max_scale() - 3; }

inline void require_lift_precision(const PadicContext& ctx, const BlockStructure& s, int b) {
  require(ctx.N() >= b + s.max_scale() + 3, ErrorKind::InsufficientPrecision,
          "lifting to level " + std::to_string(b) + " needs precision at least " +
              std::to_string(b + s.max_scale() + 3) + ", have " + std::to_string(ctx.N()));
}

// v D v^T mod 2^k, where v is given at a possibly lower precision.
inline bool quadratic_vanishes(const ModMatrix& D, const std::vector<Int>& v, int k) {
  Int acc = 0;
  for (int i = 0; i < D.rows(); ++i)
    for (int j = 0; j < D.cols(); ++j) acc += v[i] * D(i, j) * v[j];
  return mpz_divisible_2exp_p(acc.get_mpz_t(), static_cast<mp_bitcnt_t>(k)) != 0;
}

// Largest a <= level_cap with (F, G, Z) a-approximate; 0 when not even 1-approximate.
inline int approximation_level(const ModMatrix& F, const ModMatrix& G, const ModMatrix& Z, const BlockStructure& s) {
  const auto& ctx = F.ctx();
  require(F.rows() == s.dim() && G.rows() == s.dim() && Z.rows() == s.dim(), ErrorKind::PreconditionViolation,
          "triple dimensions disagree with the block structure");
  if (!Z.is_symmetric() || !is_compatible(F, s)) return 0;
  int level = level_cap(ctx, s);
  if (level <= 0) return 0;
  ModMatrix D = F * G * F.transpose() - Z;
  for (int bi = 0; bi < s.count(); ++bi)
    for (int bj = 0; bj <= bi; ++bj) {
      int m = std::max(s.scales[bi], s.scales[bj]);
      ModMatrix blk = block_of(D, s, bi, bj);
      int v = blk.valuation();
      if (v != kInfiniteValuation) level = std::min(level, v - m);
      if (ctx.p() == 2 && bi == bj)
        for (int k = 0; k < blk.rows(); ++k) {
          int dv = valuation(blk(k, k), ctx);
          if (dv != kInfiniteValuation) level = std::min(level, dv - s.scales[bi] - 1);
        }
    }
  if (level <= 0) return 0;
  if (ctx.p() == 2 && level == 1) {
    for (int bi = 0; bi < s.count(); ++bi) {
      int sc = s.scales[bi];
      ModMatrix zi = divide_exact(block_of(Z, s, bi, bi), sc);
      std::vector<Int> v;
      try {
        v = oddity_vector_of(zi);
      } catch (const Error&) {
        return 0;
      }
      if (!quadratic_vanishes(block_of(D, s, bi, bi), v, sc + 3)) return 0;
    }
  }
  return level;
}

inline int approximation_level(const ApproximateTriple& t) { return approximation_level(t.F, t.G, t.Z, t.blocks); }

// (F' - F)_(i,j) = 0 mod p^(a + max(i-j, 0)).
inline bool satisfies_lift_pattern(const ModMatrix& Fnew, const ModMatrix& F, const BlockStructure& s, int a) {
  ModMatrix d = Fnew - F;
  for (int bi = 0; bi < s.count(); ++bi)
    for (int bj = 0; bj < s.count(); ++bj) {
      int need = a + std::max(s.scales[bi] - s.scales[bj], 0);
      if (block_of(d, s, bi, bj).valuation() < need) return false;
    }
  return true;
}

namespace detail {

inline BlockStructure unimodular_structure(int r) { return BlockStructure({0}, {r}); }

inline ModMatrix lift_unimodular_odd(ModMatrix F, const ModMatrix& G, const ModMatrix& Z, int a, int b) {
  const auto& ctx = F.ctx();
  Int half = unit_inverse(Int(2), ctx);
  while (a < b) {
    ModMatrix A = F * G * F.transpose() - Z;
    ModMatrix X = A.scaled(half) * unit_inverse(G * F.transpose());
    F = F - X;
    a *= 2;
  }
  return F;
}

inline ModMatrix lift_unimodular_even(ModMatrix F, const ModMatrix& G, const ModMatrix& Z, int a, int b) {
  const auto& ctx = F.ctx();
  int r = F.rows();
  if (b <= a) return F;
  if (a == 1) {
    ModMatrix A = F * G * F.transpose() - Z;
    ModMatrix Zinv = unit_inverse(Z);
    SymSystem sys;
    sys.r = r;
    sys.M = FpMatrix(2, r, r);
    sys.z.assign(r, 0);
    sys.b.assign(r, 0);
    ModMatrix half = divide_exact(A, 1);
    for (int k = 0; k < r; ++k) {
      for (int l = 0; l < r; ++l) sys.M.at(k, l) = static_cast<int>(mpz_fdiv_ui(half(k, l).get_mpz_t(), 2));
      sys.z[k] = static_cast<int>(mpz_fdiv_ui(Zinv(k, k).get_mpz_t(), 2));
      require(valuation(A(k, k), ctx) >= 2, ErrorKind::PreconditionViolation, "diagonal of FGF^T - Z is not 0 mod 4");
      Int q;
      mpz_fdiv_q_2exp(q.get_mpz_t(), A(k, k).get_mpz_t(), 2);
      sys.b[k] = static_cast<int>(mpz_fdiv_ui(q.get_mpz_t(), 2));
    }
    SymSolution sol;
    try {
      sol = solve(sys);
    } catch (const Error& e) {
      fail(ErrorKind::InternalError, "F_2 system of the first even lifting step is unsolvable: " + e.detail());
    }
    ModMatrix X(ctx, r, r);
    for (int k = 0; k < r; ++k)
      for (int l = 0; l < r; ++l) X.set(k, l, sol.particular(k, l));
    ModMatrix Y = X.scaled(2) * unit_inverse(G * F.transpose());
    F = F - Y;
    a = 2;
  }
  while (a < b) {
    ModMatrix A = F * G * F.transpose() - Z;
    ModMatrix H(ctx, r, r);
    for (int k = 0; k < r; ++k) {
      for (int l = k + 1; l < r; ++l) H.set(k, l, A(k, l));
      Int d;
      require(valuation(A(k, k), ctx) >= 1, ErrorKind::InternalError, "odd diagonal defect in even lifting");
      mpz_fdiv_q_2exp(d.get_mpz_t(), A(k, k).get_mpz_t(), 1);
      H.set(k, k, d);
    }
    F = F - H * unit_inverse(G * F.transpose());
    a = 2 * a - 1;
  }
  return F;
}

inline ModMatrix lift_unimodular(const ModMatrix& F, const ModMatrix& G, const ModMatrix& Z, int a, int b) {
  return F.ctx().p() == 2 ? lift_unimodular_even(F, G, Z, a, b) : lift_unimodular_odd(F, G, Z, a, b);
}

inline ModMatrix lift_blocks(ModMatrix F, const ModMatrix& G, const ModMatrix& Z, const BlockStructure& s, int a,
                             int b) {
  if (b <= a) return F;
  const auto& ctx = F.ctx();
  int i1 = s.scales[0];
  int r1 = s.ranks[0];
  int r2 = s.dim() - r1;
  ModMatrix F11 = F.block(0, 0, r1, r1), F12 = F.block(0, r1, r1, r2);
  ModMatrix F21 = F.block(r1, 0, r2, r1), F22 = F.block(r1, r1, r2, r2);
  ModMatrix G1 = G.block(0, 0, r1, r1), G2 = G.block(r1, r1, r2, r2);
  ModMatrix Z11 = Z.block(0, 0, r1, r1), Z21 = Z.block(r1, 0, r2, r1), Z22 = Z.block(r1, r1, r2, r2);

  ModMatrix Z11p = Z11 - F12 * G2 * F12.transpose();
  ModMatrix G1u = divide_exact(G1, i1);
  ModMatrix Z11u = divide_exact(Z11p, i1);
  F11 = lift_unimodular(F11.with_precision(G1u.ctx()), G1u, Z11u, a, b).with_precision(ctx);
  if (r2 == 0) return F11;

  BlockStructure rest = s.tail(1);
  int step = s.scales[1] - i1;
  while (a < b) {
    int target = std::min(a + step, b);
    ModMatrix Z22p = Z22 - F21 * G1 * F21.transpose();
    F22 = lift_blocks(F22, G2, Z22p, rest, a, target);
    ModMatrix num = divide_exact(Z21 - F22 * G2 * F12.transpose(), i1);
    const auto& low = num.ctx();
    F21 = (num * unit_inverse(G1u.with_precision(low) * F11.with_precision(low).transpose())).with_precision(ctx);
    a = target;
  }
  ModMatrix out(ctx, s.dim(), s.dim());
  out.set_block(0, 0, F11);
  out.set_block(0, r1, F12);
  out.set_block(r1, 0, F21);
  out.set_block(r1, r1, F22);
  return out;
}

inline void require_level(const ModMatrix& F, const ModMatrix& G, const ModMatrix& Z, const BlockStructure& s,
                          int a) {
  require(a >= 1, ErrorKind::PreconditionViolation, "starting level must be at least 1");
  int lvl = approximation_level(F, G, Z, s);
  require(lvl >= a, ErrorKind::PreconditionViolation,
          "triple is only " + std::to_string(lvl) + "-approximate, expected " + std::to_string(a));
}

}  // namespace detail

inline ModMatrix hensel_unimodular_odd(const ModMatrix& F, const ModMatrix& G, const ModMatrix& Z, int a, int b) {
  require(F.ctx().p() != 2, ErrorKind::WrongPrime, "odd unimodular lifting needs p != 2");
  auto s = detail::unimodular_structure(F.rows());
  if (b <= a) return F;
  require_lift_precision(F.ctx(), s, b);
  detail::require_level(F, G, Z, s, a);
  return detail::lift_unimodular_odd(F, G, Z, a, b);
}

inline ModMatrix hensel_unimodular_even(const ModMatrix& F, const ModMatrix& G, const ModMatrix& Z, int a, int b) {
  require(F.ctx().p() == 2, ErrorKind::WrongPrime, "even unimodular lifting needs p = 2");
  auto s = detail::unimodular_structure(F.rows());
  if (b <= a) return F;
  require_lift_precision(F.ctx(), s, b);
  detail::require_level(F, G, Z, s, a);
  return detail::lift_unimodular_even(F, G, Z, a, b);
}

// Lifts an a-approximate triple to a b-approximate one, keeping (F' - F)_(i,j) = 0 mod p^(a + max(i-j, 0)).
inline ModMatrix hensel_qf(const ModMatrix& F, const ModMatrix& G, const ModMatrix& Z, const BlockStructure& s, int a,
                           int b) {
  require(s.count() >= 1, ErrorKind::PreconditionViolation, "empty block structure");
  if (b <= a) return F;
  require_lift_precision(F.ctx(), s, b);
  detail::require_level(F, G, Z, s, a);
  ModMatrix out = detail::lift_blocks(F, G, Z, s, a, b);
  require(approximation_level(out, G, Z, s) >= b, ErrorKind::InternalError, "lift failed to reach the target level");
  return out;
}

inline ModMatrix hensel_qf(const ApproximateTriple& t, int b) { return hensel_qf(t.F, t.G, t.Z, t.blocks, t.level, b); }

}  // namespace latdisc
