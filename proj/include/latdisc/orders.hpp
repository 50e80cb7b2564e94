#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

#include "latdisc/elementary_forms.hpp"
#include "latdisc/errors.hpp"
#include "latdisc/jordan.hpp"
#include "latdisc/padic.hpp"

namespace latdisc {

struct ScaleFactor {
  int scale = 0;
  int rank = 0;
  int parity = 0;         // t_i
  int s = 0;              // s_i
  bool free = true;
  Int form_order = 1;     // #O(q_i) or #O(b_i)
  int exponent = 0;       // power of p attached to this scale
};

struct OrderBreakdown {
  long p = 2;
  int n = 1;
  long v_exponent = 0;
  std::vector<ScaleFactor> factors;
  Int total = 1;
};

// How the discriminant group is equipped: b^# always, or q^# (needs an even lattice at p = 2).
enum class DiscForm { bilinear, quadratic };

inline const char* disc_form_name(DiscForm f) { return f == DiscForm::bilinear ? "bilinear" : "quadratic"; }

namespace detail {

inline int s_value(int prev, int cur, int next) {
  if (prev == 1 && cur == 0 && next == 1) return 1;
  if (prev == 0 && cur == 1 && next == 1) return -1;
  if (prev == 1 && cur == 1 && next == 1) return 1;
  return 0;
}

// x * p^e for possibly negative e, asserting exactness.
inline Int shift_power(Int x, long p, long e) {
  if (e >= 0) return x * ipow(p, static_cast<int>(e));
  Int d = ipow(p, static_cast<int>(-e));
  require(mpz_divisible_p(x.get_mpz_t(), d.get_mpz_t()) != 0, ErrorKind::InternalError, "order formula is not integral");
  Int q;
  mpz_divexact(q.get_mpz_t(), x.get_mpz_t(), d.get_mpz_t());
  return q;
}

inline int block_rank(const JordanDecomposition& J, int i) {
  const JordanBlock* b = J.at_scale(i);
  return b ? b->rank : 0;
}

}  // namespace detail

inline OrderBreakdown order_mod_pn(const JordanDecomposition& J, int n) {
  require(n >= 1, ErrorKind::PreconditionViolation, "n must be at least 1");
  OrderBreakdown out;
  out.p = J.p();
  out.n = n;
  long r = J.rank();
  long cross = 0;
  for (size_t a = 0; a < J.blocks.size(); ++a)
    for (size_t b = a + 1; b < J.blocks.size(); ++b) cross += static_cast<long>(J.blocks[a].rank) * J.blocks[b].rank;
  out.v_exponent = (n - 1) * r * (r - 1) / 2 + cross;
  long exponent = out.v_exponent;
  Int product = 1;
  if (J.blocks.empty()) {
    out.total = 1;
    return out;
  }
  for (int i = J.min_scale() - 1; i <= J.max_scale() + 1; ++i) {
    ScaleFactor f;
    f.scale = i;
    f.rank = detail::block_rank(J, i);
    if (J.p() != 2) {
      if (!f.rank) continue;
      f.form_order = order_O(rho(J, i));
    } else {
      f.parity = J.parity(i);
      f.s = detail::s_value(J.parity(i - 1), f.parity, J.parity(i + 1));
      f.free = is_free(J, i);
      if (f.rank) f.form_order = order_O(rho(J, i));
      f.exponent = (f.free ? 0 : -f.rank) + (n >= 2 ? f.parity : 0) - f.s;
      if (!f.rank && f.exponent == 0) continue;
    }
    product *= f.form_order;
    exponent += f.exponent;
    out.factors.push_back(f);
  }
  out.total = detail::shift_power(product, J.p(), exponent);
  return out;
}

// Decomposition of L + <1> at p = 2; its discriminant bilinear form equals that of L.
inline JordanDecomposition with_odd_unimodular_summand(const JordanDecomposition& J) {
  int r = J.rank();
  ModMatrix G(J.ctx, r + 1, r + 1);
  G.set_block(0, 0, J.block_diagonal());
  G.set(r, r, 1);
  return jordan_decompose(G);
}

inline Int order_discriminant_p(const JordanDecomposition& J, DiscForm form = DiscForm::bilinear) {
  require(J.blocks.empty() || J.min_scale() >= 0, ErrorKind::PreconditionViolation, "lattice must be integral");
  long p = J.p();
  if (p == 2 && J.parity(0) == 0) {
    if (form == DiscForm::bilinear && J.max_scale() > 0) return order_discriminant_p(with_odd_unimodular_summand(J), form);
  } else if (p == 2) {
    require(form == DiscForm::bilinear, ErrorKind::WrongKind, "odd lattices carry only a discriminant bilinear form");
  }
  long w = 0;
  for (const auto& b : J.blocks)
    if (b.scale > 0) w += static_cast<long>(b.scale - 1) * b.rank * (b.rank - 1) / 2;
  for (size_t a = 0; a < J.blocks.size(); ++a)
    for (size_t b = a + 1; b < J.blocks.size(); ++b)
      w += static_cast<long>(J.blocks[a].scale) * J.blocks[a].rank * J.blocks[b].rank;
  Int product = 1;
  if (p != 2) {
    for (const auto& b : J.blocks)
      if (b.scale > 0) product *= order_O(rho(J, b.scale));
    return product * ipow(p, static_cast<int>(w));
  }
  long exponent = w - J.parity(1);
  int t0 = J.parity(0);
  for (int i = 1; i <= J.max_scale() + 1; ++i) {
    int ri = detail::block_rank(J, i);
    int ti = J.parity(i);
    int si = detail::s_value(J.parity(i - 1), ti, J.parity(i + 1));
    if (ri) {
      product *= order_O(rho(J, i));
      exponent += is_free(J, i) ? static_cast<long>(t0) * ri : static_cast<long>(t0 - 1) * ri;
    }
    exponent += ti - si;
  }
  return detail::shift_power(product, 2, exponent);
}

struct DiscriminantOrder {
  Int total = 1;
  std::map<long, Int> primes;
};

inline std::vector<long> prime_divisors(Int x) {
  if (x < 0) x = -x;
  std::vector<long> out;
  for (long d = 2; x > 1; ++d) {
    if (static_cast<double>(d) * d > x.get_d()) {
      require(x.fits_slong_p(), ErrorKind::TooLarge, "determinant has a prime factor beyond machine range");
      out.push_back(x.get_si());
      break;
    }
    if (mpz_divisible_ui_p(x.get_mpz_t(), static_cast<unsigned long>(d))) {
      out.push_back(d);
      while (mpz_divisible_ui_p(x.get_mpz_t(), static_cast<unsigned long>(d)))
        mpz_divexact_ui(x.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(d));
    }
  }
  return out;
}

// Jordan decomposition at p with enough precision for every scale of an integer Gram matrix.
inline JordanDecomposition decompose_integral(const std::vector<std::vector<Int>>& gram, long p, int extra = 3) {
  Int det = integer_determinant(gram);
  require(det != 0, ErrorKind::Degenerate, "Gram matrix is singular");
  int s = integer_valuation(det, p);
  PadicContext ctx(p, s + extra + 1);
  return jordan_decompose(ModMatrix::from_rows(ctx, gram));
}

inline bool is_even_gram(const std::vector<std::vector<Int>>& gram) {
  for (size_t k = 0; k < gram.size(); ++k)
    if (mpz_odd_p(gram[k][k].get_mpz_t())) return false;
  return true;
}

inline DiscriminantOrder order_discriminant_Z(const std::vector<std::vector<Int>>& gram,
                                              DiscForm form = DiscForm::bilinear) {
  require(!gram.empty(), ErrorKind::Usage, "empty Gram matrix");
  for (size_t i = 0; i < gram.size(); ++i) {
    require(gram[i].size() == gram.size(), ErrorKind::PreconditionViolation, "Gram matrix is not square");
    for (size_t j = 0; j < i; ++j)
      require(gram[i][j] == gram[j][i], ErrorKind::PreconditionViolation, "Gram matrix is not symmetric");
  }
  Int det = integer_determinant(gram);
  require(det != 0, ErrorKind::Degenerate, "Gram matrix is singular");
  if (form == DiscForm::quadratic)
    require(is_even_gram(gram), ErrorKind::WrongKind, "odd lattices carry only a discriminant bilinear form");
  DiscriminantOrder out;
  for (long p : prime_divisors(det)) {
    Int o = order_discriminant_p(decompose_integral(gram, p), form);
    out.primes[p] = o;
    out.total *= o;
  }
  return out;
}

// a1: liftable embeddings of L_i mod 2; a2: extensions of each to mod 2^n.
struct EmbeddingCounts {
  Int a1 = 1;
  Int a2 = 1;
  int c0_integer = 0;    // c0 = c0_integer - (uses_zero_count ? log2 #q_{i+1}^{-1}(0) : 0)
  bool uses_zero_count = false;
};

inline EmbeddingCounts embedding_lift_counts(const JordanDecomposition& J, int i, int n) {
  require(J.p() == 2, ErrorKind::WrongPrime, "embedding counts are stated at p = 2");
  require(n >= 1, ErrorKind::PreconditionViolation, "n must be at least 1");
  const JordanBlock* b0 = J.at_scale(i);
  require(b0 != nullptr, ErrorKind::PreconditionViolation, "no Jordan block at scale " + std::to_string(i));
  int r0 = b0->rank;
  int r1 = detail::block_rank(J, i + 1);
  long r = 0;
  for (const auto& b : J.blocks)
    if (b.scale >= i) r += b.rank;
  int t0 = J.parity(i), t1 = J.parity(i + 1), t2 = J.parity(i + 2);
  EmbeddingCounts out;
  int code = t0 * 4 + t1 * 2 + t2;
  switch (code) {
    case 0: case 1: out.c0_integer = 0; break;
    case 2: case 3: out.c0_integer = r0; break;
    case 4: out.c0_integer = r1; out.uses_zero_count = true; break;
    case 5: out.c0_integer = 1; break;
    case 6: out.c0_integer = r0 + r1 - 1; out.uses_zero_count = true; break;
    default: out.c0_integer = r0 + 1; break;
  }
  Int form = t1 == 0 ? order_O(rho_quadratic(J, i)) : order_O(rho_bilinear(J, i));
  Int zeros = 1;
  if (out.uses_zero_count && r1 > 0) zeros = count_zeros(rho_quadratic(J, i + 1));
  out.a1 = detail::shift_power(form * zeros, 2, static_cast<long>(r0) * (r - r0) - out.c0_integer);
  if (n >= 2) {
    long k = static_cast<long>(n - 1) * r0 * r - static_cast<long>(n - 1) * r0 * (r0 + 1) / 2 + t0;
    out.a2 = ipow(2, static_cast<int>(k));
  }
  return out;
}

inline int n_stable(const JordanDecomposition& J) { return J.max_scale() + 2; }

// N(L, p^n) = #{X mod p^n : X G X^T = G mod p^n}.
inline Int watson_count(const JordanDecomposition& J, int n) {
  require(n >= n_stable(J), ErrorKind::PreconditionViolation,
          "Watson counts need n >= max scale + 2 = " + std::to_string(n_stable(J)));
  long e = 0;
  for (size_t a = 0; a < J.blocks.size(); ++a) {
    const auto& ba = J.blocks[a];
    e += static_cast<long>(ba.scale) * ba.rank * (ba.rank + 1) / 2;
    for (size_t b = a + 1; b < J.blocks.size(); ++b) e += static_cast<long>(ba.scale) * ba.rank * J.blocks[b].rank;
  }
  return order_mod_pn(J, n).total * ipow(J.p(), static_cast<int>(e));
}

// rational * (sqrt(p) if times_sqrt_p).
struct PMass {
  mpq_class rational;
  bool times_sqrt_p = false;

  bool operator==(const PMass& o) const { return rational == o.rational && times_sqrt_p == o.times_sqrt_p; }

  std::string str() const {
    std::string s = rational.get_str();
    return times_sqrt_p ? s + "*sqrt(p)" : s;
  }
};

inline PMass p_mass(const JordanDecomposition& J, int n) {
  Int count = watson_count(J, n);
  long r = J.rank();
  long s = J.det_valuation();
  long twice = static_cast<long>(n) * r * (r - 1) + s * (r + 1);
  PMass m;
  m.times_sqrt_p = twice % 2 != 0;
  m.rational = mpq_class(ipow(J.p(), static_cast<int>(twice / 2)), count);
  m.rational.canonicalize();
  return m;
}

}  // namespace latdisc
