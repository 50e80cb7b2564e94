#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "latdisc/errors.hpp"
#include "latdisc/hensel.hpp"
#include "latdisc/jordan.hpp"
#include "latdisc/padic.hpp"

namespace latdisc {

inline constexpr uint64_t kDefaultGroupBudget = 10000000;
inline constexpr uint64_t kDefaultEnumerationBound = uint64_t(1) << 24;

// Row k is the image of the k-th basis vector; entry (k, l) lives in Z / moduli[l].
using GroupElement = std::vector<uint64_t>;

struct GroupElementHash {
  size_t operator()(const GroupElement& e) const {
    uint64_t h = 1469598103934665603ull;
    for (uint64_t x : e) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h);
  }
};

// Finite group of endomorphisms of prod_l Z/moduli[l], acting on row vectors.
class FiniteMatrixGroup {
 public:
  FiniteMatrixGroup(std::vector<uint64_t> moduli, std::vector<GroupElement> gens) : mod_(std::move(moduli)) {
    r_ = static_cast<int>(mod_.size());
    for (uint64_t m : mod_) require(m >= 1 && m < (uint64_t(1) << 31), ErrorKind::TooLarge, "modulus too large");
    for (auto& g : gens) {
      require(static_cast<int>(g.size()) == r_ * r_, ErrorKind::PreconditionViolation, "generator has wrong size");
      normalize(g);
      if (g != identity()) gens_.push_back(g);
    }
  }

  int rank() const { return r_; }
  const std::vector<uint64_t>& moduli() const { return mod_; }
  const std::vector<GroupElement>& generators() const { return gens_; }

  GroupElement identity() const {
    GroupElement e(r_ * r_, 0);
    for (int k = 0; k < r_; ++k) e[k * r_ + k] = 1 % mod_[k];
    return e;
  }

  GroupElement multiply(const GroupElement& a, const GroupElement& b) const {
    GroupElement c(r_ * r_, 0);
    for (int i = 0; i < r_; ++i)
      for (int l = 0; l < r_; ++l) {
        uint64_t m = mod_[l], acc = 0;
        for (int j = 0; j < r_; ++j) acc = (acc + a[i * r_ + j] % m * b[j * r_ + l]) % m;
        c[i * r_ + l] = acc;
      }
    return c;
  }

  GroupElement inverse(const GroupElement& g, uint64_t budget = kDefaultGroupBudget) const {
    GroupElement id = identity(), prev = id, cur = g;
    for (uint64_t k = 0; k < budget; ++k) {
      if (cur == id) return prev;
      prev = cur;
      cur = multiply(cur, g);
    }
    fail(ErrorKind::BudgetExceeded, "element order exceeds the budget");
  }

  uint64_t point_count() const {
    long double total = 1;
    for (uint64_t m : mod_) total *= static_cast<long double>(m);
    require(total < 1.8e19L, ErrorKind::TooLarge, "action space does not fit a machine word");
    uint64_t t = 1;
    for (uint64_t m : mod_) t *= m;
    return t;
  }

  uint64_t encode_row(const GroupElement& g, int row) const {
    uint64_t code = 0;
    for (int l = r_ - 1; l >= 0; --l) code = code * mod_[l] + g[row * r_ + l];
    return code;
  }

  uint64_t act(uint64_t point, const GroupElement& g) const {
    std::vector<uint64_t> x(r_);
    for (int l = 0; l < r_; ++l) {
      x[l] = point % mod_[l];
      point /= mod_[l];
    }
    uint64_t code = 0;
    for (int l = r_ - 1; l >= 0; --l) {
      uint64_t m = mod_[l], acc = 0;
      for (int j = 0; j < r_; ++j) acc = (acc + x[j] % m * g[j * r_ + l]) % m;
      code = code * m + acc;
    }
    return code;
  }

  // Breadth-first enumeration of all elements.
  std::vector<GroupElement> elements(uint64_t budget = kDefaultGroupBudget) const {
    std::unordered_set<GroupElement, GroupElementHash> seen;
    std::vector<GroupElement> out{identity()};
    seen.insert(out[0]);
    for (size_t k = 0; k < out.size(); ++k)
      for (const auto& g : gens_) {
        GroupElement h = multiply(out[k], g);
        if (seen.insert(h).second) {
          if (out.size() >= budget) fail(ErrorKind::BudgetExceeded, "closure exceeds the element budget");
          out.push_back(std::move(h));
        }
      }
    return out;
  }

  Int order_by_closure(uint64_t budget = kDefaultGroupBudget) const { return Int(std::to_string(elements(budget).size())); }

  // Schreier-Sims with base e_1, ..., e_r; an element fixing every basis vector is the identity.
  Int order_by_stabilizer_chain(uint64_t budget = kDefaultGroupBudget) const {
    point_count();
    struct Level {
      uint64_t base = 0;
      std::unordered_map<uint64_t, GroupElement> u, uinv;
      std::vector<uint64_t> points;
    };
    std::vector<Level> levels(r_);
    GroupElement id = identity();
    for (int k = 0; k < r_; ++k) levels[k].base = encode_row(id, k);
    std::vector<GroupElement> strong, strong_inv;
    auto add_strong = [&](const GroupElement& g) {
      strong.push_back(g);
      strong_inv.push_back(inverse(g, budget));
    };
    for (const auto& g : gens_) add_strong(g);

    auto fixes_prefix = [&](const GroupElement& g, int k) {
      for (int j = 0; j < k; ++j)
        if (encode_row(g, j) != levels[j].base) return false;
      return true;
    };
    uint64_t total_points = 0;
    auto build = [&](int k) {
      Level& L = levels[k];
      total_points -= L.points.size();
      L.u.clear();
      L.uinv.clear();
      L.points.assign(1, L.base);
      L.u[L.base] = id;
      L.uinv[L.base] = id;
      std::vector<size_t> sk;
      for (size_t s = 0; s < strong.size(); ++s)
        if (fixes_prefix(strong[s], k)) sk.push_back(s);
      for (size_t t = 0; t < L.points.size(); ++t) {
        uint64_t pt = L.points[t];
        for (size_t s : sk) {
          uint64_t q = act(pt, strong[s]);
          if (L.u.count(q)) continue;
          if (++total_points > budget) fail(ErrorKind::BudgetExceeded, "orbit sizes exceed the budget");
          L.u[q] = multiply(L.u[pt], strong[s]);
          L.uinv[q] = multiply(strong_inv[s], L.uinv[pt]);
          L.points.push_back(q);
        }
      }
      total_points += 1;
    };
    auto sift = [&](GroupElement g, int from) -> std::pair<GroupElement, int> {
      for (int k = from; k < r_; ++k) {
        uint64_t pt = encode_row(g, k);
        auto it = levels[k].uinv.find(pt);
        if (it == levels[k].uinv.end()) return {g, k};
        g = multiply(g, it->second);
      }
      return {g, r_};
    };
    for (int k = 0; k < r_; ++k) build(k);
    int k = r_ - 1;
    while (k >= 0) {
      bool restarted = false;
      std::vector<size_t> sk;
      for (size_t s = 0; s < strong.size(); ++s)
        if (fixes_prefix(strong[s], k)) sk.push_back(s);
      Level& L = levels[k];
      for (size_t t = 0; t < L.points.size() && !restarted; ++t) {
        uint64_t pt = L.points[t];
        for (size_t s : sk) {
          uint64_t q = act(pt, strong[s]);
          GroupElement h = multiply(multiply(L.u[pt], strong[s]), L.uinv[q]);
          auto [res, j] = sift(h, k + 1);
          if (j < r_) {
            add_strong(res);
            for (int l = 0; l <= j; ++l) build(l);
            k = j;
            restarted = true;
            break;
          }
        }
      }
      if (!restarted) --k;
    }
    Int order = 1;
    for (const auto& L : levels) order *= static_cast<unsigned long>(L.points.size());
    return order;
  }

 private:
  void normalize(GroupElement& g) const {
    for (int i = 0; i < r_; ++i)
      for (int l = 0; l < r_; ++l) g[i * r_ + l] %= mod_[l];
  }

  int r_ = 0;
  std::vector<uint64_t> mod_;
  std::vector<GroupElement> gens_;
};

inline GroupElement to_group_element(const ModMatrix& m, const std::vector<uint64_t>& moduli) {
  int r = m.rows();
  require(m.cols() == r && static_cast<int>(moduli.size()) == r, ErrorKind::PreconditionViolation,
          "matrix shape disagrees with the moduli");
  GroupElement e(r * r);
  for (int i = 0; i < r; ++i)
    for (int l = 0; l < r; ++l) e[i * r + l] = mpz_fdiv_ui(m(i, l).get_mpz_t(), moduli[l]);
  return e;
}

enum class ClosureMethod { stabilizer_chain, full_closure };

// Order of the group generated by the reductions mod p^n of the given matrices.
inline Int closure_order(const std::vector<ModMatrix>& gens, long p, int n, int rank,
                         ClosureMethod method = ClosureMethod::stabilizer_chain,
                         uint64_t budget = kDefaultGroupBudget) {
  Int m = ipow(p, n);
  require(m.fits_ulong_p() && m < Int(1) << 31, ErrorKind::TooLarge, "p^n too large for the group engine");
  std::vector<uint64_t> moduli(rank, m.get_ui());
  std::vector<GroupElement> elems;
  for (const auto& g : gens) elems.push_back(to_group_element(g, moduli));
  FiniteMatrixGroup grp(moduli, elems);
  return method == ClosureMethod::full_closure ? grp.order_by_closure(budget) : grp.order_by_stabilizer_chain(budget);
}

struct IsometryEnumeration {
  Int count = 0;
  std::vector<ModMatrix> matrices;  // mod p^n, filled when requested
};

// All F mod p^n with an n-approximate compatible representative (Z = G); G is a Jordan block diagonal.
inline IsometryEnumeration enumerate_isometries_mod(const ModMatrix& gram, const BlockStructure& s, int n,
                                                    bool collect = false,
                                                    uint64_t bound = kDefaultEnumerationBound) {
  long p = gram.ctx().p();
  int r = s.dim();
  require(n >= 1, ErrorKind::PreconditionViolation, "n must be at least 1");
  long double cand = 1;
  for (int k = 0; k < n * r * r; ++k) cand *= p;
  require(cand <= static_cast<long double>(bound), ErrorKind::TooLarge,
          "p^(n r^2) exceeds the enumeration bound");
  PadicContext ctx(p, n + s.max_scale() + 3);
  ModMatrix G = gram.with_precision(ctx);
  std::vector<std::vector<Int>> g = G.to_rows();
  std::vector<int> sc(r);
  for (int k = 0; k < r; ++k) sc[k] = s.scale_of(k);
  long pn = ipow(p, n).get_si();
  std::vector<std::vector<Int>> F(r, std::vector<Int>(r));
  std::vector<std::vector<Int>> row_times_g(r, std::vector<Int>(r));
  auto pair_ok = [&](int a, int b) {
    Int acc = 0;
    for (int l = 0; l < r; ++l) acc += row_times_g[a][l] * F[b][l];
    acc -= g[a][b];
    int need = n + std::max(sc[a], sc[b]) + ((p == 2 && a == b) ? 1 : 0);
    return mpz_divisible_p(acc.get_mpz_t(), ctx.power(need).get_mpz_t()) != 0;
  };
  std::set<std::vector<long>> keys;
  IsometryEnumeration out;
  uint64_t per_row = 1;
  for (int k = 0; k < r; ++k) per_row *= static_cast<uint64_t>(pn);
  std::function<void(int)> rec = [&](int i) {
    if (i == r) {
      ModMatrix Fm = ModMatrix::from_rows(ctx, F);
      if (approximation_level(Fm, G, G, s) < n) return;
      if (valuation(integer_determinant(F), ctx) != 0) return;
      std::vector<long> key;
      for (const auto& row : F)
        for (const auto& x : row) key.push_back(static_cast<long>(mpz_fdiv_ui(x.get_mpz_t(), pn)));
      if (keys.insert(key).second && collect) out.matrices.push_back(Fm.reduced_mod(n));
      return;
    }
    for (uint64_t c = 0; c < per_row; ++c) {
      uint64_t cc = c;
      for (int k = 0; k < r; ++k) {
        F[i][k] = Int(static_cast<unsigned long>(cc % pn)) * ctx.power(std::max(sc[i] - sc[k], 0));
        cc /= pn;
      }
      for (int l = 0; l < r; ++l) {
        Int acc = 0;
        for (int k = 0; k < r; ++k) acc += F[i][k] * g[k][l];
        row_times_g[i][l] = acc;
      }
      bool ok = true;
      for (int a = 0; a <= i && ok; ++a) ok = pair_ok(a, i);
      if (ok) rec(i + 1);
    }
  };
  rec(0);
  out.count = Int(std::to_string(keys.size()));
  return out;
}

inline IsometryEnumeration enumerate_isometries_mod(const JordanDecomposition& J, int n, bool collect = false,
                                                    uint64_t bound = kDefaultEnumerationBound) {
  return enumerate_isometries_mod(J.block_diagonal(), J.structure(), n, collect, bound);
}

// #{X mod p^m : X G X^T = G mod p^m}, the quantity N(L, p^m) counted directly.
// Counts X mod p^m with X G X^T == G mod p^m. With diagonal_extra, diagonal entries must also agree mod
// p^(m+1), which is the quadratic-form congruence at p = 2.
inline Int count_gram_preserving_mod(const std::vector<std::vector<Int>>& gram, long p, int m,
                                     uint64_t bound = kDefaultEnumerationBound, bool diagonal_extra = false) {
  int r = static_cast<int>(gram.size());
  long double cand = 1;
  for (int k = 0; k < m * r; ++k) cand *= p;
  require(cand <= static_cast<long double>(bound), ErrorKind::TooLarge, "p^(m r) exceeds the enumeration bound");
  Int mod = ipow(p, m), diag_mod = diagonal_extra ? Int(mod * p) : mod;
  uint64_t pm = mod.get_ui();
  uint64_t per_row = static_cast<uint64_t>(cand);
  std::vector<std::vector<Int>> X(r, std::vector<Int>(r)), XG(r, std::vector<Int>(r));
  std::function<Int(int)> rec = [&](int i) -> Int {
    if (i == r) return 1;
    Int total = 0;
    for (uint64_t c = 0; c < per_row; ++c) {
      uint64_t cc = c;
      for (int k = 0; k < r; ++k) {
        X[i][k] = static_cast<unsigned long>(cc % pm);
        cc /= pm;
      }
      for (int l = 0; l < r; ++l) {
        Int acc = 0;
        for (int k = 0; k < r; ++k) acc += X[i][k] * gram[k][l];
        XG[i][l] = acc;
      }
      bool ok = true;
      for (int a = 0; a <= i && ok; ++a) {
        Int acc = -gram[a][i];
        for (int l = 0; l < r; ++l) acc += XG[a][l] * X[i][l];
        ok = mpz_divisible_p(acc.get_mpz_t(), (a == i ? diag_mod : mod).get_mpz_t()) != 0;
      }
      if (ok) total += rec(i + 1);
    }
    return total;
  };
  return rec(0);
}

}  // namespace latdisc
