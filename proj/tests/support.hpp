#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_set>
#include <vector>

#include "latdisc.hpp"

namespace latdisc::testing {

using IntRows = std::vector<std::vector<Int>>;

inline IntRows diag(std::initializer_list<long> d) {
  IntRows g(d.size(), std::vector<Int>(d.size(), 0));
  size_t k = 0;
  for (long x : d) g[k][k] = x, ++k;
  return g;
}

inline ModMatrix mat(const PadicContext& ctx, const IntRows& rows) { return ModMatrix::from_rows(ctx, rows); }

// Brute-force closure of a set of F_p matrices.
inline size_t fp_closure(const std::vector<FpMatrix>& gens, int p, int n) {
  auto key = [p](const FpMatrix& m) {
    uint64_t c = 0;
    for (int x : m.data()) c = c * p + x;
    return c;
  };
  std::unordered_set<uint64_t> seen{key(FpMatrix::identity(p, n))};
  std::vector<FpMatrix> frontier{FpMatrix::identity(p, n)};
  while (!frontier.empty()) {
    FpMatrix x = frontier.back();
    frontier.pop_back();
    for (const auto& g : gens) {
      FpMatrix y = x * g;
      if (seen.insert(key(y)).second) frontier.push_back(y);
    }
  }
  return seen.size();
}

// Random non-degenerate symmetric integer matrix.
inline IntRows random_gram(std::mt19937& rng, int r, int spread = 4, int diag_max = 16) {
  while (true) {
    IntRows g(r, std::vector<Int>(r, 0));
    for (int i = 0; i < r; ++i)
      for (int j = i; j < r; ++j) {
        int v = static_cast<int>(rng() % (2 * spread + 1)) - spread;
        if (i != j && rng() % 2) v = 0;
        g[i][j] = g[j][i] = v;
      }
    for (int i = 0; i < r; ++i)
      if (g[i][i] == 0) g[i][i] = 1 + static_cast<int>(rng() % diag_max);
    if (integer_determinant(g) != 0) return g;
  }
}

// Random p-adic Jordan form built from unimodular pieces at increasing scales.
inline IntRows random_jordan_gram(std::mt19937& rng, long p, int max_rank, int max_scale) {
  std::vector<IntRows> pieces;
  if (p == 2)
    pieces = {{{1}}, {{3}}, {{5}}, {{7}}, {{0, 1}, {1, 0}}, {{2, 1}, {1, 2}}};
  else
    pieces = {{{1}}, {{2}}, {{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}};
  while (true) {
    std::vector<std::pair<int, IntRows>> parts;
    int r = 0;
    while (true) {
      const auto& pc = pieces[rng() % pieces.size()];
      if (r + static_cast<int>(pc.size()) > max_rank) break;
      parts.push_back({static_cast<int>(rng() % (max_scale + 1)), pc});
      r += static_cast<int>(pc.size());
      if (rng() % 3 == 0) break;
    }
    if (r == 0) continue;
    IntRows g(r, std::vector<Int>(r, 0));
    int off = 0;
    for (auto& [sc, pc] : parts) {
      Int f = ipow(p, sc);
      for (size_t i = 0; i < pc.size(); ++i)
        for (size_t j = 0; j < pc.size(); ++j) g[off + i][off + j] = pc[i][j] * f;
      off += static_cast<int>(pc.size());
    }
    return g;
  }
}

// Random integer matrix with determinant +-1, as a product of elementary operations.
inline IntRows random_unimodular(std::mt19937& rng, int r, int steps = 8) {
  IntRows u(r, std::vector<Int>(r, 0));
  for (int i = 0; i < r; ++i) u[i][i] = 1;
  if (r == 1) {
    if (rng() % 2) u[0][0] = -1;
    return u;
  }
  for (int s = 0; s < steps; ++s) {
    int i = static_cast<int>(rng() % r), j = static_cast<int>(rng() % r);
    if (i == j) continue;
    int c = static_cast<int>(rng() % 5) - 2;
    for (int k = 0; k < r; ++k) u[i][k] += c * u[j][k];
  }
  return u;
}

inline IntRows congruent(const IntRows& u, const IntRows& g) {
  size_t r = g.size();
  IntRows t(r, std::vector<Int>(r, 0)), out(r, std::vector<Int>(r, 0));
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j)
      for (size_t k = 0; k < r; ++k) t[i][j] += u[i][k] * g[k][j];
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j)
      for (size_t k = 0; k < r; ++k) out[i][j] += t[i][k] * u[j][k];
  return out;
}

inline double candidate_space(long p, int exponent) {
  double s = 1;
  for (int k = 0; k < exponent; ++k) s *= static_cast<double>(p);
  return s;
}

struct HenselInstance {
  ModMatrix F, G, Z;
  BlockStructure s;
  int a;
};

// Exact isometry F0 of G onto Z = F0 G F0^T, perturbed by compatible noise of size p^a.
inline std::optional<HenselInstance> random_hensel_instance(std::mt19937& rng, long p, int max_rank, int max_blocks, int a, int b) {
  int nb = 1 + static_cast<int>(rng() % max_blocks);
  std::vector<int> sc, rk;
  int cur = static_cast<int>(rng() % 2);
  for (int k = 0; k < nb; ++k) {
    sc.push_back(cur);
    cur += 1 + static_cast<int>(rng() % 2);
    rk.push_back(1 + static_cast<int>(rng() % 2));
  }
  BlockStructure s(sc, rk);
  int r = s.dim();
  if (r > max_rank) return std::nullopt;
  PadicContext ctx(p, b + s.max_scale() + 3);
  ModMatrix G(ctx, r, r);
  for (int k = 0; k < nb; ++k) {
    int off = s.offsets[k];
    for (int i = 0; i < rk[k]; ++i)
      for (int j = i; j < rk[k]; ++j) {
        Int v = Int(static_cast<long>(rng() % 7)) * ctx.power(sc[k]);
        G.set(off + i, off + j, v);
        G.set(off + j, off + i, v);
      }
    if (valuation(integer_determinant(divide_exact(block_of(G, s, k, k), sc[k]).to_rows()), ctx) != 0)
      return std::nullopt;
  }
  ModMatrix F(ctx, r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      int need = std::max(s.scale_of(i) - s.scale_of(j), 0);
      F.set(i, j, Int(static_cast<long>(rng() % 50)) * ctx.power(need));
    }
  if (valuation(integer_determinant(F.to_rows()), ctx) != 0) return std::nullopt;
  ModMatrix Z = F * G * F.transpose();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      int need = a + std::max(s.scale_of(i) - s.scale_of(j), 0);
      F.set(i, j, F(i, j) + Int(static_cast<long>(rng() % 5)) * ctx.power(need));
    }
  if (approximation_level(F, G, Z, s) < a) return std::nullopt;
  return HenselInstance{F, G, Z, s, a};
}

}  // namespace latdisc::testing
