#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "latdisc/errors.hpp"
#include "latdisc/fp_linalg.hpp"
#include "latdisc/padic.hpp"

namespace latdisc {

enum class FormKind { quadratic, bilinear };

inline const char* kind_name(FormKind k) { return k == FormKind::quadratic ? "quadratic" : "bilinear"; }

// Decomposition counts: u, v, w1, w3 (p = 2 quadratic); ubar, wbar (p = 2 bilinear); dim and hyperbolic flag (odd p).
struct Tally {
  int u = 0, v = 0, w1 = 0, w3 = 0;
  int ubar = 0, wbar = 0;
  int dim = 0;
  bool hyperbolic = false;

  bool operator==(const Tally& o) const {
    return u == o.u && v == o.v && w1 == o.w1 && w3 == o.w3 && ubar == o.ubar && wbar == o.wbar && dim == o.dim &&
           hyperbolic == o.hyperbolic;
  }
};

// Non-degenerate p-elementary form. For p = 2 quadratic forms the diagonal holds x G x^T mod 4 (twice the value
// of q), off-diagonal entries hold b mod 2; otherwise all entries are mod p.
class ElementaryForm {
 public:
  static ElementaryForm from_gram(int p, FormKind kind, const std::vector<Vec>& gram) {
    require(is_small_prime(p), ErrorKind::PreconditionViolation, "p must be prime");
    require(p == 2 || kind == FormKind::quadratic, ErrorKind::WrongKind, "bilinear kind is only used at p = 2");
    ElementaryForm f;
    f.p_ = p;
    f.kind_ = kind;
    f.dim_ = static_cast<int>(gram.size());
    f.g_.assign(f.dim_ * f.dim_, 0);
    for (int i = 0; i < f.dim_; ++i) {
      require(static_cast<int>(gram[i].size()) == f.dim_, ErrorKind::PreconditionViolation, "gram is not square");
      for (int j = 0; j < f.dim_; ++j) {
        require(mod_p(gram[i][j] - gram[j][i], p) == 0, ErrorKind::PreconditionViolation, "gram is not symmetric");
        int m = (i == j && p == 2 && kind == FormKind::quadratic) ? 4 : p;
        f.g_[i * f.dim_ + j] = mod_p(gram[i][j], m);
      }
    }
    f.classify_self();
    return f;
  }

  static ElementaryForm from_tally(int p, FormKind kind, const Tally& t) {
    std::vector<Vec> blocks;
    auto add_block = [&](const std::vector<Vec>& b) { blocks.insert(blocks.end(), b.begin(), b.end()); };
    std::vector<std::vector<Vec>> parts;
    if (p == 2 && kind == FormKind::quadratic) {
      for (int k = 0; k < t.u; ++k) parts.push_back({{0, 1}, {1, 0}});
      for (int k = 0; k < t.v; ++k) parts.push_back({{2, 1}, {1, 2}});
      for (int k = 0; k < t.w1; ++k) parts.push_back({{1}});
      for (int k = 0; k < t.w3; ++k) parts.push_back({{3}});
    } else if (p == 2) {
      for (int k = 0; k < t.ubar; ++k) parts.push_back({{0, 1}, {1, 0}});
      for (int k = 0; k < t.wbar; ++k) parts.push_back({{1}});
    } else {
      int m = t.dim / 2;
      if (t.dim % 2 == 1) {
        for (int k = 0; k < m; ++k) parts.push_back({{0, 1}, {1, 0}});
        parts.push_back({{1}});
      } else if (t.hyperbolic || m == 0) {
        for (int k = 0; k < m; ++k) parts.push_back({{0, 1}, {1, 0}});
      } else {
        for (int k = 0; k + 1 < m; ++k) parts.push_back({{0, 1}, {1, 0}});
        int nonsq = 2;
        while (is_square_mod_p(nonsq, p)) ++nonsq;
        parts.push_back({{1, 0}, {0, mod_p(-nonsq, p)}});
      }
    }
    int n = 0;
    for (auto& b : parts) n += static_cast<int>(b.size());
    std::vector<Vec> gram(n, Vec(n, 0));
    int off = 0;
    for (auto& b : parts) {
      for (size_t i = 0; i < b.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) gram[off + i][off + j] = b[i][j];
      off += static_cast<int>(b.size());
    }
    (void)add_block;
    return from_gram(p, kind, gram);
  }

  int p() const { return p_; }
  FormKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int gram(int i, int j) const { return g_[i * dim_ + j]; }
  const Tally& tally() const { return tally_; }
  bool is_quadratic() const { return kind_ == FormKind::quadratic; }

  std::vector<Vec> gram_rows() const {
    std::vector<Vec> out(dim_, Vec(dim_));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) out[i][j] = gram(i, j);
    return out;
  }

  // Bilinear Gram over F_p.
  FpMatrix bilinear_gram() const {
    FpMatrix m(p_, dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m.at(i, j) = gram(i, j) % p_;
    return m;
  }

  int b(const Vec& x, const Vec& y) const {
    long acc = 0;
    for (int i = 0; i < dim_; ++i) {
      if (!x[i]) continue;
      for (int j = 0; j < dim_; ++j)
        if (y[j]) acc += static_cast<long>(x[i]) * y[j] * (gram(i, j) % p_);
    }
    return mod_p(acc, p_);
  }

  // x G x^T, i.e. twice the quadratic value: mod 4 at p = 2 (quadratic kind), mod p otherwise.
  int Q(const Vec& x) const {
    if (p_ == 2 && kind_ == FormKind::quadratic) {
      long acc = 0;
      for (int i = 0; i < dim_; ++i) {
        if (!(x[i] & 1)) continue;
        acc += gram(i, i);
        for (int j = i + 1; j < dim_; ++j)
          if (x[j] & 1) acc += 2 * gram(i, j);
      }
      return mod_p(acc, 4);
    }
    return b(x, x);
  }

  // Associated bilinear form (p = 2).
  ElementaryForm bilinear() const {
    require(p_ == 2, ErrorKind::WrongPrime, "associated bilinear kind is used at p = 2");
    auto g = gram_rows();
    for (int i = 0; i < dim_; ++i) g[i][i] %= 2;
    return from_gram(2, FormKind::bilinear, g);
  }

  bool preserves(const FpMatrix& f) const {
    if (f.rows() != dim_ || f.cols() != dim_ || f.p() != p_) return false;
    for (int k = 0; k < dim_; ++k) {
      Vec fk = f.row(k);
      for (int l = 0; l < k; ++l)
        if (b(fk, f.row(l)) != gram(k, l) % p_) return false;
      if (p_ == 2 && kind_ == FormKind::quadratic) {
        if (Q(fk) != gram(k, k)) return false;
      } else if (b(fk, fk) != gram(k, k) % p_) {
        return false;
      }
    }
    return rank(f) == dim_;
  }

  // Characteristic vector z with b(z, x) = b(x, x) for all x (p = 2).
  Vec characteristic_vector() const {
    FpMatrix g = bilinear_gram();
    Vec d(dim_);
    for (int i = 0; i < dim_; ++i) d[i] = gram(i, i) & 1;
    auto z = solve(g, d);
    require(z.has_value(), ErrorKind::Degenerate, "form is degenerate");
    return *z;
  }

 private:
  void classify_self();

  int p_ = 2;
  FormKind kind_ = FormKind::quadratic;
  int dim_ = 0;
  std::vector<int> g_;
  Tally tally_;
};

struct FormIsometry {
  ElementaryForm form;
  FpMatrix matrix;
};

namespace detail {

inline Vec unit_vec(int n, int k) {
  Vec v(n, 0);
  v[k] = 1;
  return v;
}

// Independent subset spanning the same space.
inline std::vector<Vec> independent(const std::vector<Vec>& vs, int p, int n) {
  std::vector<Vec> out;
  for (const auto& v : vs) {
    auto trial = out;
    trial.push_back(v);
    if (rank(FpMatrix::from_rows(p, trial)) == static_cast<int>(trial.size())) out = trial;
  }
  (void)n;
  return out;
}

// {x in span(W) : b(x, s) = 0 for all s in S}.
inline std::vector<Vec> orth_in(const ElementaryForm& f, const std::vector<Vec>& W, const std::vector<Vec>& S) {
  int p = f.p();
  int n = f.dim();
  if (W.empty()) return {};
  if (S.empty()) return W;
  FpMatrix A(p, static_cast<int>(S.size()), static_cast<int>(W.size()));
  for (size_t j = 0; j < S.size(); ++j)
    for (size_t i = 0; i < W.size(); ++i) A.at(j, i) = f.b(W[i], S[j]);
  std::vector<Vec> out;
  for (const auto& c : nullspace(A)) {
    Vec x(n, 0);
    for (size_t i = 0; i < W.size(); ++i)
      if (c[i]) x = vec_add(x, W[i], p, c[i]);
    out.push_back(x);
  }
  return out;
}

inline std::vector<Vec> standard_basis(int n) {
  std::vector<Vec> out;
  for (int k = 0; k < n; ++k) out.push_back(unit_vec(n, k));
  return out;
}

// All vectors of span(W) in coefficient enumeration order.
inline std::vector<Vec> span_elements(const std::vector<Vec>& W, int p, int n) {
  std::vector<Vec> out{Vec(n, 0)};
  for (const auto& w : W) {
    size_t cur = out.size();
    for (int c = 1; c < p; ++c)
      for (size_t k = 0; k < cur; ++k) out.push_back(vec_add(out[k], w, p, c));
  }
  return out;
}

// Ambient matrix acting as g (in coordinates of W) on span(W) and trivially on its orthogonal complement.
inline FpMatrix embed(const ElementaryForm& f, const std::vector<Vec>& W, const FpMatrix& g) {
  int p = f.p();
  int n = f.dim();
  auto comp = orth_in(f, standard_basis(n), W);
  std::vector<Vec> rows = W;
  rows.insert(rows.end(), comp.begin(), comp.end());
  FpMatrix T = FpMatrix::from_rows(p, rows);
  FpMatrix D = FpMatrix::identity(p, n);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) D.at(i, j) = g.at(i, j);
  return inverse(T) * D * T;
}

// x -> x + c b(x, w) w.
inline FpMatrix rank_one_map(const ElementaryForm& f, const Vec& w, int c) {
  int n = f.dim();
  int p = f.p();
  FpMatrix m = FpMatrix::identity(p, n);
  for (int k = 0; k < n; ++k) {
    int s = mod_p(static_cast<long>(c) * f.b(unit_vec(n, k), w), p);
    if (!s) continue;
    for (int j = 0; j < n; ++j) m.at(k, j) = mod_p(m.at(k, j) + s * w[j], p);
  }
  return m;
}

// Reflection in an anisotropic vector (odd p): x -> x - 2 b(x,w)/b(w,w) w.
inline FpMatrix reflection_odd(const ElementaryForm& f, const Vec& w) {
  int p = f.p();
  int c = mod_p(-2L * inv_mod_p(f.b(w, w), p), p);
  return rank_one_map(f, w, c);
}

using Act = std::function<uint64_t(uint64_t, const FpMatrix&)>;

inline std::unordered_set<uint64_t> orbit(uint64_t base, const std::vector<FpMatrix>& gens, const Act& act,
                                          size_t cap = SIZE_MAX) {
  std::unordered_set<uint64_t> seen{base};
  std::vector<uint64_t> frontier{base};
  while (!frontier.empty() && seen.size() < cap) {
    uint64_t x = frontier.back();
    frontier.pop_back();
    for (const auto& g : gens) {
      uint64_t y = act(x, g);
      if (seen.insert(y).second) frontier.push_back(y);
    }
  }
  return seen;
}

// Adds candidates until the orbit of base reaches target; returns indices of the chosen candidates.
inline std::vector<size_t> grow_to_transitive(uint64_t base, size_t target, std::vector<FpMatrix> gens,
                                              const std::vector<FpMatrix>& cands, const Act& act) {
  std::vector<size_t> chosen;
  auto orb = orbit(base, gens, act);
  bool exhaustive = cands.size() * target <= 2000000;
  while (orb.size() < target) {
    size_t best = cands.size();
    size_t best_size = orb.size();
    for (size_t c = 0; c < cands.size(); ++c) {
      if (exhaustive) {
        auto trial = gens;
        trial.push_back(cands[c]);
        size_t s = orbit(base, trial, act).size();
        if (s > best_size) {
          best_size = s;
          best = c;
          if (s == target) break;
        }
      } else {
        bool grows = false;
        for (uint64_t x : orb)
          if (!orb.count(act(x, cands[c]))) {
            grows = true;
            break;
          }
        if (grows) {
          best = c;
          break;
        }
      }
    }
    require(best < cands.size(), ErrorKind::InternalError, "candidate set does not act transitively");
    chosen.push_back(best);
    gens.push_back(cands[best]);
    orb = orbit(base, gens, act);
  }
  return chosen;
}

inline Act vector_action(int p, int n) {
  return [p, n](uint64_t x, const FpMatrix& g) { return encode(vec_mul(decode(x, p, n), g), p); };
}

inline Act pair_action(int p, int n) {
  uint64_t shift = 1;
  for (int k = 0; k < n; ++k) shift *= p;
  return [p, n, shift](uint64_t x, const FpMatrix& g) {
    Vec a = decode(x % shift, p, n), b = decode(x / shift, p, n);
    return encode(vec_mul(a, g), p) + shift * encode(vec_mul(b, g), p);
  };
}

inline uint64_t pair_code(const Vec& a, const Vec& b, int p) {
  uint64_t shift = 1;
  for (size_t k = 0; k < a.size(); ++k) shift *= p;
  return encode(a, p) + shift * encode(b, p);
}

// Odd p: stabilizer recursion on an anisotropic vector, reflections for transitivity.
inline std::vector<FpMatrix> odd_orthogonal(const ElementaryForm& f, const std::vector<Vec>& W) {
  if (W.empty()) return {};
  int p = f.p(), n = f.dim();
  Vec e;
  for (const auto& w : W)
    if (f.b(w, w)) {
      e = w;
      break;
    }
  for (size_t i = 0; e.empty() && i < W.size(); ++i)
    for (size_t j = i + 1; e.empty() && j < W.size(); ++j)
      if (f.b(W[i], W[j])) e = vec_add(W[i], W[j], p);
  require(!e.empty(), ErrorKind::Degenerate, "no anisotropic vector in a non-degenerate space");
  auto gens = odd_orthogonal(f, orth_in(f, W, {e}));
  auto elems = span_elements(W, p, n);
  size_t target = 0;
  std::vector<FpMatrix> cands;
  std::unordered_set<uint64_t> used;
  for (const auto& x : elems) {
    if (f.b(x, x) == f.b(e, e)) ++target;
    if (!f.b(x, x)) continue;
    int lead = 0;
    for (int v : x)
      if (v) {
        lead = v;
        break;
      }
    Vec nx = x;
    int li = inv_mod_p(lead, p);
    for (auto& v : nx) v = v * li % p;
    if (used.insert(encode(nx, p)).second) cands.push_back(reflection_odd(f, nx));
  }
  for (size_t c : grow_to_transitive(encode(e, p), target, gens, cands, vector_action(p, n))) gens.push_back(cands[c]);
  return gens;
}

// Alternating form at p = 2: returns transvection vectors generating Sp(span W).
inline std::vector<Vec> symplectic_vectors(const ElementaryForm& f, const std::vector<Vec>& W) {
  if (W.empty()) return {};
  int n = f.dim();
  Vec e = W[0], g;
  for (const auto& w : W)
    if (f.b(e, w)) {
      g = w;
      break;
    }
  require(!g.empty(), ErrorKind::Degenerate, "alternating space is degenerate");
  auto vecs = symplectic_vectors(f, orth_in(f, W, {e, g}));
  size_t dim = W.size();
  size_t target = ((size_t(1) << dim) - 1) << (dim - 1);
  std::vector<FpMatrix> gens, cands;
  std::vector<Vec> cand_vecs;
  for (const auto& v : vecs) gens.push_back(rank_one_map(f, v, 1));
  for (const auto& x : span_elements(W, 2, n)) {
    if (vec_is_zero(x)) continue;
    cands.push_back(rank_one_map(f, x, 1));
    cand_vecs.push_back(x);
  }
  for (size_t c : grow_to_transitive(pair_code(e, g, 2), target, gens, cands, pair_action(2, n)))
    vecs.push_back(cand_vecs[c]);
  return vecs;
}

std::vector<FpMatrix> enumerate_isometries(const ElementaryForm& f, long bound);

// Greedy generating subset of a finite matrix group given by its elements.
inline std::vector<FpMatrix> generating_subset(const std::vector<FpMatrix>& elems) {
  auto key = [](const FpMatrix& m) {
    uint64_t c = 0;
    for (int x : m.data()) c = c * m.p() + x;
    return c;
  };
  auto closure = [&](const std::vector<FpMatrix>& gens, int n, int p) {
    std::unordered_set<uint64_t> seen;
    std::vector<FpMatrix> frontier{FpMatrix::identity(p, n)};
    seen.insert(key(frontier[0]));
    while (!frontier.empty()) {
      FpMatrix x = frontier.back();
      frontier.pop_back();
      for (const auto& g : gens) {
        FpMatrix y = x * g;
        if (seen.insert(key(y)).second) frontier.push_back(y);
      }
    }
    return seen;
  };
  std::vector<FpMatrix> gens;
  if (elems.empty()) return gens;
  int n = elems[0].rows(), p = elems[0].p();
  auto cur = closure(gens, n, p);
  while (cur.size() < elems.size()) {
    size_t best = elems.size(), best_size = cur.size();
    for (size_t k = 0; k < elems.size(); ++k) {
      if (cur.count(key(elems[k]))) continue;
      auto trial = gens;
      trial.push_back(elems[k]);
      size_t s = closure(trial, n, p).size();
      if (s > best_size) {
        best_size = s;
        best = k;
      }
    }
    require(best < elems.size(), ErrorKind::InternalError, "element list is not a group");
    gens.push_back(elems[best]);
    cur = closure(gens, n, p);
  }
  return gens;
}

// Restriction of a p = 2 quadratic form to span(W), as a form in W-coordinates.
inline ElementaryForm restrict_form(const ElementaryForm& f, const std::vector<Vec>& W) {
  int k = static_cast<int>(W.size());
  std::vector<Vec> g(k, Vec(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g[i][j] = (i == j) ? f.Q(W[i]) : f.b(W[i], W[j]);
  return ElementaryForm::from_gram(f.p(), f.kind(), g);
}

// Even quadratic form at p = 2 on span(W).
inline std::vector<FpMatrix> even_orthogonal(const ElementaryForm& f, const std::vector<Vec>& W) {
  if (W.empty()) return {};
  int n = f.dim();
  if (W.size() <= 4) {
    auto local = restrict_form(f, W);
    std::vector<FpMatrix> out;
    for (const auto& g : generating_subset(enumerate_isometries(local, 1L << 8))) out.push_back(embed(f, W, g));
    return out;
  }
  auto elems = span_elements(W, 2, n);
  Vec e, g;
  for (const auto& x : elems)
    if (!vec_is_zero(x) && f.Q(x) == 0) {
      e = x;
      break;
    }
  for (const auto& x : elems)
    if (f.Q(x) == 0 && f.b(e, x)) {
      g = x;
      break;
    }
  require(!e.empty() && !g.empty(), ErrorKind::InternalError, "even form of dimension at least 6 is isotropic");
  auto gens = even_orthogonal(f, orth_in(f, W, {e, g}));
  size_t zeros = 0, partners = 0;
  std::vector<FpMatrix> cands;
  for (const auto& x : elems) {
    if (f.Q(x) == 0) {
      ++zeros;
      if (f.b(e, x)) ++partners;
    }
    if (f.Q(x) == 2) cands.push_back(rank_one_map(f, x, 1));
  }
  for (size_t c : grow_to_transitive(pair_code(e, g, 2), (zeros - 1) * partners, gens, cands, pair_action(2, n)))
    gens.push_back(cands[c]);
  return gens;
}

// Symplectic Gram-Schmidt; returns the Arf invariant of an even quadratic form on span(W).
inline int arf(const ElementaryForm& f, std::vector<Vec> W) {
  int a = 0;
  while (!W.empty()) {
    Vec e = W.front();
    W.erase(W.begin());
    size_t j = 0;
    while (j < W.size() && !f.b(e, W[j])) ++j;
    require(j < W.size(), ErrorKind::Degenerate, "form is degenerate");
    Vec g = W[j];
    W.erase(W.begin() + j);
    a ^= ((f.Q(e) / 2) & (f.Q(g) / 2)) & 1;
    for (auto& x : W) {
      int be = f.b(x, e), bg = f.b(x, g);
      if (bg) x = vec_add(x, e, 2);
      if (be) x = vec_add(x, g, 2);
    }
  }
  return a;
}

// First basis vector with odd b(y, y); for the q(z) = 0 case adjusted so that q(y) = 1/2.
inline Vec odd_vector(const ElementaryForm& f) {
  for (const auto& e : standard_basis(f.dim()))
    if (f.b(e, e)) return e;
  fail(ErrorKind::InternalError, "no odd vector in an odd form");
}

}  // namespace detail

inline void ElementaryForm::classify_self() {
  tally_ = Tally{};
  tally_.dim = dim_;
  FpMatrix bg = bilinear_gram();
  require(determinant(bg) != 0, ErrorKind::Degenerate, "associated bilinear form is degenerate");
  auto all = detail::standard_basis(dim_);
  if (p_ != 2) {
    int m = dim_ / 2;
    int d = determinant(bg);
    tally_.hyperbolic = dim_ % 2 == 0 && is_square_mod_p(m % 2 ? -d : d, p_);
    return;
  }
  bool alternating = true;
  for (int i = 0; i < dim_; ++i)
    if (gram(i, i) & 1) alternating = false;
  if (kind_ == FormKind::bilinear) {
    if (alternating) {
      tally_.ubar = dim_ / 2;
    } else {
      Vec z = characteristic_vector();
      tally_.wbar = b(z, z) ? 1 : 2;
      tally_.ubar = (dim_ - tally_.wbar) / 2;
    }
    return;
  }
  if (alternating) {
    int a = detail::arf(*this, all);
    tally_.u = dim_ / 2 - a;
    tally_.v = a;
    return;
  }
  Vec z = characteristic_vector();
  if (b(z, z)) {
    int a = detail::arf(*this, detail::orth_in(*this, all, {z}));
    tally_.u = (dim_ - 1) / 2 - a;
    tally_.v = a;
    (Q(z) == 1 ? tally_.w1 : tally_.w3) = 1;
    return;
  }
  Vec y = detail::odd_vector(*this);
  if (Q(z) == 0 && Q(y) == 3) y = vec_add(y, z, 2);
  auto rest = detail::orth_in(*this, all, {y, z});
  int a = detail::arf(*this, rest);
  if (Q(z) == 0) {
    tally_.u = (dim_ - 2) / 2 - a;
    tally_.v = a;
    tally_.w1 = tally_.w3 = 1;
  } else {
    tally_.u = (dim_ - 2) / 2;
    bool plus = (a == 0) == (Q(y) == 1);
    (plus ? tally_.w1 : tally_.w3) = 2;
  }
}

namespace detail {

inline Int pow2(long e) { return ipow(2, static_cast<int>(e)); }

inline Int order_even_quadratic(int m, bool arf_one) {
  if (m == 0) return 1;
  Int r = pow2(static_cast<long>(m) * (m - 1) + 1) * (arf_one ? Int(pow2(m) + 1) : Int(pow2(m) - 1));
  for (int k = 1; k < m; ++k) r *= pow2(2 * k) - 1;
  return r;
}

inline Int zeros_even_quadratic(int m, bool arf_one) {
  if (m == 0) return 1;
  return pow2(m - 1) * (arf_one ? Int(pow2(m) - 1) : Int(pow2(m) + 1));
}

inline Int order_symplectic(int m) {
  Int r = pow2(static_cast<long>(m) * m);
  for (int k = 1; k <= m; ++k) r *= pow2(2 * k) - 1;
  return r;
}

inline Int order_odd_prime(long p, int dim, bool hyperbolic) {
  int m = dim / 2;
  if (dim == 0) return 1;
  Int r;
  if (dim % 2 == 1) {
    r = 2 * ipow(p, m * m);
    for (int k = 1; k <= m; ++k) r *= ipow(p, 2 * k) - 1;
    return r;
  }
  r = 2 * ipow(p, m * (m - 1)) * (hyperbolic ? Int(ipow(p, m) - 1) : Int(ipow(p, m) + 1));
  for (int k = 1; k < m; ++k) r *= ipow(p, 2 * k) - 1;
  return r;
}

}  // namespace detail

inline Int order_O(const ElementaryForm& f) {
  const Tally& t = f.tally();
  if (f.p() != 2) return detail::order_odd_prime(f.p(), f.dim(), t.hyperbolic);
  if (f.kind() == FormKind::bilinear) {
    Int base = detail::order_symplectic(t.ubar);
    return t.wbar == 2 ? detail::pow2(2 * t.ubar + 1) * base : base;
  }
  int m = t.u + t.v;
  bool arf_one = t.v % 2 == 1;
  int w = t.w1 + t.w3;
  if (w == 0 || w == 1) return detail::order_even_quadratic(m, arf_one);
  if (t.w1 == 2 || t.w3 == 2) return 2 * detail::order_symplectic(m);
  return detail::pow2(2 * m) * detail::order_even_quadratic(m, arf_one);
}

inline Int count_zeros(const ElementaryForm& f) {
  require(f.p() == 2 && f.kind() == FormKind::quadratic, ErrorKind::WrongKind,
          "zero counts are tabulated for p = 2 quadratic forms");
  const Tally& t = f.tally();
  int m = t.u + t.v;
  bool arf_one = t.v % 2 == 1;
  int w = t.w1 + t.w3;
  if (w <= 1) return detail::zeros_even_quadratic(m, arf_one);
  if (t.w1 == 2 || t.w3 == 2) return detail::pow2(2 * m);
  return 2 * detail::zeros_even_quadratic(m, arf_one);
}

inline std::vector<FpMatrix> detail::enumerate_isometries(const ElementaryForm& f, long bound) {
  int p = f.p(), n = f.dim();
  double space = 1;
  for (int k = 0; k < n; ++k) space *= p;
  require(space <= static_cast<double>(bound), ErrorKind::TooLarge,
          "p^dim exceeds the enumeration bound " + std::to_string(bound));
  std::vector<Vec> all;
  for (uint64_t c = 0; c < static_cast<uint64_t>(space); ++c) all.push_back(decode(c, p, n));
  std::vector<FpMatrix> out;
  std::vector<Vec> rows(n);
  std::function<void(int)> rec = [&](int k) {
    if (k == n) {
      out.push_back(FpMatrix::from_rows(p, rows));
      return;
    }
    Vec ek = unit_vec(n, k);
    for (const auto& y : all) {
      bool ok = true;
      for (int l = 0; l < k && ok; ++l) ok = f.b(y, rows[l]) == f.gram(k, l) % p;
      if (!ok) continue;
      if (f.Q(y) != f.Q(ek)) continue;
      rows[k] = y;
      rec(k + 1);
    }
  };
  rec(0);
  return out;
}

inline std::vector<FormIsometry> enumerate_O(const ElementaryForm& f, long bound = 243) {
  std::vector<FormIsometry> out;
  for (auto& m : detail::enumerate_isometries(f, bound)) out.push_back({f, m});
  return out;
}

inline FormIsometry transvection(const ElementaryForm& form, const Vec& v) {
  require(form.p() == 2, ErrorKind::WrongPrime, "transvections are defined at p = 2");
  ElementaryForm bf = form.kind() == FormKind::bilinear ? form : form.bilinear();
  require(static_cast<int>(v.size()) == bf.dim(), ErrorKind::PreconditionViolation, "vector has the wrong length");
  if (bf.b(v, v)) fail(ErrorKind::NotIsotropic, "b(v, v) is nonzero");
  return {bf, detail::rank_one_map(bf, v, 1)};
}

// The vector v with b(v, x) = q(f x) - q(x) for all x.
inline Vec defect(const FpMatrix& f, const ElementaryForm& q) {
  require(q.p() == 2, ErrorKind::WrongPrime, "defect is defined at p = 2");
  require(q.kind() == FormKind::quadratic, ErrorKind::WrongKind, "defect needs the quadratic form");
  int n = q.dim();
  Vec d(n);
  for (int k = 0; k < n; ++k) {
    int diff = mod_p(q.Q(f.row(k)) - q.gram(k, k), 4);
    require(diff % 2 == 0, ErrorKind::PreconditionViolation, "map does not preserve the bilinear form");
    d[k] = diff / 2;
  }
  auto v = solve(q.bilinear_gram(), d);
  require(v.has_value(), ErrorKind::InternalError, "defect system is inconsistent");
  return *v;
}

// x -> x + b(x,z) a - b(x,a) z - q(a) b(x,z) z.
inline FormIsometry eichler(const ElementaryForm& q, const Vec& a, const Vec& z) {
  require(q.p() == 2 && q.kind() == FormKind::quadratic, ErrorKind::WrongKind,
          "Eichler transformations act on p = 2 quadratic forms");
  require(q.b(a, z) == 0, ErrorKind::PreconditionViolation, "b(a, z) must vanish");
  require(q.Q(z) == 0, ErrorKind::PreconditionViolation, "z must satisfy q(z) = 0");
  require(q.Q(a) % 2 == 0, ErrorKind::PreconditionViolation, "q(a) must lie in Z/2");
  int n = q.dim();
  int qa = q.Q(a) / 2;
  FpMatrix m = FpMatrix::identity(2, n);
  for (int k = 0; k < n; ++k) {
    Vec ek = detail::unit_vec(n, k);
    int bz = q.b(ek, z), ba = q.b(ek, a);
    Vec img = ek;
    if (bz) img = vec_add(img, a, 2);
    if (ba) img = vec_add(img, z, 2);
    if (qa && bz) img = vec_add(img, z, 2);
    m.set_row(k, img);
  }
  return {q, m};
}

inline std::vector<FormIsometry> generators_O(const ElementaryForm& f) {
  int p = f.p(), n = f.dim();
  double space = 1;
  for (int k = 0; k < n; ++k) space *= p;
  require(space <= static_cast<double>(1 << 22), ErrorKind::TooLarge, "form too large for generator search");
  auto all = detail::standard_basis(n);
  std::vector<FpMatrix> mats;
  auto transvections = [&](const std::vector<Vec>& vs) {
    for (const auto& v : vs) mats.push_back(detail::rank_one_map(f, v, 1));
  };
  if (p != 2) {
    mats = detail::odd_orthogonal(f, all);
  } else if (f.kind() == FormKind::bilinear) {
    const Tally& t = f.tally();
    if (t.wbar == 0) {
      transvections(detail::symplectic_vectors(f, all));
    } else {
      Vec z = f.characteristic_vector();
      if (t.wbar == 1) {
        transvections(detail::symplectic_vectors(f, detail::orth_in(f, all, {z})));
      } else {
        Vec y = detail::odd_vector(f);
        auto rest = detail::orth_in(f, all, {y, z});
        transvections(detail::symplectic_vectors(f, rest));
        // Kernel of the restriction to z^perp / z.
        std::vector<Vec> frame{y, z};
        frame.insert(frame.end(), rest.begin(), rest.end());
        FpMatrix T = FpMatrix::from_rows(2, frame);
        FpMatrix Tinv = inverse(T);
        for (size_t i = 0; i < rest.size(); ++i) {
          Vec dual;
          for (const auto& x : detail::span_elements(rest, 2, n)) {
            bool ok = true;
            for (size_t j = 0; j < rest.size() && ok; ++j) ok = f.b(x, rest[j]) == (i == j ? 1 : 0);
            if (ok) {
              dual = x;
              break;
            }
          }
          require(!dual.empty(), ErrorKind::InternalError, "alternating complement is degenerate");
          std::vector<Vec> img{vec_add(y, dual, 2), z};
          for (size_t j = 0; j < rest.size(); ++j) img.push_back(i == j ? vec_add(rest[j], z, 2) : rest[j]);
          mats.push_back(Tinv * FpMatrix::from_rows(2, img));
        }
        mats.push_back(detail::rank_one_map(f, z, 1));
      }
    }
  } else {
    const Tally& t = f.tally();
    if (t.w1 + t.w3 == 0) {
      mats = detail::even_orthogonal(f, all);
    } else {
      Vec z = f.characteristic_vector();
      if (f.b(z, z)) {
        mats = detail::even_orthogonal(f, detail::orth_in(f, all, {z}));
      } else {
        Vec y = detail::odd_vector(f);
        if (f.Q(z) == 0) {
          if (f.Q(y) == 3) y = vec_add(y, z, 2);
          auto rest = detail::orth_in(f, all, {y, z});
          mats = detail::even_orthogonal(f, rest);
          for (const auto& a : rest) mats.push_back(eichler(f, a, z).matrix);
        } else {
          auto rest = detail::orth_in(f, all, {y, z});
          for (const auto& s : detail::symplectic_vectors(f, rest)) {
            Vec v = f.Q(s) == 2 ? s : vec_add(s, z, 2);
            mats.push_back(detail::rank_one_map(f, v, 1));
          }
          mats.push_back(detail::rank_one_map(f, z, 1));
        }
      }
    }
  }
  std::vector<FormIsometry> out;
  for (auto& m : mats) {
    require(f.preserves(m), ErrorKind::InternalError, "generator does not preserve the form");
    out.push_back({f, m});
  }
  return out;
}

}  // namespace latdisc
