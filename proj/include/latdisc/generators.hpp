#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "latdisc/elementary_forms.hpp"
#include "latdisc/errors.hpp"
#include "latdisc/f2_solver.hpp"
#include "latdisc/group_engine.hpp"
#include "latdisc/hensel.hpp"
#include "latdisc/jordan.hpp"
#include "latdisc/orders.hpp"
#include "latdisc/padic.hpp"

namespace latdisc {

enum class Provenance { rho_lift, k0, ka_layer, identity };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::rho_lift: return "rho-lift";
    case Provenance::k0: return "K0";
    case Provenance::ka_layer: return "Ka-layer";
    case Provenance::identity: return "identity";
  }
  return "unknown";
}

struct GeneratorRecord {
  ModMatrix matrix;   // reduced mod p^n
  ModMatrix lift;     // n-approximate representative at working precision
  Provenance tag = Provenance::identity;
  int layer = 0;      // a for Ka-layer generators
  int scale = 0;      // Jordan scale for rho-lift generators
};

struct GeneratorSet {
  PadicContext ctx;   // (p, n)
  int n = 1;
  BlockStructure blocks;
  ModMatrix gram;     // Jordan block diagonal at working precision
  std::vector<GeneratorRecord> items;
  Int asserted_order = 1;

  std::vector<ModMatrix> matrices() const {
    std::vector<ModMatrix> out;
    for (const auto& g : items) out.push_back(g.matrix);
    return out;
  }

  size_t count(Provenance tag) const {
    return static_cast<size_t>(std::count_if(items.begin(), items.end(), [&](const auto& g) { return g.tag == tag; }));
  }
};

// Working data: the Jordan Gram matrix G = diag(p^i B_i) at a precision sufficient for level `target`.
struct GeneratorFrame {
  PadicContext ctx;
  BlockStructure s;
  ModMatrix G;
  std::vector<ModMatrix> unit_grams;  // B_i
  std::vector<int> parity;            // t for each block
  long p() const { return ctx.p(); }
};

inline GeneratorFrame make_frame(const JordanDecomposition& J, int target) {
  require(!J.blocks.empty(), ErrorKind::PreconditionViolation, "empty lattice");
  require(J.min_scale() >= 0, ErrorKind::PreconditionViolation, "lattice must be integral");
  PadicContext W(J.p(), std::max(target, 2) + J.max_scale() + 4);
  GeneratorFrame f{W, J.structure(), ModMatrix(W, J.rank(), J.rank()), {}, {}};
  for (int b = 0; b < f.s.count(); ++b) {
    ModMatrix B = J.blocks[b].gram.with_precision(W);
    f.unit_grams.push_back(B);
    f.parity.push_back(J.blocks[b].odd ? 1 : 0);
    f.G.set_block(f.s.offsets[b], f.s.offsets[b], B.scaled(W.power(f.s.scales[b])));
  }
  return f;
}

namespace detail {

inline int block_with_scale(const BlockStructure& s, int scale) {
  for (int b = 0; b < s.count(); ++b)
    if (s.scales[b] == scale) return b;
  return -1;
}

// Vectors mod 2 of length m ordered by weight, capped.
inline std::vector<std::vector<int>> vectors_by_weight(int m, size_t cap = 4096) {
  std::vector<std::vector<int>> out;
  for (int w = 1; w <= m && out.size() < cap; ++w) {
    std::vector<int> sel(m, 0);
    std::fill(sel.end() - w, sel.end(), 1);
    do {
      out.push_back(sel);
      if (out.size() >= cap) break;
    } while (std::next_permutation(sel.begin(), sel.end()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int wa = std::count(a.begin(), a.end(), 1), wb = std::count(b.begin(), b.end(), 1);
    if (wa != wb) return wa < wb;
    return a > b;
  });
  return out;
}

inline ModMatrix row_vector(const PadicContext& ctx, const std::vector<int>& v) {
  ModMatrix m(ctx, 1, static_cast<int>(v.size()));
  for (size_t k = 0; k < v.size(); ++k) m.set(0, static_cast<int>(k), v[k]);
  return m;
}

// Correction of a block-diagonal lift at a bound constituent, searching the neighbour vector v.
inline bool correct_bound_block(const GeneratorFrame& f, ModMatrix& F, int bi) {
  const auto& W = f.ctx;
  const auto& s = f.s;
  int sc = s.scales[bi], ri = s.ranks[bi];
  ModMatrix A = F * f.G * F.transpose() - f.G;
  ModMatrix h(W, 1, ri);
  for (int k = 0; k < ri; ++k) {
    int idx = s.offsets[bi] + k;
    Int q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), A(idx, idx).get_mpz_t(), static_cast<mp_bitcnt_t>(sc + 1));
    h.set(0, k, Int(static_cast<unsigned long>(mpz_fdiv_ui(q.get_mpz_t(), 2))));
  }
  ModMatrix Fii = block_of(F, s, bi, bi);
  ModMatrix inv = unit_inverse(f.unit_grams[bi] * Fii.transpose());
  for (int side : {-1, +1}) {
    int nb = block_with_scale(s, sc + side);
    if (nb < 0 || !f.parity[nb]) continue;
    const ModMatrix& Bn = f.unit_grams[nb];
    for (const auto& vv : vectors_by_weight(s.ranks[nb])) {
      ModMatrix v = row_vector(W, vv);
      if (valuation((v * Bn * v.transpose())(0, 0), W) != 0) continue;
      ModMatrix Fc = F;
      ModMatrix hv = h.transpose() * v;  // r_i x r_nb
      if (side < 0) {
        ModMatrix low = hv.scaled(2);
        ModMatrix up = (Bn * v.transpose() * h * inv).scaled(-1);
        Fc.set_block(s.offsets[bi], s.offsets[nb], low);
        Fc.set_block(s.offsets[nb], s.offsets[bi], up);
      } else {
        ModMatrix up = hv;
        ModMatrix low = (Bn * v.transpose() * h * inv).scaled(-2);
        Fc.set_block(s.offsets[bi], s.offsets[nb], up);
        Fc.set_block(s.offsets[nb], s.offsets[bi], low);
      }
      if (approximation_level(Fc, f.G, f.G, s) >= 1) {
        F = Fc;
        return true;
      }
    }
  }
  return false;
}

// Lower blocks of a matrix with identity diagonal blocks and prescribed upper blocks, so that
// the off-diagonal congruences of level 1 hold.
inline ModMatrix complete_lower_blocks(const GeneratorFrame& f, ModMatrix F) {
  const auto& s = f.s;
  int nb = s.count();
  for (int j = 1; j < nb; ++j) {
    std::vector<ModMatrix> X(nb, ModMatrix(f.ctx, 0, 0));
    for (int i = j - 1; i >= 0; --i) {
      ModMatrix acc = block_of(F, s, i, j) * f.unit_grams[j];
      for (int m = i + 1; m < j; ++m) acc = acc + block_of(F, s, i, m) * f.unit_grams[m] * X[m].transpose();
      X[i] = (unit_inverse(f.unit_grams[i]) * acc).scaled(-1).transpose();
      F.set_block(s.offsets[j], s.offsets[i], X[i].scaled(f.ctx.power(s.scales[j] - s.scales[i])));
    }
  }
  return F;
}

struct UpperPosition {
  int row, col;
  int distance;
};

inline std::vector<UpperPosition> upper_positions(const BlockStructure& s) {
  std::vector<UpperPosition> out;
  for (int bi = 0; bi < s.count(); ++bi)
    for (int bj = bi + 1; bj < s.count(); ++bj)
      for (int k = 0; k < s.ranks[bi]; ++k)
        for (int l = 0; l < s.ranks[bj]; ++l)
          out.push_back({s.offsets[bi] + k, s.offsets[bj] + l, bj - bi});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
  return out;
}

inline void require_level_at_least(const GeneratorFrame& f, const ModMatrix& F, int level, const char* what) {
  int got = approximation_level(F, f.G, f.G, f.s);
  require(got >= level, ErrorKind::InternalError,
          std::string(what) + " is only " + std::to_string(got) + "-approximate, expected " + std::to_string(level));
}

}  // namespace detail

// One matrix per generator of each O(rho_i), extended by the identity and corrected at bound constituents.
inline std::vector<ModMatrix> rho_level_generators(const GeneratorFrame& f, const JordanDecomposition& J,
                                                   std::vector<int>* scales_out = nullptr) {
  std::vector<ModMatrix> out;
  const auto& s = f.s;
  for (int bi = 0; bi < s.count(); ++bi) {
    int sc = s.scales[bi];
    for (const auto& g : generators_O(rho(J, sc))) {
      ModMatrix F = ModMatrix::identity(f.ctx, s.dim());
      for (int k = 0; k < s.ranks[bi]; ++k)
        for (int l = 0; l < s.ranks[bi]; ++l) F.set(s.offsets[bi] + k, s.offsets[bi] + l, g.matrix(k, l));
      if (approximation_level(F, f.G, f.G, s) < 1) {
        bool ok = f.p() == 2 && detail::correct_bound_block(f, F, bi);
        require(ok, ErrorKind::InternalError, "no 1-approximate lift of a generator of rho_" + std::to_string(sc));
      }
      out.push_back(F);
      if (scales_out) scales_out->push_back(sc);
    }
  }
  return out;
}

inline std::vector<ModMatrix> rho_level_generators(const JordanDecomposition& J) {
  return rho_level_generators(make_frame(J, 1), J);
}

inline constexpr int kMaxK0Enumeration = 20;

inline std::vector<ModMatrix> k0_k1_generators(const GeneratorFrame& f) {
  const auto& s = f.s;
  int r = s.dim();
  auto pos = detail::upper_positions(s);
  std::vector<ModMatrix> out;
  auto build = [&](const std::vector<int>& bits) {
    ModMatrix F = ModMatrix::identity(f.ctx, r);
    for (size_t t = 0; t < pos.size(); ++t)
      if (bits[t]) F.set(pos[t].row, pos[t].col, 1);
    return detail::complete_lower_blocks(f, F);
  };
  if (f.p() != 2) {
    for (size_t t = 0; t < pos.size(); ++t) {
      std::vector<int> bits(pos.size(), 0);
      bits[t] = 1;
      ModMatrix F = build(bits);
      detail::require_level_at_least(f, F, 1, "K0 generator");
      out.push_back(F);
    }
    return out;
  }
  int d = static_cast<int>(pos.size());
  require(d <= kMaxK0Enumeration, ErrorKind::TooLarge,
          "K0/K1 search space 2^" + std::to_string(d) + " exceeds 2^" + std::to_string(kMaxK0Enumeration));
  // The admissible bit patterns form a group; keep a generating subset in order of weight.
  std::vector<uint64_t> moduli(r, 2);
  std::unordered_set<GroupElement, GroupElementHash> span;
  std::vector<GroupElement> chosen;
  FiniteMatrixGroup trivial(moduli, {});
  span.insert(trivial.identity());
  for (const auto& bits : detail::vectors_by_weight(d, size_t(1) << kMaxK0Enumeration)) {
    ModMatrix F = build(bits);
    if (approximation_level(F, f.G, f.G, s) < 1) continue;
    GroupElement e = to_group_element(F, moduli);
    if (span.count(e)) continue;
    chosen.push_back(e);
    out.push_back(F);
    FiniteMatrixGroup grp(moduli, chosen);
    auto elems = grp.elements();
    span = std::unordered_set<GroupElement, GroupElementHash>(elems.begin(), elems.end());
  }
  return out;
}

inline std::vector<ModMatrix> k0_k1_generators(const JordanDecomposition& J) { return k0_k1_generators(make_frame(J, 1)); }

// Generators I + p^a X of K_a / K_2a, each 2a-approximate (up to the frame's cap).
inline std::vector<ModMatrix> ka_layer_generators(const GeneratorFrame& f, int a) {
  require(a >= 1, ErrorKind::PreconditionViolation, "layer index must be at least 1");
  const auto& W = f.ctx;
  const auto& s = f.s;
  int r = s.dim();
  long p = f.p();
  const Int& pa = W.power(a);
  std::vector<ModMatrix> out;
  int want = std::min(2 * a, level_cap(W, s));
  auto emit = [&](const ModMatrix& X) {
    ModMatrix F = ModMatrix::identity(W, r) + X.scaled(pa);
    detail::require_level_at_least(f, F, want, "layer generator");
    out.push_back(F);
  };
  for (const auto& up : detail::upper_positions(s)) {
    int bi = s.block_of(up.row), bj = s.block_of(up.col);
    ModMatrix E(W, s.ranks[bi], s.ranks[bj]);
    E.set(up.row - s.offsets[bi], up.col - s.offsets[bj], 1);
    ModMatrix Y = (f.unit_grams[bj] * E.transpose() * unit_inverse(f.unit_grams[bi])).scaled(-1);
    ModMatrix X(W, r, r);
    X.set(up.row, up.col, 1);
    X.set_block(s.offsets[bj], s.offsets[bi], Y.scaled(W.power(s.scales[bj] - s.scales[bi])));
    emit(X);
  }
  for (int bi = 0; bi < s.count(); ++bi) {
    int ri = s.ranks[bi];
    const ModMatrix& B = f.unit_grams[bi];
    ModMatrix Binv = unit_inverse(B);
    auto place = [&](const ModMatrix& Xi) {
      ModMatrix X(W, r, r);
      X.set_block(s.offsets[bi], s.offsets[bi], Xi);
      emit(X);
    };
    if (p == 2 && a == 1) {
      SymSystem sys;
      sys.r = ri;
      sys.M = FpMatrix(2, ri, ri);
      sys.b.assign(ri, 0);
      sys.z.assign(ri, 0);
      for (int k = 0; k < ri; ++k) sys.z[k] = static_cast<int>(mpz_fdiv_ui(Binv(k, k).get_mpz_t(), 2));
      for (const auto& K : solve(sys).kernel) {
        ModMatrix Km(W, ri, ri);
        for (int k = 0; k < ri; ++k)
          for (int l = 0; l < ri; ++l) Km.set(k, l, K(k, l));
        place(Km * Binv);
      }
      continue;
    }
    for (int k = 0; k < ri; ++k)
      for (int l = k + 1; l < ri; ++l) {
        ModMatrix H(W, ri, ri);
        H.set(k, l, 1);
        H.set(l, k, -1);
        if (p == 2) {
          // Diagonal shift keeping the diagonal congruence mod 2^(2a+i+1).
          ModMatrix HBH = H * Binv * H.transpose();
          for (int m = 0; m < ri; ++m) {
            Int shift = -HBH(m, m) * W.power(a - 1);
            H.set(m, m, H(m, m) + shift);
          }
        }
        place(H * Binv);
      }
  }
  return out;
}

inline std::vector<ModMatrix> ka_layer_generators(const JordanDecomposition& J, int a) {
  return ka_layer_generators(make_frame(J, 2 * a), a);
}

inline std::vector<int> layer_schedule(int n) {
  std::vector<int> out;
  for (int a = 1; a < n; a *= 2) out.push_back(a);
  return out;
}

inline GeneratorSet generators_mod_pn(const JordanDecomposition& J, int n) {
  require(n >= 1, ErrorKind::PreconditionViolation, "n must be at least 1");
  GeneratorFrame f = make_frame(J, std::max(n, 2));
  GeneratorSet out{PadicContext(J.p(), n), n, f.s, f.G, {}, order_mod_pn(J, n).total};
  auto push = [&](const ModMatrix& F, int level, Provenance tag, int layer, int scale) {
    ModMatrix lifted = hensel_qf(F, f.G, f.G, f.s, std::min(level, n), n);
    out.items.push_back({lifted.reduced_mod(n), lifted, tag, layer, scale});
  };
  std::vector<int> scales;
  auto rho_gens = rho_level_generators(f, J, &scales);
  for (size_t k = 0; k < rho_gens.size(); ++k) push(rho_gens[k], 1, Provenance::rho_lift, 0, scales[k]);
  for (const auto& F : k0_k1_generators(f)) push(F, 1, Provenance::k0, 0, 0);
  for (int a : layer_schedule(n))
    for (const auto& F : ka_layer_generators(f, a)) push(F, 2 * a, Provenance::ka_layer, a, 0);
  if (out.items.empty()) {
    ModMatrix I = ModMatrix::identity(f.ctx, f.s.dim());
    out.items.push_back({I.reduced_mod(n), I, Provenance::identity, 0, 0});
  }
  return out;
}

// Discriminant group L^# = prod (Z/p^i)^(r_i) over the scales i >= 1, in the basis dual to the Jordan basis.
struct DiscriminantGroup {
  long p = 2;
  std::vector<int> exponents;       // i for each coordinate
  std::vector<uint64_t> moduli;     // p^i
  std::vector<std::vector<mpq_class>> bilinear;  // b^#(e_k, e_l) mod Z
  std::vector<mpq_class> quadratic;              // q^#(e_k) mod Z when the lattice is even; empty otherwise
  std::vector<GroupElement> images; // generator actions, identities dropped
  Int asserted_order = 1;
  DiscForm form = DiscForm::bilinear;

  Int group_size() const {
    Int t = 1;
    for (uint64_t m : moduli) t *= static_cast<unsigned long>(m);
    return t;
  }

  Int closure_order(uint64_t budget = kDefaultGroupBudget) const {
    if (moduli.empty()) return 1;
    return FiniteMatrixGroup(moduli, images).order_by_stabilizer_chain(budget);
  }
};

inline mpq_class mod_one(mpq_class x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  x -= fl;
  x.canonicalize();
  return x;
}

// Action of F on L^#: the matrix F^T read with column moduli p^i, on coordinates of scale >= 1.
inline GroupElement discriminant_action(const ModMatrix& F, const BlockStructure& s, std::vector<uint64_t>* moduli_out = nullptr) {
  require(F.ctx().N() >= s.max_scale(), ErrorKind::InsufficientLevel,
          "the discriminant action needs F modulo p^" + std::to_string(s.max_scale()));
  std::vector<int> coords;
  std::vector<uint64_t> moduli;
  for (int k = 0; k < s.dim(); ++k)
    if (s.scale_of(k) >= 1) {
      coords.push_back(k);
      moduli.push_back(ipow(F.ctx().p(), s.scale_of(k)).get_ui());
    }
  int m = static_cast<int>(coords.size());
  GroupElement e(m * m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) e[i * m + l] = mpz_fdiv_ui(F(coords[l], coords[i]).get_mpz_t(), moduli[l]);
  if (moduli_out) *moduli_out = moduli;
  return e;
}

inline GroupElement discriminant_action(const ModMatrix& F, const JordanDecomposition& J) {
  return discriminant_action(F, J.structure());
}

inline DiscriminantGroup discriminant_form_data(const JordanDecomposition& J) {
  DiscriminantGroup d;
  d.p = J.p();
  std::vector<int> coords;
  auto s = J.structure();
  for (int b = 0; b < s.count(); ++b) {
    if (s.scales[b] < 1) continue;
    Int den = ipow(d.p, s.scales[b]);
    for (int k = 0; k < s.ranks[b]; ++k) {
      d.exponents.push_back(s.scales[b]);
      d.moduli.push_back(den.get_ui());
      coords.push_back(s.offsets[b] + k);
    }
  }
  int m = static_cast<int>(coords.size());
  d.bilinear.assign(m, std::vector<mpq_class>(m, 0));
  bool even = J.p() != 2 || J.parity(0) == 0;
  for (int b = 0; b < s.count(); ++b) {
    if (s.scales[b] < 1) continue;
    ModMatrix Binv = unit_inverse(J.blocks[b].gram);
    Int den = ipow(d.p, s.scales[b]);
    for (int k = 0; k < s.ranks[b]; ++k)
      for (int l = 0; l < s.ranks[b]; ++l) {
        int gk = static_cast<int>(std::find(coords.begin(), coords.end(), s.offsets[b] + k) - coords.begin());
        int gl = static_cast<int>(std::find(coords.begin(), coords.end(), s.offsets[b] + l) - coords.begin());
        d.bilinear[gk][gl] = mod_one(mpq_class(Binv(k, l), den));
      }
  }
  if (even)
    for (int b = 0; b < s.count(); ++b) {
      if (s.scales[b] < 1) continue;
      ModMatrix Binv = unit_inverse(J.blocks[b].gram);
      Int den = ipow(d.p, s.scales[b]) * (J.p() == 2 ? 2 : 1);
      for (int k = 0; k < s.ranks[b]; ++k) {
        Int num = Binv(k, k);
        if (J.p() != 2) num *= unit_inverse(Int(2), J.ctx);
        d.quadratic.push_back(mod_one(mpq_class(num, den)));
      }
    }
  return d;
}

inline DiscriminantGroup generators_discriminant(const JordanDecomposition& J, DiscForm form = DiscForm::bilinear) {
  require(J.blocks.empty() || J.min_scale() >= 0, ErrorKind::PreconditionViolation, "lattice must be integral");
  if (J.p() == 2 && J.parity(0) == 1)
    require(form == DiscForm::bilinear, ErrorKind::WrongKind, "odd lattices carry only a discriminant bilinear form");
  bool augment = J.p() == 2 && form == DiscForm::bilinear && J.parity(0) == 0 && J.max_scale() > 0;
  JordanDecomposition K = augment ? with_odd_unimodular_summand(J) : J;
  DiscriminantGroup d = discriminant_form_data(K);
  d.form = form;
  d.asserted_order = order_discriminant_p(J, form);
  if (d.moduli.empty()) return d;
  GeneratorSet gens = generators_mod_pn(K, std::max(K.max_scale(), 1));
  FiniteMatrixGroup probe(d.moduli, {});
  GroupElement id = probe.identity();
  for (const auto& g : gens.items) {
    GroupElement e = discriminant_action(g.matrix, gens.blocks);
    if (e != id && std::find(d.images.begin(), d.images.end(), e) == d.images.end()) d.images.push_back(e);
  }
  return d;
}

struct DiscriminantGroupZ {
  std::map<long, DiscriminantGroup> primes;
  Int asserted_order = 1;
};

inline DiscriminantGroupZ generators_discriminant_Z(const std::vector<std::vector<Int>>& gram,
                                                   DiscForm form = DiscForm::bilinear) {
  auto orders = order_discriminant_Z(gram, form);
  DiscriminantGroupZ out;
  out.asserted_order = orders.total;
  for (const auto& [p, o] : orders.primes) out.primes[p] = generators_discriminant(decompose_integral(gram, p), form);
  return out;
}

}  // namespace latdisc
