#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "latdisc/errors.hpp"
#include "latdisc/generators.hpp"
#include "latdisc/group_engine.hpp"
#include "latdisc/hensel.hpp"
#include "latdisc/jordan.hpp"
#include "latdisc/orders.hpp"
#include "latdisc/padic.hpp"

namespace latdisc::cli {

using json = nlohmann::json;
using IntRows = std::vector<std::vector<Int>>;

inline Int parse_int(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Int(std::to_string(v.get<long long>()));
  if (v.is_string()) {
    Int x;
    if (x.set_str(v.get<std::string>(), 10) != 0) fail(ErrorKind::Usage, what + " is not a decimal integer");
    return x;
  }
  fail(ErrorKind::Usage, what + " must be an integer or a decimal string");
}

inline IntRows parse_matrix(const json& rows, const std::string& what) {
  if (!rows.is_array()) fail(ErrorKind::Usage, what + " must be an array of rows");
  IntRows out;
  for (const auto& row : rows) {
    if (!row.is_array()) fail(ErrorKind::Usage, what + " rows must be arrays");
    std::vector<Int> r;
    for (const auto& x : row) r.push_back(parse_int(x, what + " entry"));
    out.push_back(std::move(r));
  }
  if (out.empty()) fail(ErrorKind::Usage, what + " has rank 0");
  for (const auto& r : out)
    if (r.size() != out.size()) fail(ErrorKind::Usage, what + " is not square");
  return out;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Usage, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Usage, "invalid JSON in " + path + ": " + e.what());
  }
}

struct GramInput {
  std::optional<long> p;
  std::optional<int> prec;
  IntRows rows;
};

inline GramInput read_gram(const std::string& path) {
  json j = load_json(path);
  if (!j.is_object() || !j.contains("rows")) fail(ErrorKind::Usage, "input must be an object with \"rows\"");
  GramInput g;
  if (j.contains("p")) g.p = j["p"].get<long>();
  if (j.contains("prec")) g.prec = j["prec"].get<int>();
  g.rows = parse_matrix(j["rows"], "Gram matrix");
  for (size_t i = 0; i < g.rows.size(); ++i)
    for (size_t k = 0; k < i; ++k)
      require(g.rows[i][k] == g.rows[k][i], ErrorKind::PreconditionViolation, "Gram matrix is not symmetric");
  return g;
}

inline json big(const Int& x) { return x.get_str(); }

inline json rows_json(const IntRows& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row = json::array();
    for (const auto& x : r) row.push_back(big(x));
    out.push_back(row);
  }
  return out;
}

inline json matrix_json(const ModMatrix& m) { return rows_json(m.to_rows()); }

inline json element_json(const GroupElement& e, size_t r) {
  json out = json::array();
  for (size_t i = 0; i < r; ++i) {
    json row = json::array();
    for (size_t l = 0; l < r; ++l) row.push_back(std::to_string(e[i * r + l]));
    out.push_back(row);
  }
  return out;
}

struct Options {
  std::string gram;
  std::string input;
  long p = 0;
  int n = 1;
  int prec = 0;
  std::string form = "bilinear";
  bool verify = false;
};

inline long resolve_prime(const Options& o, const GramInput& g) {
  long p = o.p ? o.p : g.p.value_or(0);
  if (p == 0) fail(ErrorKind::Usage, "this command needs a prime (--p or \"p\" in the input)");
  require(p >= 2 && is_small_prime(p), ErrorKind::Usage, std::to_string(p) + " is not a prime");
  return p;
}

// Decomposition at the requested or computed precision; the default covers n + max scale + 3.
inline JordanDecomposition decompose_input(const Options& o, const GramInput& g, long p, int n) {
  int prec = o.prec ? o.prec : g.prec.value_or(0);
  if (prec == 0) return decompose_integral(g.rows, p, n + 3);
  JordanDecomposition J = jordan_decompose(ModMatrix::from_rows(PadicContext(p, prec), g.rows));
  int floor = n + J.max_scale() + 3;
  require(prec >= floor, ErrorKind::InsufficientPrecision,
          "precision " + std::to_string(prec) + " is below n + max scale + 3 = " + std::to_string(floor));
  return J;
}

inline DiscForm parse_form(const std::string& s) {
  if (s == "bilinear") return DiscForm::bilinear;
  if (s == "quadratic" || s == "natural") return DiscForm::quadratic;
  fail(ErrorKind::Usage, "unknown form " + s);
}

inline json cmd_jordan(const Options& o) {
  GramInput g = read_gram(o.gram);
  long p = resolve_prime(o, g);
  JordanDecomposition J = decompose_input(o, g, p, 0);
  json blocks = json::array();
  for (const auto& b : J.blocks) {
    json jb{{"scale", b.scale}, {"rank", b.rank}, {"gram", matrix_json(b.gram)}, {"free", is_free(J, b.scale)}};
    if (p == 2) {
      jb["parity"] = b.odd ? "odd" : "even";
      jb["oddity"] = b.oddity;
    } else {
      jb["det_is_square"] = b.det_is_square;
    }
    blocks.push_back(jb);
  }
  return {{"p", p}, {"prec", J.ctx.N()}, {"blocks", blocks}, {"base_change", matrix_json(J.base_change)}};
}

inline json breakdown_json(const OrderBreakdown& b) {
  json factors = json::array();
  for (const auto& f : b.factors)
    factors.push_back({{"scale", f.scale},
                       {"rank", f.rank},
                       {"t", f.parity},
                       {"s", f.s},
                       {"free", f.free},
                       {"form_order", big(f.form_order)},
                       {"exponent", f.exponent}});
  return {{"v", b.v_exponent}, {"factors", factors}};
}

inline json cmd_order(const Options& o) {
  GramInput g = read_gram(o.gram);
  long p = resolve_prime(o, g);
  JordanDecomposition J = decompose_input(o, g, p, o.n);
  OrderBreakdown b = order_mod_pn(J, o.n);
  return {{"p", p}, {"n", o.n}, {"order", big(b.total)}, {"breakdown", breakdown_json(b)}};
}

inline json cmd_disc_order(const Options& o) {
  GramInput g = read_gram(o.gram);
  DiscForm form = parse_form(o.form);
  if (o.p || g.p) {
    long p = resolve_prime(o, g);
    JordanDecomposition J = decompose_input(o, g, p, 0);
    return {{"p", p}, {"form", disc_form_name(form)}, {"order", big(order_discriminant_p(J, form))}};
  }
  DiscriminantOrder d = order_discriminant_Z(g.rows, form);
  json primes = json::object();
  for (const auto& [p, v] : d.primes) primes[std::to_string(p)] = big(v);
  return {{"form", disc_form_name(form)}, {"order", big(d.total)}, {"primes", primes}};
}

inline json cmd_gens(const Options& o, bool& ok) {
  GramInput g = read_gram(o.gram);
  long p = resolve_prime(o, g);
  JordanDecomposition J = decompose_input(o, g, p, o.n);
  GeneratorSet gs = generators_mod_pn(J, o.n);
  json list = json::array();
  for (const auto& it : gs.items) {
    json e{{"matrix", matrix_json(it.matrix)}, {"provenance", provenance_name(it.tag)}};
    if (it.tag == Provenance::ka_layer) e["layer"] = it.layer;
    if (it.tag == Provenance::rho_lift) e["scale"] = it.scale;
    list.push_back(e);
  }
  json out{{"p", p},
           {"n", o.n},
           {"asserted_order", big(gs.asserted_order)},
           {"generators", list},
           {"jordan_gram", matrix_json(J.block_diagonal())},
           {"base_change", matrix_json(J.base_change)}};
  if (o.verify) {
    Int c = closure_order(gs.matrices(), p, o.n, J.rank());
    ok = c == gs.asserted_order;
    out["closure_order"] = big(c);
    out["verified"] = ok;
  }
  return out;
}

inline json disc_group_json(const DiscriminantGroup& d, bool verify, bool& ok) {
  json bil = json::array();
  for (const auto& row : d.bilinear) {
    json r = json::array();
    for (const auto& x : row) r.push_back(x.get_str());
    bil.push_back(r);
  }
  json moduli = json::array();
  for (auto m : d.moduli) moduli.push_back(std::to_string(m));
  json images = json::array();
  for (const auto& e : d.images) images.push_back(element_json(e, d.moduli.size()));
  json out{{"moduli", moduli}, {"bilinear", bil}, {"generators", images}, {"asserted_order", big(d.asserted_order)},
           {"form", disc_form_name(d.form)}};
  if (!d.quadratic.empty()) {
    json q = json::array();
    for (const auto& x : d.quadratic) q.push_back(x.get_str());
    out["quadratic"] = q;
  }
  if (verify) {
    Int c = d.closure_order();
    bool good = c == d.asserted_order;
    ok = ok && good;
    out["closure_order"] = big(c);
    out["verified"] = good;
  }
  return out;
}

inline json cmd_disc_gens(const Options& o, bool& ok) {
  GramInput g = read_gram(o.gram);
  DiscForm form = parse_form(o.form);
  ok = true;
  if (o.p || g.p) {
    long p = resolve_prime(o, g);
    JordanDecomposition J = decompose_input(o, g, p, 0);
    json out = disc_group_json(generators_discriminant(J, form), o.verify, ok);
    out["p"] = p;
    return out;
  }
  DiscriminantGroupZ z = generators_discriminant_Z(g.rows, form);
  json primes = json::object();
  Int closure = 1;
  for (const auto& [p, d] : z.primes) {
    primes[std::to_string(p)] = disc_group_json(d, o.verify, ok);
    if (o.verify) closure *= d.closure_order();
  }
  json out{{"order", big(z.asserted_order)}, {"primes", primes}, {"form", disc_form_name(form)}};
  if (o.verify) {
    out["closure_order"] = big(closure);
    out["verified"] = ok && closure == z.asserted_order;
  }
  return out;
}

// Scales of a block-diagonal Jordan Gram matrix read off its rows.
inline BlockStructure structure_of_jordan_gram(const ModMatrix& G) {
  const auto& ctx = G.ctx();
  int r = G.rows();
  std::vector<int> row_scale(r);
  for (int i = 0; i < r; ++i) {
    int v = kInfiniteValuation;
    for (int j = 0; j < r; ++j) v = std::min(v, valuation(G(i, j), ctx));
    require(v != kInfiniteValuation, ErrorKind::SingularGram, "zero row in G");
    row_scale[i] = v;
  }
  std::vector<int> scales, ranks;
  for (int i = 0; i < r; ++i) {
    if (scales.empty() || scales.back() != row_scale[i]) {
      require(scales.empty() || row_scale[i] > scales.back(), ErrorKind::PreconditionViolation,
              "G must list its Jordan blocks by increasing scale");
      scales.push_back(row_scale[i]);
      ranks.push_back(0);
    }
    ++ranks.back();
  }
  BlockStructure s(scales, ranks);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      require(s.block_of(i) == s.block_of(j) || G(i, j) == 0, ErrorKind::PreconditionViolation,
              "G is not block diagonal");
  for (int b = 0; b < s.count(); ++b) {
    ModMatrix blk = divide_exact(block_of(G, s, b, b), s.scales[b]);
    require(valuation(integer_determinant(blk.to_rows()), blk.ctx()) == 0, ErrorKind::PreconditionViolation,
            "block at scale " + std::to_string(s.scales[b]) + " is not modular");
  }
  return s;
}

inline json cmd_lift(const Options& o) {
  json j = load_json(o.input);
  for (const char* key : {"p", "prec", "F", "G", "Z", "a", "b"})
    if (!j.contains(key)) fail(ErrorKind::Usage, std::string("lift input needs \"") + key + "\"");
  long p = j["p"].get<long>();
  require(p >= 2 && is_small_prime(p), ErrorKind::Usage, std::to_string(p) + " is not a prime");
  PadicContext ctx(p, o.prec ? o.prec : j["prec"].get<int>());
  ModMatrix F = ModMatrix::from_rows(ctx, parse_matrix(j["F"], "F"));
  ModMatrix G = ModMatrix::from_rows(ctx, parse_matrix(j["G"], "G"));
  ModMatrix Z = ModMatrix::from_rows(ctx, parse_matrix(j["Z"], "Z"));
  require(F.rows() == G.rows() && Z.rows() == G.rows(), ErrorKind::Usage, "F, G and Z must have equal size");
  int a = j["a"].get<int>(), b = j["b"].get<int>();
  BlockStructure s = structure_of_jordan_gram(G);
  int before = approximation_level(F, G, Z, s);
  ModMatrix out = hensel_qf(F, G, Z, s, a, b);
  return {{"F", matrix_json(out)},
          {"scales", s.scales},
          {"ranks", s.ranks},
          {"level_before", before},
          {"level_after", approximation_level(out, G, Z, s)},
          {"level_cap", level_cap(ctx, s)},
          {"pattern_ok", satisfies_lift_pattern(out, F, s, a)}};
}

inline json cmd_mass(const Options& o, bool n_given) {
  GramInput g = read_gram(o.gram);
  long p = resolve_prime(o, g);
  JordanDecomposition probe = decompose_input(o, g, p, 0);
  int n = n_given ? o.n : n_stable(probe);
  JordanDecomposition J = decompose_input(o, g, p, n);
  PMass m = p_mass(J, n);
  return {{"p", p},
          {"n", n},
          {"n_stable", n_stable(J)},
          {"watson_count", big(watson_count(J, n))},
          {"mass", m.rational.get_str()},
          {"times_sqrt_p", m.times_sqrt_p}};
}

inline json cmd_verify(const Options& o, bool& ok) {
  GramInput g = read_gram(o.gram);
  long p = resolve_prime(o, g);
  JordanDecomposition J = decompose_input(o, g, p, o.n);
  Int formula = order_mod_pn(J, o.n).total;
  GeneratorSet gs = generators_mod_pn(J, o.n);
  Int closure = closure_order(gs.matrices(), p, o.n, J.rank());
  json out{{"p", p}, {"n", o.n}, {"order_formula", big(formula)}, {"closure_order", big(closure)}};
  ok = closure == formula;
  try {
    Int count = enumerate_isometries_mod(J, o.n).count;
    out["enumeration_count"] = big(count);
    ok = ok && count == formula;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooLarge) throw;
    out["enumeration_count"] = nullptr;
  }
  if (J.min_scale() >= 0) {
    DiscriminantGroup d = generators_discriminant(J);
    Int dc = d.closure_order();
    out["disc_order_formula"] = big(d.asserted_order);
    out["disc_closure_order"] = big(dc);
    ok = ok && dc == d.asserted_order;
  }
  out["verified"] = ok;
  return out;
}

inline json error_json(const std::string& kind, const std::string& detail) {
  return {{"error", {{"kind", kind}, {"detail", detail}}}};
}

// Runs one command; returns the process exit code (0 success, 1 domain error or failed check, 2 usage error).
inline int run_cli(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"latdisc: orthogonal groups of lattices mod p^n and of discriminant forms"};
  app.require_subcommand(1);
  Options o;
  bool n_given = false;
  auto add_gram = [&](CLI::App* c) { c->add_option("--gram", o.gram, "JSON file {\"p\", \"prec\", \"rows\"}")->required(); };
  auto add_p = [&](CLI::App* c) { c->add_option("--p", o.p, "prime"); };
  auto add_prec = [&](CLI::App* c) { c->add_option("--prec", o.prec, "working precision exponent"); };
  auto add_n = [&](CLI::App* c) {
    c->add_option_function<int>("--n", [&](const int& v) { o.n = v; n_given = true; }, "modulus exponent n")
        ->check(CLI::PositiveNumber);
  };
  auto* jordan = app.add_subcommand("jordan", "Jordan decomposition");
  add_gram(jordan); add_p(jordan); add_prec(jordan);
  auto* order = app.add_subcommand("order", "#O(L/p^nL)");
  add_gram(order); add_p(order); add_prec(order); add_n(order);
  auto* disc = app.add_subcommand("disc-order", "#O(L^#)");
  add_gram(disc); add_p(disc); add_prec(disc);
  disc->add_option("--form", o.form, "bilinear or quadratic")->check(CLI::IsMember({"bilinear", "quadratic", "natural"}));
  auto* gens = app.add_subcommand("gens", "generators of O(L/p^nL)");
  add_gram(gens); add_p(gens); add_prec(gens); add_n(gens);
  gens->add_flag("--verify", o.verify, "compare the closure with the formula");
  auto* dgens = app.add_subcommand("disc-gens", "generators of O(L^#)");
  add_gram(dgens); add_p(dgens); add_prec(dgens);
  dgens->add_option("--form", o.form, "bilinear or quadratic")->check(CLI::IsMember({"bilinear", "quadratic", "natural"}));
  dgens->add_flag("--verify", o.verify, "compare the closure with the formula");
  auto* lift = app.add_subcommand("lift", "Hensel lifting of an approximate triple");
  lift->add_option("--input", o.input, "JSON file {\"p\", \"prec\", \"F\", \"G\", \"Z\", \"a\", \"b\"}")->required();
  add_prec(lift);
  auto* mass = app.add_subcommand("mass", "p-mass");
  add_gram(mass); add_p(mass); add_prec(mass); add_n(mass);
  auto* verify = app.add_subcommand("verify", "formula, closure and enumeration cross-check");
  add_gram(verify); add_p(verify); add_prec(verify); add_n(verify);

  std::vector<std::string> args;
  for (int k = argc - 1; k >= 1; --k) args.emplace_back(argv[k]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << error_json("Usage", e.what()).dump(2) << "\n";
    return 2;
  }
  try {
    bool ok = true;
    json result;
    if (*jordan) result = cmd_jordan(o);
    else if (*order) result = cmd_order(o);
    else if (*disc) result = cmd_disc_order(o);
    else if (*gens) result = cmd_gens(o, ok);
    else if (*dgens) result = cmd_disc_gens(o, ok);
    else if (*lift) result = cmd_lift(o);
    else if (*mass) result = cmd_mass(o, n_given);
    else result = cmd_verify(o, ok);
    out << result.dump(2) << "\n";
    return ok ? 0 : 1;
  } catch (const Error& e) {
    out << error_json(kind_name(e.kind()), e.detail()).dump(2) << "\n";
    return e.kind() == ErrorKind::Usage ? 2 : 1;
  } catch (const json::exception& e) {
    out << error_json("Usage", e.what()).dump(2) << "\n";
    return 2;
  }
}

}  // namespace latdisc::cli
