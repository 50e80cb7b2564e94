#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace latdisc;
using namespace latdisc::testing;

namespace {

ModMatrix m(long p, int n, const IntRows& rows) { return mat(PadicContext(p, n), rows); }

}  // namespace

TEST_CASE("trivial and cyclic groups", "[group_engine]") {
  CHECK(closure_order({m(3, 2, diag({1, 1}))}, 3, 2, 2) == 1);
  CHECK(closure_order({}, 5, 1, 3) == 1);
  // Unipotent of order 9 mod 9; rotation of order 4 mod 5; -1 has order 2.
  CHECK(closure_order({m(3, 2, {{1, 1}, {0, 1}})}, 3, 2, 2) == 9);
  CHECK(closure_order({m(5, 1, {{0, 1}, {4, 0}})}, 5, 1, 2) == 4);
  CHECK(closure_order({m(7, 1, diag({6}))}, 7, 1, 1) == 2);
  for (auto method : {ClosureMethod::stabilizer_chain, ClosureMethod::full_closure})
    CHECK(closure_order({m(2, 3, diag({3})), m(2, 3, diag({5}))}, 2, 3, 1, method) == 4);
}

TEST_CASE("GL_2(F_3) and SL_2(F_5)", "[group_engine]") {
  std::vector<ModMatrix> gl{m(3, 1, {{1, 1}, {0, 1}}), m(3, 1, {{0, 1}, {1, 0}}), m(3, 1, diag({2, 1}))};
  CHECK(closure_order(gl, 3, 1, 2) == 48);
  std::vector<ModMatrix> sl{m(5, 1, {{1, 1}, {0, 1}}), m(5, 1, {{1, 0}, {1, 1}})};
  CHECK(closure_order(sl, 5, 1, 2) == 120);
  CHECK(closure_order(sl, 5, 1, 2, ClosureMethod::full_closure) == 120);
}

TEST_CASE("budget exhaustion is reported", "[group_engine]") {
  std::vector<ModMatrix> sl{m(5, 1, {{1, 1}, {0, 1}}), m(5, 1, {{1, 0}, {1, 1}})};
  try {
    closure_order(sl, 5, 1, 2, ClosureMethod::full_closure, 10);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BudgetExceeded);
  }
}

TEST_CASE("mixed moduli act on a product of cyclic groups", "[group_engine]") {
  // Aut(Z/2 x Z/4): order 8.
  FiniteMatrixGroup g({2, 4}, {{1, 0, 1, 1}, {1, 2, 0, 1}, {1, 0, 0, 3}});
  CHECK(g.order_by_stabilizer_chain() == g.order_by_closure());
  CHECK(g.order_by_closure() == 8);
  CHECK(g.point_count() == 8);
}

TEST_CASE("stabilizer chain agrees with full closure", "[group_engine][property]") {
  std::mt19937 rng(3);
  for (int it = 0; it < 60; ++it) {
    long p = it % 2 ? 3 : 2;
    int n = 1 + static_cast<int>(rng() % 2);
    // Rank 3 only mod p keeps GL within the closure budget.
    int r = 1 + static_cast<int>(rng() % (n == 1 ? 3 : 2));
    long pn = ipow(p, n).get_si();
    std::vector<ModMatrix> gens;
    int k = 1 + static_cast<int>(rng() % 3);
    while (static_cast<int>(gens.size()) < k) {
      IntRows rows(r, std::vector<Int>(r));
      for (auto& row : rows)
        for (auto& x : row) x = static_cast<long>(rng() % pn);
      if (integer_valuation(integer_determinant(rows), p) != 0) continue;
      gens.push_back(m(p, n, rows));
    }
    Int a = closure_order(gens, p, n, r, ClosureMethod::stabilizer_chain);
    Int b = closure_order(gens, p, n, r, ClosureMethod::full_closure);
    CHECK(a == b);
  }
}

TEST_CASE("isometry enumeration examples", "[group_engine]") {
  CHECK(enumerate_isometries_mod(decompose_integral(diag({1}), 2), 2).count == 2);
  auto J = decompose_integral(diag({1, 2}), 2);
  CHECK(enumerate_isometries_mod(J, 2).count == order_mod_pn(J, 2).total);
  auto U = decompose_integral({{2, 1}, {1, 2}}, 2);
  auto e = enumerate_isometries_mod(U, 1, true);
  CHECK(e.count == 6);
  CHECK(e.matrices.size() == 6);
  CHECK(closure_order(e.matrices, 2, 1, 2) == 6);
  try {
    enumerate_isometries_mod(decompose_integral(diag({1, 1, 1, 1}), 5), 2);
    FAIL("expected TooLarge");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::TooLarge);
  }
}

TEST_CASE("enumerated isometries are closed and match their closure", "[group_engine][property]") {
  std::mt19937 rng(13);
  int checked = 0;
  while (checked < 25) {
    long p = rng() % 2 ? 3 : 2;
    int r = 1 + static_cast<int>(rng() % 2);
    int n = 1 + static_cast<int>(rng() % 2);
    if (candidate_space(p, n * r * r) > (1 << 14)) continue;
    auto J = decompose_integral(random_gram(rng, r, 3, 6), p);
    auto e = enumerate_isometries_mod(J, n, true);
    CHECK(closure_order(e.matrices, p, n, r) == e.count);
    ++checked;
  }
}

TEST_CASE("direct Gram congruence counts", "[group_engine]") {
  CHECK(count_gram_preserving_mod({{0, 1}, {1, 0}}, 3, 2) == 12);
  CHECK(count_gram_preserving_mod(diag({1}), 2, 3) == 4);
  CHECK(count_gram_preserving_mod(diag({1}), 2, 3, kDefaultEnumerationBound, true) == 2);
  CHECK_THROWS_AS(count_gram_preserving_mod(diag({1, 1, 1}), 5, 4, 1000), Error);
}
