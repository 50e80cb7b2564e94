#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace latdisc;
using namespace latdisc::testing;

TEST_CASE("compatibility examples", "[hensel]") {
  PadicContext ctx(2, 8);
  BlockStructure s({1, 2}, {1, 1});
  CHECK(is_compatible(ModMatrix::identity(ctx, 2), s));
  CHECK_FALSE(is_compatible(mat(ctx, {{1, 0}, {1, 1}}), s));
  CHECK(is_compatible(mat(ctx, {{1, 5}, {0, 1}}), s));
  CHECK(is_compatible(mat(ctx, {{1, 5}, {2, 1}}), s));
}

TEST_CASE("approximation level examples", "[hensel]") {
  PadicContext ctx(3, 10);
  auto G = mat(ctx, diag({3, 9, 9}));
  BlockStructure s({1, 2}, {1, 2});
  CHECK(approximation_level(ModMatrix::identity(ctx, 3), G, G, s) == level_cap(ctx, s));
  PadicContext c3(3, 8);
  BlockStructure u({0}, {2});
  auto I = mat(c3, diag({1, 1}));
  for (int a = 1; a <= 4; ++a) {
    auto F = mat(c3, {{1, 0}, {0, 1}});
    F.set(0, 1, c3.power(a));
    CHECK(approximation_level(F, I, I, u) == a);
  }
  PadicContext c2(2, 10);
  BlockStructure m({0, 1}, {1, 1});
  auto G2 = mat(c2, diag({1, 2}));
  for (int a = 1; a <= 3; ++a) {
    auto F = ModMatrix::identity(c2, 2);
    F.set(0, 1, c2.power(a));
    int lvl = approximation_level(F, G2, G2, m);
    CHECK((lvl == a - 1 || lvl == a));
  }
}

TEST_CASE("nothing to do when b <= a", "[hensel]") {
  PadicContext ctx(3, 8);
  auto G = mat(ctx, {{1}});
  auto F = mat(ctx, {{2}});
  auto Z = mat(ctx, {{7}});
  CHECK(hensel_unimodular_odd(F, G, Z, 3, 2) == F);
  PadicContext c2(2, 8);
  auto H = mat(c2, {{0, 1}, {1, 0}});
  CHECK(hensel_unimodular_even(ModMatrix::identity(c2, 2), H, H, 2, 2) == ModMatrix::identity(c2, 2));
}

TEST_CASE("unimodular lifting examples", "[hensel]") {
  PadicContext c3(3, 8);
  auto G = mat(c3, {{1}});
  auto F = mat(c3, {{2}});
  auto Z = F * G * F.transpose();
  CHECK(hensel_unimodular_odd(F, G, Z, 1, 5) == F);

  PadicContext c2(2, 9);
  auto H = mat(c2, {{0, 1}, {1, 0}});
  CHECK(hensel_unimodular_even(ModMatrix::identity(c2, 2), H, H, 1, 6) == ModMatrix::identity(c2, 2));

  std::mt19937 rng(4);
  PadicContext c5(5, 9);
  int done = 0;
  for (int it = 0; it < 200 && done < 20; ++it) {
    auto Gr = mat(c5, {{1 + static_cast<long>(rng() % 4), static_cast<long>(rng() % 5)}, {0, 1}});
    Gr.set(1, 0, Gr(0, 1));
    Gr.set(1, 1, Int(1 + static_cast<long>(rng() % 4)));
    if (valuation(integer_determinant(Gr.to_rows()), c5) != 0) continue;
    ModMatrix F0(c5, 2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) F0.set(i, j, Int(static_cast<long>(rng() % 25)));
    if (valuation(integer_determinant(F0.to_rows()), c5) != 0) continue;
    auto Zr = F0 * Gr * F0.transpose();
    ModMatrix F1 = F0;
    F1.set(0, 0, F1(0, 0) + 5 * Int(static_cast<long>(rng() % 5)));
    F1.set(1, 0, F1(1, 0) + 5 * Int(static_cast<long>(rng() % 5)));
    auto out = hensel_unimodular_odd(F1, Gr, Zr, 1, 6);
    auto D = out * Gr * out.transpose() - Zr;
    CHECK(D.valuation() >= 6);
    CHECK((out - F1).valuation() >= 1);
    ++done;
  }
  CHECK(done == 20);

  PadicContext c2b(2, 10);
  BlockStructure u5({0}, {5});
  auto I5 = ModMatrix::identity(c2b, 5);
  int lifted = 0;
  for (int it = 0; it < 400 && lifted < 20; ++it) {
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    ModMatrix F(c2b, 5, 5);
    for (int i = 0; i < 5; ++i) F.set(i, perm[i], 1);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) F.set(i, j, F(i, j) + 2 * Int(static_cast<long>(rng() % 2)));
    if (approximation_level(F, I5, I5, u5) < 1) continue;
    auto out = hensel_unimodular_even(F, I5, I5, 1, 6);
    CHECK(approximation_level(out, I5, I5, u5) >= 6);
    CHECK((out - F).valuation() >= 1);
    ++lifted;
  }
  CHECK(lifted == 20);
}

TEST_CASE("wrong prime and insufficient level are rejected", "[hensel]") {
  PadicContext c2(2, 8);
  auto I = ModMatrix::identity(c2, 2);
  try {
    hensel_unimodular_odd(I, I, I, 1, 3);
    FAIL("expected WrongPrime");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrongPrime);
  }
  try {
    hensel_qf(I, I, I, BlockStructure({0}, {2}), 1, 9);
    FAIL("expected InsufficientPrecision");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientPrecision);
  }
}

TEST_CASE("diag(3,9,9) generator lifts", "[hensel]") {
  PadicContext ctx(3, 8);
  auto G = mat(ctx, diag({3, 9, 9}));
  BlockStructure s({1, 2}, {1, 2});
  auto F = mat(ctx, {{1, 1, 0}, {6, 1, 0}, {0, 0, 1}});
  REQUIRE(approximation_level(F, G, G, s) >= 1);
  auto out = hensel_qf(F, G, G, s, 1, 2);
  CHECK(approximation_level(out, G, G, s) >= 2);
  CHECK(satisfies_lift_pattern(out, F, s, 1));
  auto published = mat(ctx, {{4, 1, 0}, {24, 4, 0}, {0, 0, 1}});
  CHECK(out.reduced_mod(2) == published.reduced_mod(2));
}

TEST_CASE("the printed K0 generator for diag(1,2,2,4) is not 1-approximate", "[hensel]") {
  PadicContext ctx(2, 10);
  auto G = mat(ctx, diag({1, 2, 2, 4}));
  BlockStructure s({0, 1, 2}, {1, 2, 1});
  auto F = mat(ctx, {{1, 3, 3, 1}, {2, 1, 2, 1}, {2, 2, 1, 1}, {0, 2, 2, 1}});
  CHECK(is_compatible(F, s));
  CHECK(approximation_level(F, G, G, s) == 0);
  // The (scale 0, scale 2) entry of FGF^T - G is 28, while level 1 needs divisibility by 2^(1 + 2).
  auto D = F * G * F.transpose() - G;
  CHECK(D(0, 3) == 28);
  CHECK(valuation(D(0, 3), ctx) == 2);
  try {
    hensel_qf(F, G, G, s, 1, 2);
    FAIL("expected PreconditionViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionViolation);
  }
}

TEST_CASE("exact isometries are fixed points and lifts only gain levels", "[hensel][property]") {
  std::mt19937 rng(12);
  int count = 0;
  for (int it = 0; it < 400 && count < 40; ++it) {
    long p = std::vector<long>{2, 3, 5}[rng() % 3];
    auto inst = random_hensel_instance(rng, p, 5, 3, 1, 6);
    if (!inst) continue;
    ++count;
    auto exact = hensel_qf(inst->F, inst->G, inst->F * inst->G * inst->F.transpose(), inst->s, 1, 5);
    CHECK(exact == inst->F);
    auto l3 = hensel_qf(inst->F, inst->G, inst->Z, inst->s, 1, 3);
    int lvl3 = approximation_level(l3, inst->G, inst->Z, inst->s);
    CHECK(lvl3 >= 3);
    auto l6 = hensel_qf(l3, inst->G, inst->Z, inst->s, lvl3, 6);
    CHECK(approximation_level(l6, inst->G, inst->Z, inst->s) >= std::max(lvl3, 6));
  }
  CHECK(count == 40);
}

TEST_CASE("randomized lift soundness", "[hensel][property]") {
  std::mt19937 rng(2024);
  int count = 0;
  while (count < 200) {
    long p = std::vector<long>{2, 3, 5}[rng() % 3];
    int a = 1 + static_cast<int>(rng() % 2);
    auto inst = random_hensel_instance(rng, p, 5, 3, a, a + 5);
    if (!inst) continue;
    ++count;
    auto out = hensel_qf(inst->F, inst->G, inst->Z, inst->s, a, a + 5);
    CHECK(approximation_level(out, inst->G, inst->Z, inst->s) >= a + 5);
    CHECK(satisfies_lift_pattern(out, inst->F, inst->s, a));
  }
}

TEST_CASE("the a = 1 oddity condition does not depend on the oddity vector representative", "[hensel][property]") {
  std::mt19937 rng(77);
  int checked = 0;
  for (int it = 0; it < 2000 && checked < 100; ++it) {
    auto inst = random_hensel_instance(rng, 2, 5, 3, 1, 4);
    if (!inst) continue;
    auto D = inst->F * inst->G * inst->F.transpose() - inst->Z;
    for (int bi = 0; bi < inst->s.count(); ++bi) {
      int sc = inst->s.scales[bi];
      auto zi = divide_exact(block_of(inst->Z, inst->s, bi, bi), sc);
      auto v = oddity_vector_of(zi);
      auto Di = block_of(D, inst->s, bi, bi);
      bool base = quadratic_vanishes(Di, v, sc + 3);
      for (int t = 0; t < 4; ++t) {
        auto w = v;
        for (auto& x : w) x += 2 * Int(static_cast<long>(rng() % 4));
        CHECK(quadratic_vanishes(Di, w, sc + 3) == base);
      }
    }
    ++checked;
  }
  CHECK(checked == 100);
}
