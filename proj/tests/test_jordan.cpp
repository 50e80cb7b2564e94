#include <catch_amalgamated.hpp>

#include <algorithm>
#include <tuple>

#include "support.hpp"

using namespace latdisc;
using namespace latdisc::testing;

TEST_CASE("diag(3,9,9) at p = 3", "[jordan]") {
  auto J = jordan_decompose(mat(PadicContext(3, 6), diag({3, 9, 9})));
  REQUIRE(J.blocks.size() == 2);
  CHECK(J.blocks[0].scale == 1);
  CHECK(J.blocks[0].rank == 1);
  CHECK(J.blocks[0].gram == mat(J.blocks[0].gram.ctx(), {{1}}));
  CHECK(J.blocks[1].scale == 2);
  CHECK(J.blocks[1].rank == 2);
  CHECK(J.blocks[1].gram == mat(J.blocks[1].gram.ctx(), {{1, 0}, {0, 1}}));
}

TEST_CASE("diag(1,2,2,4) at p = 2", "[jordan]") {
  auto J = jordan_decompose(mat(PadicContext(2, 8), diag({1, 2, 2, 4})));
  REQUIRE(J.blocks.size() == 3);
  std::vector<int> scales, ranks;
  for (const auto& b : J.blocks) {
    scales.push_back(b.scale);
    ranks.push_back(b.rank);
    CHECK(b.odd);
  }
  CHECK(scales == std::vector<int>{0, 1, 2});
  CHECK(ranks == std::vector<int>{1, 2, 1});
  CHECK_FALSE(is_free(J, 1));
}

TEST_CASE("even unimodular plane at p = 2", "[jordan]") {
  auto J = jordan_decompose(mat(PadicContext(2, 6), {{2, 1}, {1, 2}}));
  REQUIRE(J.blocks.size() == 1);
  CHECK(J.blocks[0].scale == 0);
  CHECK(J.blocks[0].rank == 2);
  CHECK_FALSE(J.blocks[0].odd);
  CHECK(is_free(J, 0));
  auto q = rho(J, 0);
  CHECK(q.kind() == FormKind::quadratic);
  CHECK(q.tally().v == 1);
}

TEST_CASE("singular and insufficient precision inputs", "[jordan]") {
  try {
    jordan_decompose(mat(PadicContext(3, 4), {{1, 0}, {0, 0}}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::SingularGram || e.kind() == ErrorKind::InsufficientPrecision));
  }
  CHECK_THROWS_AS(decompose_integral({{1, 2}, {2, 4}}, 3), Error);
}

TEST_CASE("oddity vectors", "[jordan]") {
  PadicContext c(2, 6);
  CHECK(oddity_vector_of(mat(c, {{1}})) == std::vector<Int>{1});
  CHECK(oddity_of(mat(c, {{1}})) == 1);
  CHECK(oddity_vector_of(mat(c, {{0, 1}, {1, 0}})) == std::vector<Int>{0, 0});
  CHECK(oddity_vector_of(mat(c, {{1, 0}, {0, 1}})) == std::vector<Int>{1, 1});
  CHECK(oddity_of(mat(c, {{1, 0}, {0, 1}})) == 2);
  CHECK_THROWS_AS(oddity_vector_of(mat(PadicContext(3, 3), {{1}})), Error);
}

TEST_CASE("oddity vector satisfies the characteristic congruence", "[jordan][property]") {
  std::mt19937 rng(21);
  PadicContext c(2, 8);
  int checked = 0;
  for (int it = 0; it < 300; ++it) {
    int r = 1 + static_cast<int>(rng() % 4);
    auto g = random_gram(rng, r, 5, 9);
    if (integer_valuation(integer_determinant(g), 2) != 0) continue;
    auto G = mat(c, g);
    auto v = oddity_vector_of(G);
    for (int k = 0; k < r; ++k) {
      Int acc = 0;
      for (int l = 0; l < r; ++l) acc += G(k, l) * v[l];
      CHECK(mpz_fdiv_ui(Int(acc - G(k, k)).get_mpz_t(), 2) == 0);
    }
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("free constituents", "[jordan]") {
  auto J3 = jordan_decompose(mat(PadicContext(3, 6), diag({3, 9, 9})));
  CHECK(is_free(J3, 1));
  CHECK(is_free(J3, 2));
  auto J2 = jordan_decompose(mat(PadicContext(2, 6), {{1}}));
  CHECK(is_free(J2, 0));
}

TEST_CASE("rho forms", "[jordan]") {
  auto J3 = jordan_decompose(mat(PadicContext(3, 6), diag({3, 9, 9})));
  auto f = rho(J3, 2);
  CHECK(f.dim() == 2);
  CHECK_FALSE(f.tally().hyperbolic);
  CHECK(order_O(f) == 8);
  auto J2 = jordan_decompose(mat(PadicContext(2, 8), diag({1, 2, 2, 4})));
  auto b = rho(J2, 1);
  CHECK(b.kind() == FormKind::bilinear);
  CHECK(b.tally().wbar == 2);
  CHECK(b.tally().ubar == 0);
}

namespace {

using BlockKey = std::tuple<int, int, bool, bool>;

std::vector<BlockKey> invariants(const JordanDecomposition& J) {
  std::vector<BlockKey> out;
  for (const auto& b : J.blocks) out.emplace_back(b.scale, b.rank, b.odd, b.det_is_square);
  return out;
}

// Oddity of the whole 2-adic lattice: block oddities plus 4 for each odd scale with determinant +-3 mod 8.
int total_oddity(const JordanDecomposition& J) {
  int o = 0;
  for (const auto& b : J.blocks) {
    o += b.oddity;
    unsigned long d = mpz_fdiv_ui(integer_determinant(b.gram.to_rows()).get_mpz_t(), 8);
    if (b.scale % 2 == 1 && (d == 3 || d == 5)) o += 4;
  }
  return o % 8;
}

}  // namespace

TEST_CASE("reassembly and base change invariance", "[jordan][property]") {
  std::mt19937 rng(5);
  for (long p : {2L, 3L, 5L})
    for (int it = 0; it < 40; ++it) {
      int r = 1 + static_cast<int>(rng() % 4);
      auto g = random_gram(rng, r);
      auto J = decompose_integral(g, p);
      CHECK(J.base_change * J.source_gram * J.base_change.transpose() == J.block_diagonal());
      auto u = random_unimodular(rng, r);
      auto J2 = decompose_integral(congruent(u, g), p);
      CHECK(J2.base_change * J2.source_gram * J2.base_change.transpose() == J2.block_diagonal());
      if (p == 2) {
        // Per-block oddities depend on the splitting at p = 2; block shapes and the total oddity do not.
        CHECK(J.blocks.size() == J2.blocks.size());
        for (size_t k = 0; k < std::min(J.blocks.size(), J2.blocks.size()); ++k) {
          CHECK(J.blocks[k].scale == J2.blocks[k].scale);
          CHECK(J.blocks[k].rank == J2.blocks[k].rank);
          CHECK(J.blocks[k].odd == J2.blocks[k].odd);
        }
        CHECK(total_oddity(J) == total_oddity(J2));
      } else {
        CHECK(invariants(J) == invariants(J2));
      }
    }
}
