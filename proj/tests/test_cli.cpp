#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "latdisc/cli.hpp"
#include "support.hpp"

using namespace latdisc;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string text;
  json body() const { return json::parse(text); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "latdisc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out);
  return {code, out.str()};
}

std::string data(const std::string& name) { return std::string(LATDISC_TEST_DATA) + "/" + name; }

std::string write_temp(const std::string& name, const json& j) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << j.dump();
  return path.string();
}

}  // namespace

TEST_CASE("disc-order of A2(4) + A1(4)", "[cli]") {
  auto r = run({"disc-order", "--gram", data("intro_m.json")});
  REQUIRE(r.code == 0);
  auto j = r.body();
  CHECK(j["order"] == "1536");
  CHECK(j["primes"]["2"] == "768");
  CHECK(j["primes"]["3"] == "2");
  auto q = run({"disc-order", "--gram", data("intro_m.json"), "--form", "quadratic"});
  CHECK(q.body()["order"] == "192");
  auto p3 = run({"disc-order", "--gram", data("intro_m.json"), "--p", "3"});
  CHECK(p3.body()["order"] == "2");
}

TEST_CASE("order and jordan commands", "[cli]") {
  auto r = run({"order", "--gram", data("diag_3_9_9.json"), "--p", "3", "--n", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.body()["order"] == "3888");
  CHECK(r.body()["breakdown"]["factors"].size() == 2);
  auto j = run({"jordan", "--gram", data("diag_3_9_9.json"), "--p", "3"}).body();
  REQUIRE(j["blocks"].size() == 2);
  CHECK(j["blocks"][1]["scale"] == 2);
  CHECK(j["blocks"][1]["rank"] == 2);
  // The prime can come from the input file.
  auto j2 = run({"jordan", "--gram", data("diag_1_2_2_4.json")});
  REQUIRE(j2.code == 0);
  CHECK(j2.body()["blocks"][0]["parity"] == "odd");
  CHECK(j2.body()["blocks"][0]["oddity"] == 1);
}

TEST_CASE("generator commands verify their closures", "[cli]") {
  auto g = run({"gens", "--gram", data("diag_3_9_9.json"), "--p", "3", "--n", "2", "--verify"});
  REQUIRE(g.code == 0);
  auto j = g.body();
  CHECK(j["generators"].size() == 8);
  CHECK(j["closure_order"] == "3888");
  CHECK(j["verified"] == true);
  auto d = run({"disc-gens", "--gram", data("diag_3_9_9.json"), "--verify"});
  REQUIRE(d.code == 0);
  CHECK(d.body()["verified"] == true);
  auto v = run({"verify", "--gram", data("diag_1_2_2_4.json"), "--n", "2"});
  REQUIRE(v.code == 0);
  CHECK(v.body()["order_formula"] == "2048");
  CHECK(v.body()["closure_order"] == "2048");
  CHECK(v.body()["enumeration_count"].is_null());
  auto v1 = run({"verify", "--gram", data("diag_1_2_2_4.json"), "--n", "1"});
  CHECK(v1.body()["enumeration_count"] == "4");
}

TEST_CASE("mass command", "[cli]") {
  auto r = run({"mass", "--gram", data("hyperbolic.json"), "--p", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.body()["mass"] == "3/4");
  CHECK(r.body()["watson_count"] == "12");
  auto bad = run({"mass", "--gram", data("diag_3_9_9.json"), "--p", "3", "--n", "2"});
  CHECK(bad.code == 1);
  CHECK(bad.body()["error"]["kind"] == "PreconditionViolation");
}

TEST_CASE("lift command", "[cli]") {
  json in{{"p", 3},
          {"prec", 8},
          {"F", {{1, 1, 0}, {6, 1, 0}, {0, 0, 1}}},
          {"G", {{3, 0, 0}, {0, 9, 0}, {0, 0, 9}}},
          {"Z", {{3, 0, 0}, {0, 9, 0}, {0, 0, 9}}},
          {"a", 1},
          {"b", 2}};
  auto r = run({"lift", "--input", write_temp("latdisc_lift.json", in)});
  REQUIRE(r.code == 0);
  auto j = r.body();
  CHECK(j["level_before"].get<int>() >= 1);
  CHECK(j["level_after"].get<int>() >= 2);
  CHECK(j["pattern_ok"] == true);
  in.erase("Z");
  auto missing = run({"lift", "--input", write_temp("latdisc_lift_bad.json", in)});
  CHECK(missing.code == 2);
}

TEST_CASE("usage and domain errors", "[cli]") {
  CHECK(run({"order", "--gram", data("empty.json"), "--p", "3"}).code == 2);
  CHECK(run({"order", "--gram", data("diag_3_9_9.json")}).code == 2);
  CHECK(run({"order", "--gram", "/nonexistent.json", "--p", "3"}).code == 2);
  CHECK(run({"order", "--gram", data("diag_3_9_9.json"), "--p", "4"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({}).code == 2);
  auto wrong = run({"disc-order", "--gram", data("diag_1_2_2_4.json"), "--form", "quadratic"});
  CHECK(wrong.code == 1);
  CHECK(wrong.body()["error"]["kind"] == "WrongKind");
  json asym{{"rows", {{1, 2}, {0, 1}}}};
  auto a = run({"order", "--gram", write_temp("latdisc_asym.json", asym), "--p", "3"});
  CHECK(a.code == 1);
  CHECK(a.body()["error"]["kind"] == "PreconditionViolation");
  auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.text.find("disc-order") != std::string::npos);
}
