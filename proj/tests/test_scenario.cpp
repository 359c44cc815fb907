#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mvf/scenario.hpp"

using namespace mvf;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "name": "small",
  "seed": 3,
  "grid": {"extent": 4.0, "points": 16},
  "potential": {"variant": "two-bump", "b": [1.5, 0, 0], "amplitude": 1.0, "radius": 1.0},
  "multiplier": {"N": 1, "axis": [1.5, 0, 0]},
  "checks": [
    {"name": "pairs", "kind": "pair-bound", "samples": 2000},
    {"name": "claims", "kind": "claim-sign", "samples": 500},
    {"name": "tube", "kind": "tube", "N": [0, 1, 2], "delta_target": 2.0}
  ]
})";

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mvf-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("unknown keys are rejected with a line") {
  const std::string text = "{\n  \"name\": \"x\",\n  \"grid\": {\"extent\": 4.0, \"points\": 16},\n  \"tolerence\": 1\n}";
  try {
    parse_scenario(text);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
    CHECK(e.key() == "tolerence");
  }
  const std::string nested = "{\n \"checks\": [\n  {\"kind\": \"pair-bound\",\n   \"sample\": 10}\n ]\n}";
  CHECK_THROWS_AS(parse_scenario(nested), ConfigError);
}

TEST_CASE("syntax, type and reference errors") {
  CHECK_THROWS_AS(parse_scenario("{\n\"name\": \"x\",,\n}"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"grid": {"extent": "big", "points": 16}})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"checks": [{"kind": "scan", "parameter": "N"}]})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"checks": [{"kind": "pair-bound"}]})"), ConfigError);  // needs bumps
  CHECK_THROWS_AS(parse_scenario(R"({"checks": [{"kind": "no-such-check"}]})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"checks": [{"kind": "claim-sign", "tol": -1}]})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"checks": [{"kind": "claim-sign"}, {"kind": "claim-sign"}]})"), ConfigError);
}

TEST_CASE("empty check list exits cleanly with an empty summary") {
  const auto sc = parse_scenario(R"({"name": "empty", "checks": []})");
  const auto dir = scratch_dir("empty");
  const auto rep = run_suite(sc, Suite::Report, dir, "T");
  CHECK(rep.exit_code() == 0);
  const auto j = nlohmann::json::parse(std::ifstream(dir / "summary.json"));
  CHECK(j["checks"].empty());
  CHECK(j["timestamp"] == "T");
  fs::remove_all(dir);
}

TEST_CASE("reruns give identical summaries apart from the timestamp") {
  const auto sc = parse_scenario(kSmall);
  const auto a = run_suite(sc, Suite::VerifyPointwise, std::nullopt, "A").summary("same").dump();
  const auto b = run_suite(sc, Suite::VerifyPointwise, std::nullopt, "B").summary("same").dump();
  CHECK(a == b);
  auto sc2 = sc;
  sc2.seed = 4;
  CHECK(run_suite(sc2, Suite::VerifyPointwise, std::nullopt, "A").summary("same").dump() != a);
}

TEST_CASE("suites select their checks and write artifacts") {
  const auto sc = parse_scenario(kSmall);
  const auto dir = scratch_dir("suite");
  const auto rep = run_suite(sc, Suite::VerifyPointwise, dir, "T");
  REQUIRE(rep.checks.size() == 3);
  for (const auto& r : rep.checks) CHECK(r.verdict == Verdict::Pass);
  CHECK(fs::exists(dir / "tube.region.bin"));
  CHECK(run_suite(sc, Suite::Scan, std::nullopt, "T").checks.empty());
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
  fs::remove_all(dir);
}

TEST_CASE("runtime failures are reported, not thrown") {
  const auto sc = parse_scenario(R"({
    "grid": {"extent": 4.0, "points": 8},
    "potential": {"variant": "radial-bump", "amplitude": 1.0, "radius": 0.5},
    "multiplier": {"N": 0, "axis": [1, 0, 0]},
    "checks": [{"name": "coarse", "kind": "certificate"}]
  })");
  const auto rep = run_suite(sc, Suite::Certify, std::nullopt, "T");
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].error.has_value());
  CHECK(rep.exit_code() == 3);
}

TEST_CASE("bundled presets parse") {
  const auto names = preset_names();
  for (const char* want : {"two-bump-default", "lattice", "axial-product", "moving-bump", "high-energy", "nondefinite"}) {
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
  for (const auto& n : names) CHECK_NOTHROW(load_preset(n));
  CHECK_THROWS_AS(load_preset("missing"), ConfigError);
}
