#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvf/certify.hpp"
#include "mvf/grid.hpp"
#include "mvf/multiplier.hpp"
#include "mvf/potentials.hpp"
#include "mvf/profile.hpp"

namespace mvf {

// Bad scenario text or contents; `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class Suite { VerifyPointwise, Certify, Scan, Evolve, Report };

std::string to_string(Suite s);
Suite suite_from_string(const std::string& s);

struct CheckConfig {
  std::string name;
  std::string kind;
  Suite suite = Suite::Report;
  std::optional<GridSpec> grid;        // overrides the scenario grid
  std::optional<Potential> potential;  // overrides the scenario potential
  nlohmann::json params;               // validated, defaults filled in
};

struct MultiplierBlock {
  std::optional<int> N;  // γ_N along `axis`
  Point axis;
  MultiplierSpec spec;
};

struct ScenarioConfig {
  std::string name;
  unsigned seed = 1;
  std::optional<std::string> output;
  RadialProfile profile;
  GridSpec grid;
  Potential potential = Potential::zero(3);
  std::optional<MultiplierBlock> multiplier;
  std::vector<CheckConfig> checks;
  nlohmann::json source;  // parsed document, for hashing
};

// Strict parse: unknown keys, wrong types and out-of-range values raise ConfigError with a line when found.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Bundled presets live in MVF_PRESET_DIR (environment) or the install-time default.
std::filesystem::path preset_directory();
std::vector<std::string> preset_names();
ScenarioConfig load_preset(const std::string& name);

struct CheckResult {
  std::string name;
  std::string kind;
  Verdict verdict = Verdict::Inconclusive;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> artifacts;
  std::optional<std::string> error;  // runtime failure inside the check
};

struct RunReport {
  std::string scenario;
  std::string suite;
  std::string hash;
  unsigned seed = 0;
  std::vector<CheckResult> checks;

  bool runtime_error() const;
  // 0 all non-inconclusive pass, 1 some fail, 3 a check raised.
  int exit_code() const;
  nlohmann::json summary(const std::string& timestamp) const;
};

// Runs one check; artifacts go to out_dir when given.
CheckResult run_check(const ScenarioConfig& sc, const CheckConfig& check,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Runs every check belonging to the suite (all of them for Report) and writes summary.json.
RunReport run_suite(const ScenarioConfig& sc, Suite suite, const std::optional<std::filesystem::path>& out_dir,
                    const std::string& timestamp);

// Writes through a sibling temporary and renames.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace mvf
