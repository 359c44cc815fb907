#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mvf/parallel.hpp"
#include "mvf/scenario.hpp"

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-commutator and Morawetz multiplier verification"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, out_dir, preset;
  int threads = 0;
  std::optional<unsigned> seed;
  app.add_option("--config", config_path, "Scenario file (JSON)");
  app.add_option("--preset", preset, "Bundled scenario name");
  app.add_option("--out", out_dir, "Output directory (default: the scenario's, else out/<name>)");
  app.add_option("--threads", threads, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Override the scenario seed");
  bool list = false;
  app.add_flag("--list-presets", list, "Print the bundled preset names and exit");

  const std::vector<std::pair<std::string, std::string>> suites = {
      {"verify-pointwise", "Pointwise sweeps and frequency checks"},
      {"certify", "Positivity certificates"},
      {"scan", "Threshold scans over N or K"},
      {"evolve", "Time evolution, Ehrenfest and decay checks"},
      {"report", "Every check in the scenario"},
  };
  for (const auto& [name, help] : suites) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  if (list) {
    for (const auto& p : mvf::preset_names()) std::cout << p << '\n';
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << "a subcommand is required\n";
    return kConfigError;
  }

  mvf::ScenarioConfig sc;
  try {
    if (config_path.empty() == preset.empty()) throw mvf::ConfigError("give exactly one of --config or --preset");
    sc = preset.empty() ? mvf::load_scenario(config_path) : mvf::load_preset(preset);
  } catch (const mvf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (seed) sc.seed = *seed;
  if (threads > 0) mvf::set_thread_count(threads);

  const std::filesystem::path out = !out_dir.empty() ? std::filesystem::path(out_dir)
                                    : sc.output       ? std::filesystem::path(*sc.output)
                                                      : std::filesystem::path("out") / sc.name;
  const auto suite = mvf::suite_from_string(app.get_subcommands().front()->get_name());

  mvf::RunReport rep;
  try {
    rep = mvf::run_suite(sc, suite, out, utc_timestamp());
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  for (const auto& r : rep.checks) {
    std::cout << std::left << std::setw(28) << r.name << std::setw(24) << r.kind << mvf::to_string(r.verdict);
    if (r.error) std::cout << "  (" << *r.error << ")";
    std::cout << '\n';
  }
  std::cout << "summary: " << (out / "summary.json").string() << '\n';
  return rep.exit_code();
}
