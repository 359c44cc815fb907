// Acceptance run: executes the bundled preset checks and applies the acceptance thresholds
// to their metrics. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mvf/scenario.hpp"

using namespace mvf;
using nlohmann::json;

namespace {

std::map<std::string, ScenarioConfig> g_presets;

const ScenarioConfig& preset(const std::string& name) {
  auto it = g_presets.find(name);
  if (it == g_presets.end()) it = g_presets.emplace(name, load_preset(name)).first;
  return it->second;
}

// Runs a named check; a raised error is reported and counts against the criterion.
struct Run {
  CheckResult result;
  const json& m() const { return result.metrics; }
  bool ok() const { return !result.error.has_value(); }
};

Run run(const std::string& preset_name, const std::string& check_name) {
  const auto& sc = preset(preset_name);
  for (const auto& c : sc.checks) {
    if (c.name != check_name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Run r{run_check(sc, c)};
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  %s/%s: %s (%.0fs)%s%s\n", preset_name.c_str(), check_name.c_str(), to_string(r.result.verdict).c_str(),
                secs, r.ok() ? "" : " error: ", r.ok() ? "" : r.result.error->c_str());
    std::fflush(stdout);
    return r;
  }
  throw std::runtime_error("preset " + preset_name + " has no check " + check_name);
}

const json& params(const std::string& preset_name, const std::string& check_name) {
  for (const auto& c : preset(preset_name).checks) {
    if (c.name == check_name) return c.params;
  }
  throw std::runtime_error("preset " + preset_name + " has no check " + check_name);
}

int g_failed = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

template <class F>
void criterion(int id, const std::string& title, F&& body) {
  try {
    std::string detail;
    const bool pass = body(detail);
    report(id, title, pass, detail);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("error: ") + e.what());
  }
}

void profile_exactness() {
  criterion(1, "profile exactness", [](std::string& d) {
    const auto r = run("two-bump-default", "profile");
    const int samples = r.m()["samples"];
    const double h = r.m()["hessian_max_error"], fd = r.m()["fd_max_error"];
    d = fmt("hessian %.2e, finite differences %.2e", h, fd) + ", samples " + std::to_string(samples);
    return r.ok() && samples >= 100 && h <= 1e-10 && fd <= 1e-6;
  });
}

void commutator_identity() {
  criterion(2, "discrete commutator identity", [](std::string& d) {
    const auto r = run("two-bump-default", "commutator-consistency");
    const auto& rows = r.m()["rows"];
    const double order = r.m()["order"];
    d = fmt("order %.3f, defects %.3e -> %.3e", order, rows.front()["relative_defect"].get<double>(),
            rows.back()["relative_defect"].get<double>());
    const bool ladder = rows.front()["points"] == 24 && rows.back()["points"] == 48;
    return r.ok() && ladder && std::abs(order - 2.0) <= 0.3;
  });
}

void kinetic_lower_bound() {
  criterion(3, "kinetic lower bound positivity", [](std::string& d) {
    const auto r = run("two-bump-default", "kinetic-lower-bound");
    const auto& cert = r.m()["certificates"][0];
    const double est = cert["estimate"], scale = cert["scale"];
    const auto pts = cert["parameters"]["grid"]["points"].get<std::vector<int>>();
    const auto& sc = preset("two-bump-default");
    const bool single = params("two-bump-default", "kinetic-lower-bound")["N"] == 0;
    d = fmt("min quotient %.3e, floor %.3e, grid %.0f^3", est, -1e-8 * scale, pts[0]);
    const bool setup = single && sc.profile.a() == 1.0 && sc.profile.sigma() == 1.0 && sc.profile.dim() == 3 &&
                       std::all_of(pts.begin(), pts.end(), [](int p) { return p == 48; });
    return r.ok() && setup && est >= -1e-8 * scale;
  });
}

void cancellation() {
  criterion(4, "cancellation pair bound and claim sign", [](std::string& d) {
    const auto a = run("two-bump-default", "pair-bound");
    const auto b = run("two-bump-default", "claim-sign");
    const int na = a.m()["samples"], nb = b.m()["samples"];
    const int va = a.m()["violations"], fb = b.m()["failures"];
    d = "pair violations " + std::to_string(va) + "/" + std::to_string(na) + ", claim failures " + std::to_string(fb) +
        "/" + std::to_string(nb);
    const bool branches = b.m()["nearer_k1"] > 0 && b.m()["nearer_k2"] > 0 && b.m()["equidistant"] > 0;
    const bool tol = params("two-bump-default", "pair-bound")["tol"].get<double>() <= 1e-12;
    return a.ok() && b.ok() && na >= 100000 && nb >= 10000 && va == 0 && fb == 0 && branches && tol;
  });
}

void log_law() {
  criterion(5, "logarithmic accumulation", [](std::string& d) {
    const auto r = run("two-bump-default", "log-law");
    const auto Ns = r.m()["N"].get<std::vector<int>>();
    bool ok = r.ok() && Ns.front() == 8 && Ns.back() == 128;
    double min_growth = INFINITY, min_r2 = INFINITY, worst_pref = 0.0;
    for (const auto& f : r.m()["fits"]) {
      min_growth = std::min(min_growth, f["growth"].get<double>());
      min_r2 = std::min(min_r2, f["r2"].get<double>());
    }
    for (const auto& p : r.m()["prefactor_ratios"]) {
      worst_pref = std::max(worst_pref, std::abs(p["ratio"].get<double>() / p["expected"].get<double>() - 1.0));
    }
    d = fmt("min growth %.4f, min r^2 %.5f, worst prefactor deviation %.1f%%", min_growth, min_r2, 100 * worst_pref);
    return ok && !r.m()["prefactor_ratios"].empty() && min_growth > 0 && min_r2 >= 0.9 && worst_pref <= 0.3;
  });
}

void tube() {
  criterion(6, "negative region tube", [](std::string& d) {
    const auto r = run("two-bump-default", "tube");
    const auto rad = r.m()["tube_radius"].get<std::vector<double>>();
    const auto margin = r.m()["floor_margin"].get<std::vector<double>>();
    bool mono = true;
    for (std::size_t i = 1; i < rad.size(); ++i) mono = mono && rad[i] <= rad[i - 1];
    const double worst = *std::min_element(margin.begin(), margin.end());
    d = fmt("radii %.3f -> %.3f, worst floor margin %.2e", rad.front(), rad.back(), worst);
    return r.ok() && mono && rad.back() <= 0.5 && worst >= -1e-12;
  });
}

void certificates() {
  criterion(7, "multi-center certificates", [](std::string& d) {
    bool all = true;
    for (const char* p : {"two-bump-default", "lattice", "axial-product"}) {
      const auto r = run(p, "N-scan");
      const auto& s = r.m()["scan"];
      const bool eps = std::abs(params(p, "N-scan")["epsilon"].get<double>() - 0.1) < 1e-15;
      const bool ok = r.ok() && !s["first_pass"].is_null() && s["monotone"].get<bool>() &&
                      r.m().value("stable", false) && r.m()["refined"]["monotone"].get<bool>() && eps;
      d += std::string(d.empty() ? "" : ", ") + p + " first N " +
           (s["first_pass"].is_null() ? std::string("none") : std::to_string(s["first_pass"].get<int>())) +
           (r.m().value("stable", false) ? " stable" : " unstable");
      all = all && ok;
    }
    return all;
  });
}

void frequency() {
  criterion(8, "frequency machinery", [](std::string& d) {
    const auto a = run("high-energy", "partition-of-unity");
    const auto b = run("high-energy", "norm-decay");
    const double defect = std::max(a.m()["scalar_defect"].get<double>(), a.m()["operator_defect"].get<double>());
    const double e = b.m()["exponent"];
    d = fmt("partition defect %.2e, norm exponent %.3f (target %.1f)", defect, e, 1.0);
    return a.ok() && b.ok() && defect <= 1e-10 && std::abs(e / 1.0 - 1.0) <= 0.3;
  });
}

void high_energy() {
  criterion(9, "high-energy sandwich flip", [](std::string& d) {
    const auto r = run("high-energy", "K-scan");
    const auto& s = r.m()["scan"];
    const auto trivial = r.m()["trivial"].get<std::vector<bool>>();
    const auto& rungs = s["rungs"];
    std::size_t first = rungs.size();
    for (std::size_t i = 0; i < rungs.size(); ++i) {
      if (rungs[i]["verdict"] == "pass") {
        first = i;
        break;
      }
    }
    bool stays = first < rungs.size();
    for (std::size_t i = first; i < rungs.size(); ++i) stays = stays && rungs[i]["verdict"] == "pass";
    const bool flips = first > 0 && first < rungs.size();
    const bool nontrivial = first < trivial.size() && !trivial[first];
    const bool eps = params("high-energy", "K-scan")["epsilon"].get<double>() == 1.0;
    d = first < rungs.size() ? fmt("first pass K = %.3f (%.4f of weight norm)", s["ladder"][first].get<double>(),
                                   s["ladder"][first].get<double>() / r.m()["weight_norm"].get<double>())
                             : "no pass";
    return r.ok() && flips && stays && nontrivial && eps;
  });
}

bool dips_shrink(const json& runs, std::string& why) {
  constexpr double floor = 1e-12, factor = 3.0;  // "about four" per halving
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const double a = runs[i - 1]["max_dip"], b = runs[i]["max_dip"];
    if (a <= floor && b > floor) {
      why = "dip appeared under refinement";
      return false;
    }
    if (a > floor && b > floor && a / b < factor) {
      why = fmt("dip ratio %.2f", a / b);
      return false;
    }
  }
  return true;
}

void dynamics() {
  criterion(10, "dynamics", [](std::string& d) {
    bool ok = true;
    std::vector<std::string> notes;
    double conservation = INFINITY;
    int cons_steps = 0;
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"two-bump-default", "dynamics"},           {"lattice", "dynamics"},
        {"axial-product", "dynamics"},              {"moving-bump", "dynamics-sinusoid"},
        {"moving-bump", "dynamics-tanh"},           {"moving-bump", "dynamics-triangle"}};
    for (const auto& [p, c] : runs) {
      const auto r = run(p, c);
      if (!r.ok()) {
        ok = false;
        notes.push_back(p + "/" + c + " raised");
        continue;
      }
      const auto& m = r.m();
      if (m.contains("conservation_steps")) {
        conservation = m["conservation_norm_drift"];
        cons_steps = m["conservation_steps"];
      }
      const bool gated = params(p, c)["order_gate"].get<bool>();
      if (gated) {
        const double order = m["ehrenfest_order"];
        if (std::abs(order - 2.0) > 0.3) {
          ok = false;
          notes.push_back(p + "/" + c + fmt(" order %.3f", order));
        }
      }
      std::string why;
      if (!dips_shrink(m["runs"], why)) {
        ok = false;
        notes.push_back(p + "/" + c + " " + why);
      }
      for (const auto& run : m["runs"]) {
        if (!(run["budget_lhs"].get<double>() <= run["budget_rhs"].get<double>())) {
          ok = false;
          notes.push_back(p + "/" + c + fmt(" budget %.3f > %.3f", run["budget_lhs"], run["budget_rhs"]));
        }
      }
    }
    if (!(cons_steps >= 1000 && conservation <= 1e-9)) {
      ok = false;
      notes.push_back(fmt("norm drift %.2e", conservation));
    }
    const auto dr = run("two-bump-default", "decay");
    const auto horizons = dr.ok() ? dr.m()["horizons"].get<std::vector<double>>() : std::vector<double>{};
    const bool decay_ok = dr.ok() && horizons == std::vector<double>{5, 10, 20} && dr.m()["plain"]["bounded"].get<bool>();
    if (!decay_ok) {
      ok = false;
      notes.push_back("decay ratio grows");
    } else {
      const auto ratio = dr.m()["plain"]["ratio"];
      notes.push_back(fmt("decay ratios %.4f %.4f %.4f", ratio[0], ratio[1], ratio[2]));
    }
    d = fmt("norm drift %.2e over %.0f steps", conservation, cons_steps);
    for (const auto& s : notes) d += "; " + s;
    return ok;
  });
}

void nondefinite() {
  criterion(11, "nondefinite condition", [](std::string& d) {
    const auto a = run("nondefinite", "sufficient-condition");
    const auto b = run("nondefinite", "nondefinite-certificate");
    const double margin = a.m()["min_margin"];
    const auto& cert = b.m()["certificates"][0];
    d = fmt("min margin %.3e, certificate estimate %.4e", margin, cert["estimate"].get<double>());
    return a.ok() && b.ok() && margin >= 0.0 && cert["verdict"] == "pass";
  });
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  profile_exactness();
  commutator_identity();
  kinetic_lower_bound();
  cancellation();
  log_law();
  tube();
  certificates();
  frequency();
  high_energy();
  dynamics();
  nondefinite();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 11 criteria failed, %.0f s\n", g_failed, secs);
  return g_failed ? 1 : 0;
}
