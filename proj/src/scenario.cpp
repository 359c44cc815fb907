#include "mvf/scenario.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mvf/cancellation.hpp"
#include "mvf/commutator.hpp"
#include "mvf/evolution.hpp"
#include "mvf/frequency.hpp"
#include "mvf/parallel.hpp"

#ifndef MVF_PRESET_DIR
#define MVF_PRESET_DIR "presets"
#endif

namespace mvf {

using nlohmann::json;
namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& what, std::string key, int line)
    : std::runtime_error(what), key_(std::move(key)), line_(line) {}

std::string to_string(Suite s) {
  switch (s) {
    case Suite::VerifyPointwise:
      return "verify-pointwise";
    case Suite::Certify:
      return "certify";
    case Suite::Scan:
      return "scan";
    case Suite::Evolve:
      return "evolve";
    case Suite::Report:
      return "report";
  }
  return "?";
}

Suite suite_from_string(const std::string& s) {
  for (Suite v : {Suite::VerifyPointwise, Suite::Certify, Suite::Scan, Suite::Evolve, Suite::Report}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown suite '" + s + "'");
}

namespace {

// Line of every value in a syntactically valid JSON text, keyed by dotted path.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : s_(text) { value(""); }
  int line(const std::string& path) const {
    auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  void ws() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) {
      if (s_[p_] == '\n') ++line_;
      ++p_;
    }
  }
  std::string str() {
    std::string out;
    ++p_;
    while (p_ < s_.size() && s_[p_] != '"') {
      if (s_[p_] == '\\') ++p_;
      out += s_[p_++];
    }
    ++p_;
    return out;
  }
  void value(const std::string& path) {
    ws();
    if (p_ >= s_.size()) return;
    lines_.emplace(path, line_);
    const char c = s_[p_];
    if (c == '{') {
      ++p_;
      ws();
      while (p_ < s_.size() && s_[p_] != '}') {
        const int at = line_;
        const std::string key = str();
        const std::string sub = path.empty() ? key : path + "." + key;
        ws();
        ++p_;  // ':'
        value(sub);
        lines_[sub] = at;
        ws();
        if (s_[p_] == ',') ++p_;
        ws();
      }
      ++p_;
    } else if (c == '[') {
      ++p_;
      ws();
      for (int i = 0; p_ < s_.size() && s_[p_] != ']'; ++i) {
        value(path + "[" + std::to_string(i) + "]");
        ws();
        if (s_[p_] == ',') ++p_;
        ws();
      }
      ++p_;
    } else if (c == '"') {
      str();
    } else {
      while (p_ < s_.size() && !std::strchr(",]} \t\r\n", s_[p_])) ++p_;
    }
  }

  const std::string& s_;
  std::size_t p_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

// Strict view of one JSON object or value: every key must be consumed before finish().
class Node {
 public:
  Node(const json& j, std::string path, const LineIndex* idx) : j_(&j), path_(std::move(path)), idx_(idx) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  ConfigError error(const std::string& msg, const std::string& key = {}) const {
    const std::string p = key.empty() ? path_ : sub(key);
    const int line = idx_ ? idx_->line(p) : 0;
    std::string what = msg;
    if (!p.empty()) what = p + ": " + what;
    if (line > 0) what = "line " + std::to_string(line) + ": " + what;
    return ConfigError(what, p, line);
  }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) {
    require_object();
    if (!j_->contains(key)) throw error("missing required key '" + key + "'");
    used_.insert(key);
    return Node((*j_)[key], sub(key), idx_);
  }

  std::optional<Node> find(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  template <class T>
  T as() const {
    const json& v = *j_;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw error("expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw error("expected an integer");
      return v.get<int>();
    } else if constexpr (std::is_same_v<T, unsigned>) {
      if (!v.is_number_unsigned()) throw error("expected a non-negative integer");
      return v.get<unsigned>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw error("expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw error("expected a finite number");
      return d;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw error("expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) {
      if (!v.is_array()) throw error("expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(Node(v[i], path_ + "[" + std::to_string(i) + "]", idx_).as<typename T::value_type>());
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  template <class T>
  T req(const std::string& key) {
    return at(key).as<T>();
  }

  template <class T>
  T opt(const std::string& key, T def) {
    auto n = find(key);
    return n ? n->as<T>() : def;
  }

  double positive(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key) && def) return *def;
    const double v = req<double>(key);
    if (!(v > 0.0)) throw error("must be positive", key);
    return v;
  }

  std::vector<Node> items() const {
    if (!j_->is_array()) throw error("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "[" + std::to_string(i) + "]", idx_);
    return out;
  }

  void finish() const {
    require_object();
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_.count(it.key())) throw error("unknown key '" + it.key() + "'", it.key());
    }
  }

 private:
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void require_object() const {
    if (!j_->is_object()) throw error("expected an object");
  }

  const json* j_;
  std::string path_;
  const LineIndex* idx_;
  std::set<std::string> used_;
};

Point read_point(Node n, int dim) {
  auto v = n.as<std::vector<double>>();
  if (static_cast<int>(v.size()) != dim) throw n.error("expected " + std::to_string(dim) + " coordinates");
  return v;
}

std::vector<double> positive_list(Node n, std::size_t min_size = 1) {
  auto v = n.as<std::vector<double>>();
  if (v.size() < min_size) throw n.error("expected at least " + std::to_string(min_size) + " entries");
  for (double d : v) {
    if (!(d > 0.0)) throw n.error("entries must be positive");
  }
  return v;
}

GridSpec read_grid(Node n, int dim) {
  GridSpec g;
  g.dim = dim;
  auto e = n.at("extent");
  if (e.raw().is_array()) {
    g.extent = e.as<std::vector<double>>();
  } else {
    g.extent.assign(dim, e.as<double>());
  }
  auto p = n.at("points");
  if (p.raw().is_array()) {
    g.points = p.as<std::vector<int>>();
  } else {
    g.points.assign(dim, p.as<int>());
  }
  const std::string b = n.opt<std::string>("boundary", "dirichlet");
  try {
    g.boundary = boundary_from_string(b);
    g.validate();
  } catch (const std::invalid_argument& ex) {
    throw n.error(ex.what());
  }
  n.finish();
  return g;
}

MotionLaw read_law(Node n) {
  MotionLaw m;
  try {
    m.kind = MotionLaw::kind_from_string(n.req<std::string>("law"));
  } catch (const std::invalid_argument& ex) {
    throw n.error(ex.what(), "law");
  }
  m.base = n.opt<double>("base", 0.0);
  m.amplitude = n.opt<double>("amplitude", 0.0);
  m.period = n.positive("period", 1.0);
  n.finish();
  return m;
}

BumpShape read_bump(Node& n) {
  return BumpShape{n.positive("amplitude"), n.positive("radius")};
}

Potential read_potential(Node n, int dim) {
  const std::string variant = n.req<std::string>("variant");
  Potential V = Potential::zero(dim);
  try {
    if (variant == "zero") {
    } else if (variant == "radial-bump") {
      const auto c = n.has("center") ? read_point(n.at("center"), dim) : Point(dim, 0.0);
      V = Potential::radial_bump(c, read_bump(n));
    } else if (variant == "two-bump") {
      const auto b = read_point(n.at("b"), dim);
      V = Potential::two_bump(b, read_bump(n));
    } else if (variant == "lattice") {
      const auto b = read_point(n.at("b"), dim);
      const int M = n.req<int>("M");
      if (M < 0) throw n.error("must be non-negative", "M");
      V = Potential::lattice(b, M, read_bump(n));
    } else if (variant == "axial-product") {
      V = Potential::axial_product(dim, AxialFactor{n.positive("amplitude"), n.req<double>("offset"), n.positive("width")});
    } else if (variant == "nondefinite") {
      V = Potential::nondefinite_radial(dim, n.positive("b"), n.positive("c"), n.positive("eps"));
    } else if (variant == "weighted-sum") {
      std::vector<std::pair<double, Potential>> terms;
      for (auto t : n.at("terms").items()) {
        const double w = t.req<double>("weight");
        terms.emplace_back(w, read_potential(t.at("potential"), dim));
        t.finish();
      }
      V = Potential::weighted_sum(std::move(terms));
    } else if (variant == "moving") {
      Potential base = read_potential(n.at("base"), dim);
      MotionLaw beta = n.has("beta") ? read_law(n.at("beta")) : MotionLaw{};
      MotionLaw lambda = n.has("lambda") ? read_law(n.at("lambda")) : MotionLaw{MotionLaw::Kind::Constant, 1.0, 0.0, 1.0};
      V = Potential::time_dependent(std::move(base), beta, lambda);
    } else {
      throw n.error("unknown potential variant '" + variant + "'", "variant");
    }
  } catch (const std::invalid_argument& ex) {
    throw n.error(ex.what());
  }
  n.finish();
  return V;
}

MultiplierBlock read_multiplier(Node n, const RadialProfile& profile) {
  MultiplierBlock m;
  const int dim = profile.dim();
  MultiplierVariant variant;
  try {
    variant = multiplier_variant_from_string(n.opt<std::string>("variant", "smooth"));
  } catch (const std::invalid_argument& ex) {
    throw n.error(ex.what(), "variant");
  }
  try {
    if (n.has("N")) {
      if (n.has("centers")) throw n.error("give either N and axis or explicit centers", "centers");
      m.N = n.req<int>("N");
      if (*m.N < 0) throw n.error("must be non-negative", "N");
      m.axis = read_point(n.at("axis"), dim);
      m.spec = build_gamma_N(profile, *m.N, m.axis);
      if (n.has("weights")) throw n.error("γ_N uses unit weights", "weights");
    } else {
      std::vector<Point> centers;
      for (auto c : n.at("centers").items()) centers.push_back(read_point(c, dim));
      std::vector<double> weights = n.has("weights") ? n.req<std::vector<double>>("weights")
                                                     : std::vector<double>(centers.size(), 1.0);
      if (n.has("axis")) m.axis = read_point(n.at("axis"), dim);
      m.spec = build_weighted(profile, std::move(centers), std::move(weights));
    }
    m.spec.variant = variant;
    m.spec.validate();
  } catch (const std::invalid_argument& ex) {
    throw n.error(ex.what());
  }
  n.finish();
  return m;
}

// Per-kind parameters with defaults filled in; returns the suite the kind belongs to.
struct KindInfo {
  Suite suite;
  bool needs_multiplier;
};

const std::map<std::string, KindInfo>& kinds() {
  static const std::map<std::string, KindInfo> k = {
      {"profile-exactness", {Suite::VerifyPointwise, false}},
      {"pair-bound", {Suite::VerifyPointwise, false}},
      {"claim-sign", {Suite::VerifyPointwise, false}},
      {"log-law", {Suite::VerifyPointwise, true}},
      {"tube", {Suite::VerifyPointwise, true}},
      {"general-lower-bound", {Suite::VerifyPointwise, true}},
      {"sym-morawetz", {Suite::VerifyPointwise, false}},
      {"axial-conditions", {Suite::VerifyPointwise, false}},
      {"time-uniformity", {Suite::VerifyPointwise, false}},
      {"nondefinite-condition", {Suite::VerifyPointwise, false}},
      {"partition-of-unity", {Suite::VerifyPointwise, false}},
      {"norm-decay", {Suite::VerifyPointwise, false}},
      {"commutator-consistency", {Suite::Certify, true}},
      {"certificate", {Suite::Certify, true}},
      {"scan", {Suite::Scan, true}},
      {"evolution", {Suite::Evolve, true}},
      {"decay", {Suite::Evolve, false}},
  };
  return k;
}

bool is_bump_family(const Potential& V) { return V.bump_count() > 0; }

json read_packet(Node n, int dim) {
  json p;
  p["center"] = read_point(n.at("center"), dim);
  p["width"] = n.positive("width");
  p["momentum"] = n.has("momentum") ? read_point(n.at("momentum"), dim) : Point(dim, 0.0);
  n.finish();
  return p;
}

json read_params(Node& n, const std::string& kind, const ScenarioConfig& sc, const Potential& V) {
  const int dim = sc.profile.dim();
  json p;
  auto need_bumps = [&] {
    if (!is_bump_family(V)) throw n.error("check '" + kind + "' needs a radial-bump family potential");
  };
  auto need_static = [&] {
    if (V.is_time_dependent()) throw n.error("check '" + kind + "' needs a static potential");
  };
  auto ints = [&](const std::string& key, std::vector<int> def, int min_value) {
    auto v = n.has(key) ? n.req<std::vector<int>>(key) : def;
    if (v.empty()) throw n.error("must not be empty", key);
    for (int x : v) {
      if (x < min_value) throw n.error("entries must be at least " + std::to_string(min_value), key);
    }
    return v;
  };
  auto sample_grid = [&](const std::string& key, double extent, int points) {
    return n.has(key) ? read_grid(n.at(key), dim) : GridSpec::cube(dim, extent, points);
  };
  auto grid_json = [](const GridSpec& g) {
    return json{{"extent", g.extent}, {"points", g.points}, {"boundary", to_string(g.boundary)}};
  };

  // A single N selects γ_N along the scenario axis in place of the declared multiplier.
  if ((kind == "commutator-consistency" || kind == "certificate" || kind == "evolution") && n.has("N")) {
    const int N = n.req<int>("N");
    if (N < 0) throw n.error("must be non-negative", "N");
    if (sc.multiplier->axis.empty()) throw n.error("N needs a multiplier axis", "N");
    p["N"] = N;
  }
  if (kind == "profile-exactness") {
    p["samples"] = n.opt<int>("samples", 100);
    p["hessian_tol"] = n.positive("hessian_tol", 1e-10);
    p["fd_tol"] = n.positive("fd_tol", 1e-6);
    p["max_radius"] = n.positive("max_radius", 10.0);
  } else if (kind == "pair-bound") {
    need_bumps();
    p["samples"] = n.opt<int>("samples", 100000);
    p["tol"] = n.positive("tol", 1e-12);
    p["max_offset"] = n.positive("max_offset", 4.0 * V.bump_shape().radius);
  } else if (kind == "claim-sign") {
    p["samples"] = n.opt<int>("samples", 10000);
    p["tol"] = n.positive("tol", 1e-12);
    p["range"] = n.positive("range", 4.0);
  } else if (kind == "log-law") {
    need_bumps();
    p["N"] = ints("N", {8, 16, 32, 64, 128}, 1);
    if (p["N"].size() < 3) throw n.error("at least three N values are required", "N");
    p["x1"] = n.opt<std::vector<double>>("x1", {0.0, 0.25, -0.25, 0.5, -0.5});
    p["deltas"] = n.has("deltas") ? positive_list(n.at("deltas"), 2) : std::vector<double>{0.1, 0.2};
    p["min_r2"] = n.positive("min_r2", 0.9);
    p["prefactor_tol"] = n.positive("prefactor_tol", 0.3);
  } else if (kind == "tube") {
    need_bumps();
    need_static();
    p["N"] = ints("N", {0, 1, 2, 4, 8, 16}, 0);
    p["delta_target"] = n.positive("delta_target", 0.5);
    p["floor_tol"] = n.positive("floor_tol", 1e-12);
    p["dump"] = n.opt<bool>("dump", true);
  } else if (kind == "general-lower-bound") {
    need_static();
    const double L0 = std::isfinite(V.axial_support()) ? V.axial_support() : 1.0;
    p["N"] = ints("N", {0, 1, 2, 4, 8}, 0);
    p["samples"] = n.opt<int>("samples", 100000);
    p["L"] = n.positive("L", L0);
    p["sample_extent"] = n.has("sample_extent") ? read_point(n.at("sample_extent"), dim) : [&] {
      Point e(dim, 1.0);
      e[0] = p["L"].get<double>() + 1.0;
      return e;
    }();
    p["tol"] = n.positive("tol", 1e-12);
  } else if (kind == "sym-morawetz") {
    need_static();
    p["x_prime"] = read_point(n.at("x_prime"), dim);
    p["L"] = n.positive("L");
    p["samples"] = n.opt<int>("samples", 10000);
    p["sample_extent"] = n.positive("sample_extent", p["L"].get<double>() + 4.0);
    p["tol"] = n.positive("tol", 1e-12);
  } else if (kind == "axial-conditions") {
    p["deltas"] = n.has("deltas") ? positive_list(n.at("deltas")) : std::vector<double>{0.5, 1.0, 2.0};
    p["sample"] = grid_json(sample_grid("sample", 6.0, 48));
    p["expect"] = n.opt<std::string>("expect", "pass");
    if (p["expect"] != "pass" && p["expect"] != "fail") throw n.error("expected 'pass' or 'fail'", "expect");
  } else if (kind == "time-uniformity") {
    if (!V.is_time_dependent()) throw n.error("time-uniformity needs a moving potential");
    p["times"] = n.opt<std::vector<double>>("times", {0.0, 0.25, 0.5, 0.75, 1.0, 1.5});
    p["deltas"] = n.has("deltas") ? positive_list(n.at("deltas")) : std::vector<double>{0.5, 1.0, 2.0};
    p["sample"] = grid_json(sample_grid("sample", 6.0, 48));
    p["envelope_tol"] = n.positive("envelope_tol", 0.05);
  } else if (kind == "nondefinite-condition") {
    need_static();
    const double lambda = n.req<double>("lambda");
    if (!(lambda > 0.0 && lambda < 1.0)) throw n.error("must lie in (0, 1)", "lambda");
    p["lambda"] = lambda;
    p["sample"] = grid_json(sample_grid("sample", 8.0, 32));
  } else if (kind == "partition-of-unity") {
    p["K"] = n.has("K") ? positive_list(n.at("K")) : std::vector<double>{0.25, 1.0, 4.0};
    p["samples"] = n.opt<int>("samples", 4097);
    p["tol"] = n.positive("tol", 1e-10);
  } else if (kind == "norm-decay") {
    p["K"] = n.positive("K", 0.05);
    p["L"] = n.positive("L", 4.0);
    p["deltas"] = n.has("deltas") ? positive_list(n.at("deltas"), 2) : std::vector<double>{0.5, 1.0, 2.0};
    p["rel_tol"] = n.positive("rel_tol", 0.3);
    p["power_tol"] = n.positive("power_tol", 1e-6);
  } else if (kind == "commutator-consistency") {
    p["points"] = ints("points", {24, 48}, 4);
    if (p["points"].size() < 2) throw n.error("at least two grids are required", "points");
    p["packet"] = read_packet(n.at("packet"), dim);
    p["order"] = n.positive("order", 2.0);
    p["order_tol"] = n.positive("order_tol", 0.3);
  } else if (kind == "certificate") {
    const std::string form = n.opt<std::string>("form", "residual-kinetic");
    p["form"] = form;
    if (form == "residual-kinetic") {
      p["epsilon"] = n.positive("epsilon", 0.1);
    } else if (form == "kinetic-lower-bound") {
    } else if (form == "nondefinite") {
      need_static();
      const double lambda = n.req<double>("lambda");
      if (!(lambda > 0.0 && lambda < 1.0)) throw n.error("must lie in (0, 1)", "lambda");
      p["lambda"] = lambda;
    } else if (form == "high-energy") {
      need_static();
      p["epsilon"] = n.positive("epsilon", 1.0);
      p["K"] = n.positive("K");
    } else {
      throw n.error("unknown certificate form '" + form + "'", "form");
    }
    if (V.is_time_dependent()) {
      p["times"] = n.req<std::vector<double>>("times");
      if (p["times"].empty()) throw n.error("must not be empty", "times");
    }
    p["rel_floor"] = n.positive("rel_floor", 1e-8);
  } else if (kind == "scan") {
    const std::string param = n.req<std::string>("parameter");
    p["parameter"] = param;
    if (param == "N") {
      if (!sc.multiplier || sc.multiplier->axis.empty()) throw n.error("an N scan needs a multiplier axis");
      auto ladder = ints("ladder", {0, 1, 2, 4, 8, 16}, 0);
      p["ladder"] = ladder;
      p["epsilon"] = n.positive("epsilon", 0.1);
      p["refine"] = n.opt<bool>("refine", false);
      if (V.is_time_dependent()) p["times"] = n.req<std::vector<double>>("times");
    } else if (param == "K") {
      need_static();
      p["ladder"] = positive_list(n.at("ladder"));
      p["epsilon"] = n.positive("epsilon", 1.0);
      const std::string units = n.opt<std::string>("units", "absolute");
      if (units != "absolute" && units != "weight-norm") throw n.error("expected 'absolute' or 'weight-norm'", "units");
      p["units"] = units;
      p["require_flip"] = n.opt<bool>("require_flip", true);
    } else {
      throw n.error("scan parameter must be 'N' or 'K'", "parameter");
    }
    p["rel_floor"] = n.positive("rel_floor", 1e-8);
  } else if (kind == "evolution") {
    p["scheme"] = n.opt<std::string>("scheme", "crank-nicolson");
    try {
      scheme_from_string(p["scheme"]);
    } catch (const std::invalid_argument& ex) {
      throw n.error(ex.what(), "scheme");
    }
    p["dt"] = n.has("dt") ? positive_list(n.at("dt")) : std::vector<double>{0.02, 0.01, 0.005};
    p["T"] = n.positive("T", 1.0);
    p["packet"] = read_packet(n.at("packet"), dim);
    p["norm_tol"] = n.positive("norm_tol", 1e-9);
    p["order"] = n.positive("order", 2.0);
    p["order_tol"] = n.positive("order_tol", 0.3);
    p["order_gate"] = n.opt<bool>("order_gate", true);
    p["dip_shrink"] = n.positive("dip_shrink", 3.0);
    p["conservation_steps"] = n.opt<int>("conservation_steps", 0);
  } else if (kind == "decay") {
    p["scheme"] = n.opt<std::string>("scheme", "strang");
    try {
      scheme_from_string(p["scheme"]);
    } catch (const std::invalid_argument& ex) {
      throw n.error(ex.what(), "scheme");
    }
    p["dt"] = n.positive("dt", 0.05);
    p["horizons"] = n.has("horizons") ? positive_list(n.at("horizons"), 3) : std::vector<double>{5.0, 10.0, 20.0};
    p["packet"] = read_packet(n.at("packet"), dim);
    p["growth_tol"] = n.positive("growth_tol", 0.1);
    p["projected"] = n.opt<bool>("projected", false);
  }
  return p;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    const std::size_t at = std::min<std::size_t>(ex.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + (at ? at - 1 : 0), '\n'));
    throw ConfigError("line " + std::to_string(line) + ": " + ex.what(), "", line);
  }
  const LineIndex idx(text);
  Node root(doc, "", &idx);
  ScenarioConfig sc;
  sc.source = doc;
  sc.name = root.opt<std::string>("name", "scenario");
  sc.seed = root.opt<unsigned>("seed", 1u);
  if (root.has("output")) sc.output = root.req<std::string>("output");

  if (auto pn = root.find("profile")) {
    const double a = pn->positive("a", 1.0);
    const double sigma = pn->positive("sigma", 1.0);
    const int n = pn->opt<int>("n", 3);
    try {
      sc.profile = RadialProfile(a, sigma, n);
    } catch (const std::invalid_argument& ex) {
      throw pn->error(ex.what());
    }
    pn->finish();
  }
  const int dim = sc.profile.dim();
  sc.grid = root.has("grid") ? read_grid(root.at("grid"), dim) : GridSpec::cube(dim, 12.0, 48);
  sc.potential = root.has("potential") ? read_potential(root.at("potential"), dim) : Potential::zero(dim);
  if (root.has("multiplier")) sc.multiplier = read_multiplier(root.at("multiplier"), sc.profile);

  std::set<std::string> names;
  if (auto cn = root.find("checks")) {
    for (auto c : cn->items()) {
      CheckConfig cc;
      cc.kind = c.req<std::string>("kind");
      const auto it = kinds().find(cc.kind);
      if (it == kinds().end()) throw c.error("unknown check kind '" + cc.kind + "'", "kind");
      cc.name = c.opt<std::string>("name", cc.kind);
      if (!names.insert(cc.name).second) throw c.error("duplicate check name '" + cc.name + "'", "name");
      cc.suite = it->second.suite;
      if (it->second.needs_multiplier && !sc.multiplier) {
        throw c.error("check '" + cc.name + "' references a multiplier block that is not declared");
      }
      if (c.has("grid")) cc.grid = read_grid(c.at("grid"), dim);
      if (c.has("potential")) cc.potential = read_potential(c.at("potential"), dim);
      cc.params = read_params(c, cc.kind, sc, cc.potential.value_or(sc.potential));
      c.finish();
      sc.checks.push_back(std::move(cc));
    }
  }
  root.finish();
  return sc;
}

ScenarioConfig load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

fs::path preset_directory() {
  if (const char* env = std::getenv("MVF_PRESET_DIR")) return env;
  return MVF_PRESET_DIR;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(preset_directory(), ec)) {
    if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ScenarioConfig load_preset(const std::string& name) {
  const fs::path p = preset_directory() / (name + ".json");
  if (!fs::exists(p)) throw ConfigError("unknown preset '" + name + "'");
  return load_scenario(p);
}

void write_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------------------------------------------------
// Check runners

namespace {

struct Context {
  const ScenarioConfig& sc;
  const CheckConfig& check;
  GridSpec grid;
  Potential V;
  std::optional<fs::path> out;
  CheckResult& result;
  std::mt19937_64 rng;

  const json& p() const { return check.params; }

  MultiplierSpec multiplier() const {
    const auto& m = *sc.multiplier;
    if (p().contains("N")) return build_gamma_N(sc.profile, p()["N"].get<int>(), m.axis);
    return m.spec;
  }

  CertifyOptions certify_options() const {
    CertifyOptions co;
    co.rel_floor = p().value("rel_floor", 1e-8);
    co.lanczos.seed = sc.seed;
    return co;
  }

  void artifact(const std::string& suffix, const std::string& contents) {
    if (!out) return;
    const std::string file = check.name + suffix;
    write_atomic(*out / file, contents);
    result.artifacts.push_back(file);
  }

  void dump(const std::string& suffix, const GridSpec& g, std::span<const double> v) {
    if (!out) return;
    std::ostringstream os(std::ios::binary);
    write_real_dump(os, g, v);
    artifact(suffix, os.str());
  }
};

Verdict verdict_of(bool pass) { return pass ? Verdict::Pass : Verdict::Fail; }

Point random_in_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Point x(dim);
  double s = 0.0;
  for (auto& v : x) {
    v = nd(rng);
    s += v * v;
  }
  const double r = radius * std::pow(ud(rng), 1.0 / dim) / std::sqrt(s);
  for (auto& v : x) v *= r;
  return x;
}

json grid_json(const GridSpec& g) {
  return json{{"extent", g.extent}, {"points", g.points}, {"boundary", to_string(g.boundary)}};
}

GridSpec grid_from_json(const json& j, int dim) {
  GridSpec g;
  g.dim = dim;
  g.extent = j["extent"].get<std::vector<double>>();
  g.points = j["points"].get<std::vector<int>>();
  g.boundary = boundary_from_string(j["boundary"]);
  return g;
}

void run_profile_exactness(Context& c) {
  const auto& prof = c.sc.profile;
  const int n = prof.dim();
  const int samples = c.p()["samples"];
  const double rmax = c.p()["max_radius"];
  std::uniform_real_distribution<double> ud(-rmax, rmax);
  double hess_err = 0.0, fd_err = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(n), cc(n);
    for (int j = 0; j < n; ++j) {
      x(j) = ud(c.rng);
      cc(j) = ud(c.rng);
    }
    const double rho = (x - cc).norm();
    if (rho < 0.05) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prof.hessian_F(x, cc));
    std::vector<double> law(n, prof.f_over_r(rho));
    law[0] = prof.g2(rho);
    std::sort(law.begin(), law.end());
    for (int j = 0; j < n; ++j) hess_err = std::max(hess_err, std::abs(es.eigenvalues()(j) - law[j]));

    // Fourth-order five-point differences in ρ.
    const double h = 1e-3;
    ProfileStack s5[5];
    for (int k = 0; k < 5; ++k) s5[k] = prof.derivative_stack(rho + (k - 2) * h);
    const auto& st = s5[2];
    auto d1 = [&](double ProfileStack::*m) {
      return (-(s5[4].*m) + 8 * (s5[3].*m) - 8 * (s5[1].*m) + (s5[0].*m)) / (12 * h);
    };
    auto d2 = [&](double ProfileStack::*m) {
      return (-(s5[4].*m) + 16 * (s5[3].*m) - 30 * (s5[2].*m) + 16 * (s5[1].*m) - (s5[0].*m)) / (12 * h * h);
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    const double k = (n - 1) / rho;
    fd_err = std::max({fd_err, rel(d1(&ProfileStack::g), st.dg), rel(d2(&ProfileStack::g), st.d2g),
                       rel(d1(&ProfileStack::f), st.g * st.g), rel(d1(&ProfileStack::F), st.f),
                       rel(d2(&ProfileStack::g) + k * d1(&ProfileStack::g), st.lap_g),
                       rel(d2(&ProfileStack::F) + k * d1(&ProfileStack::F), st.lap_F),
                       rel(d2(&ProfileStack::lap_F) + k * d1(&ProfileStack::lap_F), st.bilap_F)});
  }
  c.result.metrics = {{"samples", samples}, {"hessian_max_error", hess_err}, {"fd_max_error", fd_err}};
  c.result.verdict = verdict_of(hess_err <= c.p()["hessian_tol"].get<double>() && fd_err <= c.p()["fd_tol"].get<double>());
}

void run_pair_bound(Context& c) {
  const auto& V = c.V;
  const auto shape = V.bump_shape();
  const int n = V.dim();
  const int samples = c.p()["samples"];
  const double tol = c.p()["tol"], cmax = c.p()["max_offset"];
  std::uniform_real_distribution<double> uc(0.0, cmax);
  int violations = 0;
  double worst = kInf;
  for (int s = 0; s < samples; ++s) {
    const Point x = random_in_ball(c.rng, n, shape.radius);
    Point cc(n, 0.0);
    cc[0] = uc(c.rng);
    const auto pb = pair_bound_check(x, cc, shape, c.sc.profile);
    worst = std::min(worst, pb.value - pb.bound);
    if (pb.value < pb.bound - tol) ++violations;
  }
  c.result.metrics = {{"samples", samples}, {"violations", violations}, {"worst_margin", worst}};
  c.result.verdict = verdict_of(violations == 0);
}

void run_claim_sign(Context& c) {
  const int n = c.sc.profile.dim();
  const int samples = c.p()["samples"];
  const double range = c.p()["range"], tol = c.p()["tol"];
  std::uniform_real_distribution<double> uk(-range, range), uu(0.0, 1.0);
  int failures = 0, branches[3] = {0, 0, 0};
  for (int s = 0; s < samples; ++s) {
    double k1 = uk(c.rng), k2 = uk(c.rng);
    if (k1 > k2) std::swap(k1, k2);
    Point x = random_in_ball(c.rng, n, range);
    x[0] = k1 + uu(c.rng) * (k2 - k1);
    if (s % 10 == 0) x[0] = 0.5 * (k1 + k2);
    const auto r = claim_monotone_check(k1, k2, x, c.sc.profile, tol);
    ++branches[r.expected + 1];
    if (!r.holds) ++failures;
  }
  c.result.metrics = {{"samples", samples},
                      {"failures", failures},
                      {"nearer_k1", branches[0]},
                      {"equidistant", branches[1]},
                      {"nearer_k2", branches[2]}};
  c.result.verdict = verdict_of(failures == 0);
}

void run_log_law(Context& c) {
  const auto& V = c.V;
  const auto Ns = c.p()["N"].get<std::vector<int>>();
  const auto x1 = c.p()["x1"].get<std::vector<double>>();
  const auto deltas = c.p()["deltas"].get<std::vector<double>>();
  const int n = V.dim();
  json fits = json::array();
  std::vector<double> growth;
  bool ok = true;
  for (double d : deltas) {
    std::vector<Point> probes;
    for (double s : x1) {
      Point x(n, 0.0);
      x[0] = s;
      x[1] = d;
      probes.push_back(x);
    }
    const auto fit = log_accumulation_fit(V.bump_shape(), c.sc.profile, c.sc.multiplier->axis, Ns, probes);
    growth.push_back(fit.slope);
    ok = ok && fit.slope > 0.0 && fit.r2 >= c.p()["min_r2"].get<double>();
    fits.push_back({{"delta", d}, {"minima", fit.minima}, {"growth", fit.slope}, {"r2", fit.r2}});
  }
  json ratios = json::array();
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    const double expected = (deltas[i] / deltas[0]) * (deltas[i] / deltas[0]);
    const double ratio = growth[i] / growth[0];
    ratios.push_back({{"delta", deltas[i]}, {"ratio", ratio}, {"expected", expected}});
    ok = ok && std::abs(ratio / expected - 1.0) <= c.p()["prefactor_tol"].get<double>();
  }
  c.result.metrics = {{"N", Ns}, {"fits", fits}, {"prefactor_ratios", ratios}};
  c.result.verdict = verdict_of(ok);
}

void run_tube(Context& c) {
  const auto& V = c.V;
  const auto Ns = c.p()["N"].get<std::vector<int>>();
  const auto lad = tube_ladder(V, c.sc.profile, c.sc.multiplier->axis, Ns, c.grid);
  const double min_margin = *std::min_element(lad.floor_margin.begin(), lad.floor_margin.end());
  const bool ok = lad.nonincreasing && lad.tube_radius.back() <= c.p()["delta_target"].get<double>() &&
                  min_margin >= -c.p()["floor_tol"].get<double>();
  c.result.metrics = {{"N", lad.N},
                      {"tube_radius", lad.tube_radius},
                      {"axial_extent", lad.axial_extent},
                      {"floor_margin", lad.floor_margin},
                      {"nonincreasing", lad.nonincreasing},
                      {"grid", grid_json(c.grid)}};
  c.result.verdict = verdict_of(ok);
  if (c.p()["dump"].get<bool>()) {
    const auto spec = build_gamma_N(c.sc.profile, Ns.back(), c.sc.multiplier->axis);
    const auto reg = negative_region(V, spec, c.grid, std::size_t{0});
    std::vector<double> v(reg.indicator.begin(), reg.indicator.end());
    c.dump(".region.bin", c.grid, v);
  }
}

void run_general_lower_bound(Context& c) {
  const auto& V = c.V;
  const int n = V.dim();
  const auto Ns = c.p()["N"].get<std::vector<int>>();
  const auto ext = c.p()["sample_extent"].get<std::vector<double>>();
  const int samples = c.p()["samples"];
  const double L = c.p()["L"], tol = c.p()["tol"];
  const Point axis = c.sc.multiplier->axis.empty() ? c.sc.multiplier->spec.centers.front() : c.sc.multiplier->axis;
  json per = json::array();
  int total = 0;
  for (int N : Ns) {
    const auto spec = c.sc.multiplier->N ? build_gamma_N(c.sc.profile, N, axis) : c.sc.multiplier->spec;
    int violations = 0;
    double worst = kInf;
    std::vector<std::uniform_real_distribution<double>> ud;
    for (double e : ext) ud.emplace_back(-e, e);
    for (int s = 0; s < samples; ++s) {
      Point x(n);
      for (int j = 0; j < n; ++j) x[j] = ud[j](c.rng);
      const auto r = general_lower_bound_check(V, spec, x, L, tol);
      worst = std::min(worst, r.value - r.floor);
      if (!r.holds) ++violations;
    }
    total += violations;
    per.push_back({{"N", N}, {"violations", violations}, {"worst_margin", worst}});
    if (!c.sc.multiplier->N) break;
  }
  c.result.metrics = {{"samples_per_N", samples}, {"L", L}, {"per_N", per}};
  c.result.verdict = verdict_of(total == 0);
}

void run_sym_morawetz(Context& c) {
  const auto& V = c.V;
  const int n = V.dim();
  const auto xp = c.p()["x_prime"].get<std::vector<double>>();
  const double L = c.p()["L"], ext = c.p()["sample_extent"], tol = c.p()["tol"];
  const int samples = c.p()["samples"];
  std::uniform_real_distribution<double> ux(L, ext), uy(-ext, ext), us(0.0, 1.0);
  int violations = 0;
  double worst = kInf;
  for (int s = 0; s < samples; ++s) {
    Point x(n);
    x[0] = (us(c.rng) < 0.5 ? -1.0 : 1.0) * ux(c.rng);
    if (std::abs(x[0]) <= L) x[0] = std::copysign(std::nextafter(L, kInf), x[0]);
    for (int j = 1; j < n; ++j) x[j] = uy(c.rng);
    const double v = sym_morawetz_check(V, xp, x, L);
    worst = std::min(worst, v);
    if (v < -tol) ++violations;
  }
  c.result.metrics = {{"samples", samples}, {"violations", violations}, {"min_value", worst}};
  c.result.verdict = verdict_of(violations == 0);
}

json condition_json(const ConditionResult& r) { return {{"pass", r.pass}, {"worst", r.worst}}; }

json axial_json(const AxialConditionReport& r) {
  json lam = json::array();
  for (const auto& [d, l] : r.lambda) lam.push_back({d, l});
  return {{"nonneg", condition_json(r.nonneg)},         {"c1", condition_json(r.c1)},
          {"transverse", condition_json(r.transverse)}, {"axial", condition_json(r.axial)},
          {"every_axis", condition_json(r.every_axis)}, {"control", condition_json(r.control)},
          {"L", r.L},
          {"lambda", lam},
          {"lambda_monotone", r.lambda_monotone},
          {"samples", r.samples},
          {"all_pass", r.all_pass()}};
}

void run_axial_conditions(Context& c) {
  const auto sample = grid_from_json(c.p()["sample"], c.sc.profile.dim());
  const auto deltas = c.p()["deltas"].get<std::vector<double>>();
  const auto& V = c.V;
  const auto rep = V.is_time_dependent() ? check_axial_conditions(V, sample, deltas, 0.0)
                                         : check_axial_conditions(V, sample, deltas);
  c.result.metrics = axial_json(rep);
  c.result.verdict = verdict_of(rep.all_pass() == (c.p()["expect"] == "pass"));
}

void run_time_uniformity(Context& c) {
  const auto sample = grid_from_json(c.p()["sample"], c.sc.profile.dim());
  const auto deltas = c.p()["deltas"].get<std::vector<double>>();
  const auto times = c.p()["times"].get<std::vector<double>>();
  const auto rep = check_time_uniformity(c.V, times, sample, deltas, c.p()["envelope_tol"]);
  json per = json::array();
  for (std::size_t i = 0; i < rep.reports.size(); ++i) {
    per.push_back({{"t", rep.times[i]}, {"L", rep.reports[i].L}, {"all_pass", rep.reports[i].all_pass()}});
  }
  c.result.metrics = {{"L_static", rep.L_static}, {"L_bound", rep.L_bound}, {"L_observed", rep.L_observed},
                      {"envelope", rep.envelope},  {"times", per},          {"reason", rep.reason}};
  c.result.verdict = verdict_of(rep.pass);
}

void run_nondefinite_condition(Context& c) {
  const auto sample = grid_from_json(c.p()["sample"], c.sc.profile.dim());
  const auto pts = sample.coordinate_table();
  const auto rep = check_nondefinite_condition(c.V, c.sc.profile, c.p()["lambda"], pts);
  c.result.metrics = {{"min_margin", rep.min_margin}, {"where", rep.where}, {"samples", sample.size()}};
  c.result.verdict = verdict_of(rep.pass);
  c.dump(".margin.bin", sample, rep.margins);
}

void run_partition_of_unity(Context& c) {
  const auto Ks = c.p()["K"].get<std::vector<double>>();
  const int samples = c.p()["samples"];
  const LaplacianCalculus calc(c.grid);
  double scalar = 0.0, op = 0.0;
  std::normal_distribution<double> nd;
  Field psi(c.grid);
  for (auto& v : psi.data()) v = {nd(c.rng), nd(c.rng)};
  psi *= 1.0 / norm(psi);
  for (double K : Ks) {
    const CutoffSpec P{K, CutoffPart::P}, Q{K, CutoffPart::Q};
    for (int i = 0; i < samples; ++i) {
      const double lam = calc.upper() * i / std::max(samples - 1, 1);
      scalar = std::max(scalar, std::abs(P(lam) + Q(lam) - 1.0));
    }
    Field sum = apply_cutoff(calc, P, psi) + apply_cutoff(calc, Q, psi);
    op = std::max(op, norm(sum - psi));
  }
  c.result.metrics = {{"scalar_defect", scalar}, {"operator_defect", op}, {"K", Ks}};
  const double tol = c.p()["tol"];
  c.result.verdict = verdict_of(scalar <= tol && op <= tol);
}

void run_norm_decay(Context& c) {
  if (c.grid.boundary != Boundary::Dirichlet) throw std::invalid_argument("norm-decay needs a Dirichlet grid");
  const auto deltas = c.p()["deltas"].get<std::vector<double>>();
  const CutoffSpec Q{c.p()["K"], CutoffPart::Q};
  const double L = c.p()["L"];
  std::vector<double> radii, values;
  json rows = json::array();
  for (double d : deltas) {
    const auto est = norm_chi_Q_x(d, Q, c.grid, L, c.p()["power_tol"], 2000, c.sc.seed);
    const double rad = area_matched_radius(c.grid, d);
    rows.push_back({{"delta", d}, {"radius", rad}, {"norm", est.value}, {"converged", est.converged}});
    radii.push_back(rad);
    values.push_back(est.value);
  }
  const double slope = fitted_order(radii, values);
  const double expected = 0.5 * (c.grid.dim - 1);
  c.result.metrics = {{"rows", rows}, {"exponent", slope}, {"expected", expected}};
  c.result.verdict = verdict_of(std::abs(slope / expected - 1.0) <= c.p()["rel_tol"].get<double>());
}

Field packet_from(const json& p, const GridSpec& g) {
  return gaussian_packet(g, p["center"].get<Point>(), p["width"], p["momentum"].get<Point>());
}

void run_commutator_consistency(Context& c) {
  const auto pts = c.p()["points"].get<std::vector<int>>();
  const auto spec = c.multiplier();
  const int n = c.sc.profile.dim();
  std::vector<double> hs, defects;
  json rows = json::array();
  for (int P : pts) {
    GridSpec g = c.grid;
    g.points.assign(n, P);
    const auto psi = packet_from(c.p()["packet"], g);
    std::vector<double> re(psi.size());
    for (std::size_t i = 0; i < re.size(); ++i) re[i] = psi[i].real();
    const auto kin = assemble_kinetic(g, spec);
    const auto comp = composition_commutator(g, Potential::zero(n), spec);
    const double qk = rayleigh_quotient(*kin, re), qc = rayleigh_quotient(*comp, re);
    const double defect = std::abs(qk - qc) / std::abs(qk);
    hs.push_back(g.min_spacing());
    defects.push_back(defect);
    rows.push_back({{"points", P}, {"h", g.min_spacing()}, {"relative_defect", defect}});
  }
  const double order = fitted_order(hs, defects);
  c.result.metrics = {{"rows", rows}, {"order", order}};
  c.result.verdict =
      verdict_of(std::abs(order - c.p()["order"].get<double>()) <= c.p()["order_tol"].get<double>());
}

OperatorPtr certificate_form(const std::string& form, const GridSpec& g, const Potential& V, const MultiplierSpec& spec,
                             const json& p, std::optional<double> t) {
  if (form == "residual-kinetic") {
    const auto comm = assemble_commutator(g, V, spec, t);
    return residual_against_kinetic(comm, p["epsilon"]);
  }
  if (form == "kinetic-lower-bound") {
    return operator_sum(1.0, assemble_kinetic(g, spec), -1.0, lower_bound_form(g, spec));
  }
  const auto comm = assemble_commutator(g, V, spec);
  return operator_sum(1.0, comm.total, -(1.0 - p["lambda"].get<double>()), lower_bound_form(g, spec));
}

void run_certificate(Context& c) {
  const std::string form = c.p()["form"];
  const auto spec = c.multiplier();
  const auto co = c.certify_options();
  if (form == "high-energy") {
    HighEnergyOptions ho;
    ho.certify = co;
    const HighEnergyProblem prob(c.grid, c.V, spec, c.p()["epsilon"], ho);
    const auto cert = prob.certify_at(c.p()["K"]);
    c.result.metrics = to_json(cert);
    c.result.metrics["trivial"] = c.p()["K"].get<double>() >= prob.spectral_upper();
    c.result.verdict = cert.verdict;
    return;
  }
  std::vector<std::optional<double>> times{std::nullopt};
  if (c.p().contains("times")) {
    times.clear();
    for (double t : c.p()["times"]) times.push_back(t);
  }
  json certs = json::array();
  Verdict v = Verdict::Pass;
  for (auto t : times) {
    const auto op = certificate_form(form, c.grid, c.V, spec, c.p(), t);
    json params = {{"grid", grid_json(c.grid)}, {"check", c.p()}};
    if (t) params["t"] = *t;
    const auto cert = certify(*op, form, params, co);
    certs.push_back(to_json(cert));
    if (cert.verdict == Verdict::Fail) {
      v = Verdict::Fail;
      if (!cert.witness.empty()) c.dump(".witness.bin", c.grid, cert.witness);
    } else if (cert.verdict == Verdict::Inconclusive && v == Verdict::Pass) {
      v = Verdict::Inconclusive;
    }
  }
  c.result.metrics = {{"certificates", certs}};
  c.result.verdict = v;
}

ScanResult n_scan(Context& c, const GridSpec& g) {
  const auto ladder = c.p()["ladder"].get<std::vector<double>>();
  const auto co = c.certify_options();
  std::vector<std::optional<double>> times{std::nullopt};
  if (c.p().contains("times")) {
    times.clear();
    for (double t : c.p()["times"]) times.push_back(t);
  }
  return scan("N", ladder, [&](double N) {
    const auto spec = build_gamma_N(c.sc.profile, static_cast<int>(N), c.sc.multiplier->axis);
    std::optional<PositivityCertificate> worst;
    for (auto t : times) {
      const auto op = certificate_form("residual-kinetic", g, c.V, spec, c.p(), t);
      json params = {{"N", static_cast<int>(N)}, {"epsilon", c.p()["epsilon"]}, {"grid", grid_json(g)}};
      if (t) params["t"] = *t;
      auto cert = certify(*op, "residual-kinetic", params, co);
      if (!worst || cert.estimate < worst->estimate) worst = std::move(cert);
    }
    return *worst;
  });
}

void run_scan(Context& c) {
  if (c.p()["parameter"] == "N") {
    const auto coarse = n_scan(c, c.grid);
    c.result.metrics = {{"scan", to_json(coarse)}};
    bool ok = coarse.first_pass.has_value() && coarse.monotone;
    c.result.metrics["first_pass"] = coarse.first_pass ? json(coarse.ladder[*coarse.first_pass]) : json(nullptr);
    if (c.p()["refine"].get<bool>()) {
      const auto fine = n_scan(c, c.grid.refined());
      const bool stable = fine.verdicts() == coarse.verdicts();
      c.result.metrics["refined"] = to_json(fine);
      c.result.metrics["refined_first_pass"] = fine.first_pass ? json(fine.ladder[*fine.first_pass]) : json(nullptr);
      c.result.metrics["stable"] = stable;
      ok = ok && stable && fine.monotone;
    }
    c.result.verdict = verdict_of(ok);
    return;
  }
  HighEnergyOptions ho;
  ho.certify = c.certify_options();
  const HighEnergyProblem prob(c.grid, c.V, c.multiplier(), c.p()["epsilon"], ho);
  std::vector<double> ladder = c.p()["ladder"].get<std::vector<double>>();
  const double unit = c.p()["units"] == "weight-norm" ? prob.weight_norm() : 1.0;
  for (auto& K : ladder) K *= unit;
  const auto res = scan("K", ladder, [&](double K) { return prob.certify_at(K); });
  std::vector<bool> trivial;
  for (double K : ladder) trivial.push_back(K >= prob.spectral_upper());
  bool ok = res.first_pass.has_value() && res.monotone;
  if (ok) ok = !trivial[*res.first_pass];
  if (ok && c.p()["require_flip"].get<bool>()) ok = *res.first_pass > 0;
  c.result.metrics = {{"scan", to_json(res)},
                      {"first_pass", res.first_pass ? json(ladder[*res.first_pass]) : json(nullptr)},
                      {"weight_norm", prob.weight_norm()},
                      {"spectral_upper", prob.spectral_upper()},
                      {"trivial", trivial}};
  c.result.verdict = verdict_of(ok);
}

void run_evolution(Context& c) {
  const auto dts = c.p()["dt"].get<std::vector<double>>();
  const auto psi0 = packet_from(c.p()["packet"], c.grid);
  Observables obs;
  obs.gamma = c.multiplier();
  json runs = json::array();
  std::vector<double> devs, dips;
  bool budget_ok = true;
  double drift = 0.0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    EvolutionConfig cfg;
    cfg.dt = dts[i];
    cfg.T = c.p()["T"];
    cfg.scheme = scheme_from_string(c.p()["scheme"]);
    const auto tr = propagate(c.grid, c.V, psi0, cfg, obs);
    const auto e = ehrenfest_check(tr.ledger);
    const auto b = morawetz_budget(tr.ledger);
    budget_ok = budget_ok && b.holds;
    drift = std::max(drift, tr.ledger.max_norm_drift());
    devs.push_back(e.max_deviation);
    dips.push_back(e.max_dip);
    runs.push_back({{"dt", dts[i]},
                    {"ehrenfest_deviation", e.max_deviation},
                    {"min_commutator", e.min_commutator},
                    {"max_dip", e.max_dip},
                    {"norm_drift", tr.ledger.max_norm_drift()},
                    {"energy_drift", tr.ledger.max_energy_drift()},
                    {"budget_lhs", b.lhs},
                    {"budget_rhs", b.rhs},
                    {"budget_holds", b.holds}});
    if (i == 0 && c.out) {
      std::ostringstream os;
      tr.ledger.write_csv(os);
      c.artifact(".ledger.csv", os.str());
    }
  }
  json m = {{"runs", runs}};
  bool ok = budget_ok;
  if (dts.size() >= 2) {
    const double order = fitted_order(dts, devs);
    m["ehrenfest_order"] = order;
    if (c.p()["order_gate"].get<bool>()) {
      ok = ok && std::abs(order - c.p()["order"].get<double>()) <= c.p()["order_tol"].get<double>();
    }
  }
  // Dips are discretization artifacts: each halving must shrink them by the configured factor.
  bool dips_ok = true;
  const double dip_floor = 1e-12;
  for (std::size_t i = 1; i < dips.size(); ++i) {
    if (dips[i - 1] > dip_floor && dips[i] > dip_floor) {
      dips_ok = dips_ok && dips[i - 1] / dips[i] >= c.p()["dip_shrink"].get<double>();
    } else if (dips[i - 1] <= dip_floor) {
      dips_ok = dips_ok && dips[i] <= dip_floor;
    }
  }
  m["dips_shrink"] = dips_ok;
  ok = ok && dips_ok;
  const int steps = c.p()["conservation_steps"];
  if (steps > 0) {
    EvolutionConfig cfg;
    cfg.dt = dts.front();
    cfg.T = steps * cfg.dt;
    cfg.scheme = scheme_from_string(c.p()["scheme"]);
    cfg.sample_every = std::max(1, steps / 100);
    const auto tr = propagate(c.grid, c.V, psi0, cfg);
    m["conservation_steps"] = tr.ledger.steps;
    m["conservation_norm_drift"] = tr.ledger.max_norm_drift();
    drift = std::max(drift, tr.ledger.max_norm_drift());
  }
  m["max_norm_drift"] = drift;
  ok = ok && drift <= c.p()["norm_tol"].get<double>();
  c.result.metrics = m;
  c.result.verdict = verdict_of(ok);
}

// ∫₀^T of the decay integrand by the trapezoid rule over the recorded rows.
double integral_to(const MorawetzLedger& led, double T) {
  double s = 0.0;
  for (std::size_t i = 1; i < led.rows.size() && led.rows[i].t <= T + 1e-9; ++i) {
    s += 0.5 * (led.rows[i].t - led.rows[i - 1].t) * (led.rows[i].decay_integrand + led.rows[i - 1].decay_integrand);
  }
  return s;
}

json decay_series(const MorawetzLedger& led, const std::vector<double>& horizons, double growth_tol, bool& ok) {
  const double n0 = led.norm0 * led.norm0;
  std::vector<double> I, ratio, rate;
  for (double T : horizons) {
    I.push_back(integral_to(led, T));
    ratio.push_back(I.back() / n0);
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) rate.push_back((I[i] - I[i - 1]) / (horizons[i] - horizons[i - 1]));
  // No growth trend: the accumulation rate falls between successive windows and the last window adds little.
  bool bounded = ratio.back() <= (1.0 + growth_tol) * ratio[ratio.size() - 2];
  for (std::size_t i = 1; i < rate.size(); ++i) bounded = bounded && rate[i] <= rate[i - 1];
  ok = ok && bounded;
  return {{"integral", I}, {"ratio", ratio}, {"rate", rate}, {"bounded", bounded}, {"norm0_squared", n0}};
}

void run_decay(Context& c) {
  auto horizons = c.p()["horizons"].get<std::vector<double>>();
  std::sort(horizons.begin(), horizons.end());
  const auto psi0 = packet_from(c.p()["packet"], c.grid);
  EvolutionConfig cfg;
  cfg.dt = c.p()["dt"];
  cfg.T = horizons.back();
  cfg.scheme = scheme_from_string(c.p()["scheme"]);
  const auto tr = propagate(c.grid, c.V, psi0, cfg);
  bool ok = true;
  json m = {{"horizons", horizons},
            {"plain", decay_series(tr.ledger, horizons, c.p()["growth_tol"], ok)},
            {"norm_drift", tr.ledger.max_norm_drift()},
            {"energy_drift", tr.ledger.max_energy_drift()}};
  if (c.out) {
    std::ostringstream os;
    tr.ledger.write_csv(os);
    c.artifact(".ledger.csv", os.str());
  }
  if (c.p()["projected"].get<bool>()) {
    const auto u = low_energy_projection(c.grid, c.V, psi0, CutoffSpec{1.0, CutoffPart::Q});
    cfg.require_normalized = false;
    const auto pt = propagate(c.grid, c.V, u, cfg);
    m["projected"] = decay_series(pt.ledger, horizons, c.p()["growth_tol"], ok);
  }
  c.result.metrics = m;
  c.result.verdict = verdict_of(ok);
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

CheckResult run_check(const ScenarioConfig& sc, const CheckConfig& check, const std::optional<fs::path>& out_dir) {
  CheckResult res;
  res.name = check.name;
  res.kind = check.kind;
  std::seed_seq seq{static_cast<std::uint64_t>(sc.seed), name_hash(check.name)};
  Context c{sc, check, check.grid.value_or(sc.grid), check.potential.value_or(sc.potential), out_dir, res,
            std::mt19937_64(seq)};
  static const std::map<std::string, void (*)(Context&)> runners = {
      {"profile-exactness", run_profile_exactness},
      {"pair-bound", run_pair_bound},
      {"claim-sign", run_claim_sign},
      {"log-law", run_log_law},
      {"tube", run_tube},
      {"general-lower-bound", run_general_lower_bound},
      {"sym-morawetz", run_sym_morawetz},
      {"axial-conditions", run_axial_conditions},
      {"time-uniformity", run_time_uniformity},
      {"nondefinite-condition", run_nondefinite_condition},
      {"partition-of-unity", run_partition_of_unity},
      {"norm-decay", run_norm_decay},
      {"commutator-consistency", run_commutator_consistency},
      {"certificate", run_certificate},
      {"scan", run_scan},
      {"evolution", run_evolution},
      {"decay", run_decay},
  };
  try {
    runners.at(check.kind)(c);
  } catch (const std::exception& ex) {
    res.verdict = Verdict::Inconclusive;
    res.error = ex.what();
  }
  return res;
}

bool RunReport::runtime_error() const {
  return std::any_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.error.has_value(); });
}

int RunReport::exit_code() const {
  if (runtime_error()) return 3;
  for (const auto& r : checks) {
    if (r.verdict == Verdict::Fail) return 1;
  }
  return 0;
}

json RunReport::summary(const std::string& timestamp) const {
  json checks_json = json::array();
  for (const auto& r : checks) {
    json j = {{"name", r.name}, {"kind", r.kind}, {"verdict", to_string(r.verdict)}, {"metrics", r.metrics},
              {"artifacts", r.artifacts}};
    if (r.error) j["error"] = *r.error;
    checks_json.push_back(j);
  }
  return {{"scenario", scenario}, {"suite", suite},          {"scenario_hash", hash}, {"seed", seed},
          {"timestamp", timestamp}, {"checks", checks_json}, {"exit_code", exit_code()}};
}

RunReport run_suite(const ScenarioConfig& sc, Suite suite, const std::optional<fs::path>& out_dir,
                    const std::string& timestamp) {
  RunReport rep;
  rep.scenario = sc.name;
  rep.suite = to_string(suite);
  rep.seed = sc.seed;
  json src = sc.source;
  src["seed"] = sc.seed;
  rep.hash = scenario_hash(src);
  if (out_dir) fs::create_directories(*out_dir);
  for (const auto& check : sc.checks) {
    if (suite != Suite::Report && check.suite != suite) continue;
    rep.checks.push_back(run_check(sc, check, out_dir));
  }
  if (out_dir) write_atomic(*out_dir / "summary.json", rep.summary(timestamp).dump(2) + "\n");
  return rep;
}

}  // namespace mvf
