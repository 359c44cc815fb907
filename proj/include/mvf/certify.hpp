#pragma once

#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mvf/operators.hpp"

namespace mvf {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

struct LanczosOptions {
  int basis = 48;         // Krylov basis size before a restart
  int keep = 12;          // Ritz vectors kept across a restart
  int max_restarts = 300;
  double tol = 1e-6;      // residual tolerance, relative to the form's scale
  unsigned seed = 1;
  // Stop as soon as the smallest Ritz value drops below this (the verdict is already decided).
  std::optional<double> stop_below;
  // Scale for the relative tolerance; max |diag| when absent.
  std::optional<double> scale;
};

struct EigenEstimate {
  double estimate = 0.0;   // smallest Ritz value
  double residual = 0.0;   // ‖A w − θ w‖ for the unit Ritz vector w, recomputed explicitly
  double scale = 0.0;      // max |diag| used for relative tolerances
  bool converged = false;
  int matvecs = 0;
  std::vector<double> vector;
};

// Thick-restart Lanczos with full reorthogonalization for the smallest eigenvalue.
EigenEstimate min_eig(const RealOperator& form, const LanczosOptions& opt = {});
// Dense symmetric eigensolve (small grids, oracle).
EigenEstimate min_eig_dense(const RealOperator& form);

struct CertifyOptions {
  double rel_floor = 1e-8;
  double symmetry_tol = 1e-10;
  LanczosOptions lanczos;
  bool keep_witness = true;
  // Replaces max |diag| as the scale of the floor when the diagonal is not available in the node basis.
  std::optional<double> scale;
};

struct PositivityCertificate {
  std::string form;
  nlohmann::json parameters = nlohmann::json::object();
  double estimate = 0.0;
  double residual = 0.0;
  double floor = 0.0;
  double scale = 0.0;
  double symmetry_defect = 0.0;
  bool converged = false;
  int matvecs = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> witness;
  double witness_quotient = 0.0;
};

// pass: converged and estimate ≥ −floor; fail: a witness with Rayleigh quotient < −floor; else inconclusive.
PositivityCertificate certify(const RealOperator& form, std::string identity, nlohmann::json parameters = {},
                              const CertifyOptions& opt = {});

struct ScanResult {
  std::string parameter;
  std::vector<double> ladder;
  std::vector<PositivityCertificate> rungs;
  std::optional<std::size_t> first_pass;
  bool monotone = true;  // no pass followed by a fail
  std::vector<std::string> anomalies;

  std::optional<double> first_pass_value() const;
  std::vector<Verdict> verdicts() const;
};

// Certifies build(rung) on each rung; rungs run on the worker pool.
ScanResult scan(const std::string& parameter, const std::vector<double>& ladder,
                const std::function<PositivityCertificate(double)>& certify_rung);

nlohmann::json to_json(const PositivityCertificate& c);
nlohmann::json to_json(const ScanResult& s);

// FNV-1a of the canonical dump, hex.
std::string scenario_hash(const nlohmann::json& j);

}  // namespace mvf
