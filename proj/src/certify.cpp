#include "mvf/certify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mvf/parallel.hpp"

namespace mvf {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

double explicit_residual(const RealOperator& A, const std::vector<double>& u, double theta, int& matvecs) {
  std::vector<double> Au(u.size());
  A.apply_real(u, Au);
  ++matvecs;
  double r = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) r += (Au[i] - theta * u[i]) * (Au[i] - theta * u[i]);
  return std::sqrt(r);
}

}  // namespace

EigenEstimate min_eig_dense(const RealOperator& form) {
  const auto dense = DenseOperator::from_operator(form);
  const std::size_t n = form.size();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(dense->matrix().data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
  EigenEstimate e;
  e.estimate = es.eigenvalues()(0);
  e.vector.assign(es.eigenvectors().col(0).data(), es.eigenvectors().col(0).data() + n);
  e.scale = M.diagonal().cwiseAbs().maxCoeff();
  e.converged = true;
  e.matvecs = static_cast<int>(n);
  e.residual = explicit_residual(*dense, e.vector, e.estimate, e.matvecs);
  return e;
}

EigenEstimate min_eig(const RealOperator& form, const LanczosOptions& opt) {
  const std::size_t n = form.size();
  if (n == 0) throw std::invalid_argument("min_eig: empty form");
  if (n <= static_cast<std::size_t>(opt.basis) + 1) return min_eig_dense(form);
  const int m = opt.basis;
  const int keep = std::clamp(opt.keep, 1, m - 2);

  EigenEstimate out;
  if (opt.scale) {
    out.scale = *opt.scale;
  } else {
    for (double d : form.diagonal()) out.scale = std::max(out.scale, std::abs(d));
  }

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, m + 1);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < n; ++i) V(i, 0) = nd(rng);
  V.col(0).normalize();

  std::vector<double> in(n), w(n);
  int k = 0;
  double theta = 0.0;
  Eigen::VectorXd ritz;
  double tol_abs = opt.tol * (out.scale > 0 ? out.scale : 1.0);
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    for (int j = k; j < m; ++j) {
      Eigen::Map<Eigen::VectorXd>(in.data(), n) = V.col(j);
      form.apply_real(in, w);
      ++out.matvecs;
      Eigen::Map<Eigen::VectorXd> wv(w.data(), n);
      Eigen::VectorXd coef = V.leftCols(j + 1).transpose() * wv;
      wv -= V.leftCols(j + 1) * coef;
      const Eigen::VectorXd again = V.leftCols(j + 1).transpose() * wv;
      wv -= V.leftCols(j + 1) * again;
      coef += again;
      for (int i = 0; i <= j; ++i) T(i, j) = T(j, i) = coef(i);
      double beta = wv.norm();
      if (beta <= 1e-13 * std::max(1.0, out.scale)) {
        // Invariant subspace: continue with a fresh orthogonal direction.
        beta = 0.0;
        for (std::size_t i = 0; i < n; ++i) w[i] = nd(rng);
        for (int pass = 0; pass < 2; ++pass) wv -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * wv);
        V.col(j + 1) = wv.normalized();
      } else {
        V.col(j + 1) = wv / beta;
      }
      T(j + 1, j) = T(j, j + 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(m, m));
    const Eigen::VectorXd& th = es.eigenvalues();
    const Eigen::MatrixXd& Y = es.eigenvectors();
    const double beta_m = T(m, m - 1);
    theta = th(0);
    const double res0 = std::abs(beta_m * Y(m - 1, 0));
    if (out.scale == 0.0) tol_abs = opt.tol * std::max({std::abs(th(0)), std::abs(th(m - 1)), 1e-300});
    const bool done = res0 <= tol_abs || restart == opt.max_restarts ||
                      (opt.stop_below && theta < *opt.stop_below);
    if (done) {
      ritz = V.leftCols(m) * Y.col(0);
      out.converged = res0 <= tol_abs;
      break;
    }
    // Thick restart: keep the lowest Ritz vectors, append the residual direction.
    Eigen::MatrixXd U = V.leftCols(m) * Y.leftCols(keep);
    const Eigen::VectorXd last = V.col(m);
    V.leftCols(keep) = U;
    V.col(keep) = last;
    T.setZero();
    for (int i = 0; i < keep; ++i) {
      T(i, i) = th(i);
      T(i, keep) = T(keep, i) = beta_m * Y(m - 1, i);
    }
    k = keep;
  }
  ritz.normalize();
  out.estimate = theta;
  out.vector.assign(ritz.data(), ritz.data() + n);
  out.residual = explicit_residual(form, out.vector, theta, out.matvecs);
  out.converged = out.converged && out.residual <= 10.0 * tol_abs;
  return out;
}

PositivityCertificate certify(const RealOperator& form, std::string identity, nlohmann::json parameters,
                              const CertifyOptions& opt) {
  PositivityCertificate c;
  c.form = std::move(identity);
  c.parameters = parameters.is_null() ? nlohmann::json::object() : std::move(parameters);

  LanczosOptions lo = opt.lanczos;
  double scale = 0.0;
  if (opt.scale) {
    scale = *opt.scale;
  } else {
    for (double d : form.diagonal()) scale = std::max(scale, std::abs(d));
  }
  c.scale = scale;
  lo.scale = scale;
  c.floor = opt.rel_floor * scale;
  c.symmetry_defect = self_adjointness_defect(form, 2, lo.seed + 101) / std::max(scale, 1e-300);
  if (c.symmetry_defect > opt.symmetry_tol) {
    std::ostringstream os;
    os << "certify: form '" << c.form << "' is not self-adjoint (relative defect " << c.symmetry_defect << ")";
    throw std::invalid_argument(os.str());
  }
  // A clearly negative Ritz value already decides the verdict.
  if (!lo.stop_below) lo.stop_below = -std::max(1e3 * c.floor, 1e-5 * scale);
  const EigenEstimate e = min_eig(form, lo);
  c.estimate = e.estimate;
  c.residual = e.residual;
  c.converged = e.converged;
  c.matvecs = e.matvecs;
  c.witness_quotient = rayleigh_quotient(form, e.vector);
  if (c.witness_quotient < -c.floor) {
    c.verdict = Verdict::Fail;
    if (opt.keep_witness) c.witness = e.vector;
  } else if (c.converged && c.estimate >= -c.floor) {
    c.verdict = Verdict::Pass;
  } else {
    c.verdict = Verdict::Inconclusive;
  }
  return c;
}

std::optional<double> ScanResult::first_pass_value() const {
  if (!first_pass) return std::nullopt;
  return ladder[*first_pass];
}

std::vector<Verdict> ScanResult::verdicts() const {
  std::vector<Verdict> v;
  for (const auto& r : rungs) v.push_back(r.verdict);
  return v;
}

ScanResult scan(const std::string& parameter, const std::vector<double>& ladder,
                const std::function<PositivityCertificate(double)>& certify_rung) {
  if (ladder.empty()) throw std::invalid_argument("scan: empty ladder");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] > ladder[i - 1])) throw std::invalid_argument("scan: ladder must be strictly increasing");
  }
  ScanResult s;
  s.parameter = parameter;
  s.ladder = ladder;
  s.rungs.resize(ladder.size());
  const int workers = std::min<int>(thread_count(), static_cast<int>(ladder.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(ladder.size());
  auto work = [&] {
    for (std::size_t i = next++; i < ladder.size(); i = next++) {
      try {
        s.rungs[i] = certify_rung(ladder[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  bool passed = false;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const Verdict v = s.rungs[i].verdict;
    if (v == Verdict::Pass) {
      if (!s.first_pass) s.first_pass = i;
      passed = true;
    } else if (v == Verdict::Fail && passed) {
      s.monotone = false;
      std::ostringstream os;
      os << "reversion: " << parameter << " = " << ladder[i] << " fails after an earlier pass";
      s.anomalies.push_back(os.str());
    }
  }
  return s;
}

nlohmann::json to_json(const PositivityCertificate& c) {
  nlohmann::json j;
  j["form"] = c.form;
  j["parameters"] = c.parameters;
  j["scenario_hash"] = scenario_hash({{"form", c.form}, {"parameters", c.parameters}});
  j["estimate"] = c.estimate;
  j["residual"] = c.residual;
  j["floor"] = c.floor;
  j["scale"] = c.scale;
  j["symmetry_defect"] = c.symmetry_defect;
  j["converged"] = c.converged;
  j["matvecs"] = c.matvecs;
  j["verdict"] = to_string(c.verdict);
  if (c.verdict == Verdict::Fail) j["witness_quotient"] = c.witness_quotient;
  return j;
}

nlohmann::json to_json(const ScanResult& s) {
  nlohmann::json j;
  j["parameter"] = s.parameter;
  j["ladder"] = s.ladder;
  nlohmann::json rungs = nlohmann::json::array();
  for (const auto& r : s.rungs) rungs.push_back(to_json(r));
  j["rungs"] = rungs;
  j["first_pass"] = s.first_pass ? nlohmann::json(s.ladder[*s.first_pass]) : nlohmann::json(nullptr);
  j["monotone"] = s.monotone;
  j["anomalies"] = s.anomalies;
  return j;
}

std::string scenario_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mvf
