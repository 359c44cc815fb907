#include "mvf/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mvf/commutator.hpp"

namespace mvf {

std::string to_string(Scheme s) { return s == Scheme::CrankNicolson ? "crank-nicolson" : "strang"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "crank-nicolson" || s == "cn") return Scheme::CrankNicolson;
  if (s == "strang" || s == "split-step") return Scheme::StrangSplitStep;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

int EvolutionConfig::steps() const { return static_cast<int>(std::llround(T / dt)); }

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("evolution: dt and T must be positive");
  if (std::abs(steps() * dt - T) > 1e-9 * T) throw std::invalid_argument("evolution: T must be a multiple of dt");
  if (!(solver_tol > 0.0) || max_solver_iterations < 1 || sample_every < 1) {
    throw std::invalid_argument("evolution: invalid solver or sampling settings");
  }
}

void MorawetzLedger::write_csv(std::ostream& os) const {
  os << "t,gamma_expect,commutator_expect,norm,energy,decay_integrand\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.t << ',' << r.gamma_expect << ',' << r.commutator_expect << ',' << r.norm << ',' << r.energy << ','
       << r.decay_integrand << '\n';
  }
}

double MorawetzLedger::max_norm_drift() const {
  double d = 0.0;
  for (const auto& r : rows) d = std::max(d, std::abs(r.norm - norm0));
  return d;
}

double MorawetzLedger::max_energy_drift() const {
  double d = 0.0;
  for (const auto& r : rows) d = std::max(d, std::abs(r.energy - rows.front().energy));
  return d;
}

namespace {

using CVec = std::vector<cplx>;

double dot_re(const CVec& a, const CVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

// Solves (I + τ²H²) z = b by conjugate gradients; z holds the initial guess. Returns the relative residual.
double solve_shifted_square(const DiscreteOperator& H, double tau, const CVec& b, CVec& z, double tol, int max_it) {
  const std::size_t n = b.size();
  CVec t(n), Mp(n), r(n), p(n);
  auto apply_M = [&](const CVec& x, CVec& y) {
    H.apply(x, t);
    H.apply(t, y);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + tau * tau * y[i];
  };
  apply_M(z, Mp);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Mp[i];
  p = r;
  const double bnorm = std::sqrt(dot_re(b, b));
  if (bnorm == 0.0) {
    std::fill(z.begin(), z.end(), cplx{});
    return 0.0;
  }
  double rs = dot_re(r, r);
  for (int it = 0; it < max_it; ++it) {
    if (std::sqrt(rs) <= tol * bnorm) return std::sqrt(rs) / bnorm;
    apply_M(p, Mp);
    const double alpha = rs / dot_re(p, Mp);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] += alpha * p[i];
      r[i] -= alpha * Mp[i];
    }
    const double rs_new = dot_re(r, r);
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  if (std::sqrt(rs) <= tol * bnorm) return std::sqrt(rs) / bnorm;
  std::ostringstream os;
  os << "Crank-Nicolson solve did not converge: relative residual " << std::sqrt(rs) / bnorm;
  throw std::runtime_error(os.str());
}

}  // namespace

Trajectory propagate(const GridSpec& grid, const Potential& V, const Field& psi0, const EvolutionConfig& cfg,
                     const Observables& obs) {
  cfg.validate();
  grid.validate();
  require_same_grid(grid, psi0.grid());
  if (V.dim() != grid.dim) throw std::invalid_argument("evolution: potential and grid dimensions differ");
  const double n0 = norm(psi0);
  if (cfg.require_normalized && std::abs(n0 - 1.0) > 1e-10) {
    throw std::invalid_argument("evolution: initial state must be normalized");
  }
  const bool td = V.is_time_dependent();
  auto at = [td](double t) { return td ? std::optional<double>(t) : std::nullopt; };
  const std::size_t n = grid.size();
  const double cell = grid.cell_volume();

  std::shared_ptr<GammaOperator> gamma;
  if (obs.gamma) gamma = assemble_gamma(*obs.gamma, grid);
  std::vector<double> decay_w(n);
  {
    std::vector<double> x(grid.dim);
    for (std::size_t i = 0; i < n; ++i) {
      grid.coordinates(i, x);
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      decay_w[i] = std::pow(1.0 + r2, -(obs.decay_sigma + 1.0));
    }
  }

  Trajectory out;
  out.ledger.dt = cfg.dt;
  out.ledger.norm0 = n0;
  Field psi = psi0;
  CVec work(n);
  auto record = [&](double t) {
    LedgerRow row;
    row.t = t;
    const auto H = build_hamiltonian(grid, V, at(t));
    H->apply(psi.values(), work);
    double e = 0.0, d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e += (std::conj(psi[i]) * work[i]).real();
      d += decay_w[i] * std::norm(psi[i]);
    }
    row.energy = e * cell;
    row.decay_integrand = d * cell;
    row.norm = norm(psi);
    if (gamma) {
      gamma->apply(psi.values(), work);
      double ge = 0.0, gn = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ge += (std::conj(psi[i]) * work[i]).real();
        gn += std::norm(work[i]);
      }
      row.gamma_expect = ge * cell;
      row.gamma_psi_norm = std::sqrt(gn * cell);
      CompositionCommutator C(H, gamma);
      C.apply(psi.values(), work);
      double ce = 0.0;
      for (std::size_t i = 0; i < n; ++i) ce += (std::conj(psi[i]) * work[i]).real();
      row.commutator_expect = ce * cell;
    }
    out.ledger.rows.push_back(row);
  };

  const int steps = cfg.steps();
  const double dt = cfg.dt;
  OperatorPtr H_static = td ? nullptr : build_hamiltonian(grid, V);
  std::shared_ptr<const LaplacianSpectrum> spectrum;
  std::vector<cplx> kinetic;
  std::vector<double> v_static;
  if (cfg.scheme == Scheme::StrangSplitStep) {
    spectrum = build_laplacian(grid)->spectrum();
    const auto& ev = spectrum->eigenvalues();
    kinetic.resize(ev.size());
    for (std::size_t k = 0; k < ev.size(); ++k) kinetic[k] = std::polar(1.0, -ev[k] * dt);
    if (!td) v_static = sample_potential(grid, V);
  }

  record(0.0);
  CVec b(n), z(n);
  for (int s = 1; s <= steps; ++s) {
    const double t_mid = (s - 0.5) * dt;
    if (cfg.scheme == Scheme::CrankNicolson) {
      const OperatorPtr H = td ? build_hamiltonian(grid, V, t_mid) : H_static;
      const double tau = 0.5 * dt;
      H->apply(psi.values(), work);
      for (std::size_t i = 0; i < n; ++i) b[i] = psi[i] - cplx(0.0, tau) * work[i];
      std::copy(psi.values().begin(), psi.values().end(), z.begin());
      const double res = solve_shifted_square(*H, tau, b, z, cfg.solver_tol, cfg.max_solver_iterations);
      out.ledger.max_solver_residual = std::max(out.ledger.max_solver_residual, res);
      H->apply(z, work);
      for (std::size_t i = 0; i < n; ++i) psi[i] = z[i] - cplx(0.0, tau) * work[i];
    } else {
      const std::vector<double> v = td ? sample_potential(grid, V, t_mid) : v_static;
      for (std::size_t i = 0; i < n; ++i) psi[i] *= std::polar(1.0, -0.5 * dt * v[i]);
      spectrum->apply_multiplier(kinetic, psi.values(), work);
      for (std::size_t i = 0; i < n; ++i) psi[i] = work[i] * std::polar(1.0, -0.5 * dt * v[i]);
    }
    if (s % cfg.sample_every == 0 || s == steps) record(s * dt);
  }
  out.ledger.steps = steps;
  out.final_state = std::move(psi);
  return out;
}

Field gaussian_packet(const GridSpec& grid, const Point& center, double width, const Point& momentum) {
  if (static_cast<int>(center.size()) != grid.dim || static_cast<int>(momentum.size()) != grid.dim) {
    throw std::invalid_argument("gaussian packet: dimension mismatch");
  }
  if (!(width > 0.0)) throw std::invalid_argument("gaussian packet: width must be positive");
  Field f = Field::from_function(grid, [&](std::span<const double> x) {
    double r2 = 0.0, phase = 0.0;
    for (int j = 0; j < grid.dim; ++j) {
      r2 += (x[j] - center[j]) * (x[j] - center[j]);
      phase += momentum[j] * x[j];
    }
    return std::polar(std::exp(-r2 / (2.0 * width * width)), phase);
  });
  const double nf = norm(f);
  if (nf == 0.0) throw std::invalid_argument("gaussian packet: vanishes on the grid");
  f *= 1.0 / nf;
  return f;
}

EhrenfestReport ehrenfest_check(const MorawetzLedger& ledger) {
  const auto& r = ledger.rows;
  if (r.size() < 3) throw std::invalid_argument("ehrenfest: at least three samples are required");
  EhrenfestReport e;
  e.min_commutator = r.front().commutator_expect;
  for (std::size_t k = 0; k < r.size(); ++k) {
    e.min_commutator = std::min(e.min_commutator, r[k].commutator_expect);
    if (k + 1 < r.size()) e.max_dip = std::max(e.max_dip, r[k].gamma_expect - r[k + 1].gamma_expect);
    if (k == 0 || k + 1 == r.size()) continue;
    const double d = (r[k + 1].gamma_expect - r[k - 1].gamma_expect) / (r[k + 1].t - r[k - 1].t);
    e.max_deviation = std::max(e.max_deviation, std::abs(d - r[k].commutator_expect));
  }
  return e;
}

double fitted_order(const std::vector<double>& steps, const std::vector<double>& deviations) {
  if (steps.size() != deviations.size() || steps.size() < 2) throw std::invalid_argument("fitted order: need 2+ pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0) || !(deviations[i] > 0.0)) throw std::invalid_argument("fitted order: positive data required");
    const double lx = std::log(steps[i]), ly = std::log(deviations[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

MorawetzBudget morawetz_budget(const MorawetzLedger& ledger, double rel_tol) {
  MorawetzBudget b;
  const auto& r = ledger.rows;
  double sup = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    sup = std::max(sup, r[k].gamma_psi_norm);
    if (k > 0) b.lhs += 0.5 * (r[k].t - r[k - 1].t) * (r[k].commutator_expect + r[k - 1].commutator_expect);
  }
  b.rhs = 2.0 * sup * ledger.norm0;
  b.holds = b.lhs <= b.rhs * (1.0 + rel_tol);
  return b;
}

namespace {

double trapezoid(const MorawetzLedger& l) {
  double s = 0.0;
  for (std::size_t k = 1; k < l.rows.size(); ++k) {
    s += 0.5 * (l.rows[k].t - l.rows[k - 1].t) * (l.rows[k].decay_integrand + l.rows[k - 1].decay_integrand);
  }
  return s;
}

}  // namespace

DecayReport decay_integrals(const MorawetzLedger& ledger, const MorawetzLedger* projected) {
  if (ledger.rows.size() < 2) throw std::invalid_argument("decay integrals: at least two samples are required");
  DecayReport d;
  d.integral = trapezoid(ledger);
  d.norm0_squared = ledger.norm0 * ledger.norm0;
  d.ratio = d.integral / d.norm0_squared;
  if (projected) {
    d.projected_integral = trapezoid(*projected);
    d.projected_ratio = d.projected_integral / d.norm0_squared;
  }
  return d;
}

Field low_energy_projection(const GridSpec& grid, const Potential& V, const Field& u0, const CutoffSpec& spec) {
  if (V.is_time_dependent()) throw std::invalid_argument("low-energy projection: static potential required");
  if (V.kind() == PotentialKind::Zero) return apply_cutoff(LaplacianCalculus(grid), spec, u0);
  const auto H = build_hamiltonian(grid, V);
  double lo = 0.0;
  for (double v : sample_potential(grid, V)) lo = std::min(lo, v);
  return apply_cutoff(ChebyshevCalculus(H, lo, H->spectral_upper_bound()), spec, u0);
}

}  // namespace mvf
