#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvf/frequency.hpp"
#include "mvf/grid.hpp"
#include "mvf/multiplier.hpp"
#include "mvf/potentials.hpp"

namespace mvf {

enum class Scheme { CrankNicolson, StrangSplitStep };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct EvolutionConfig {
  double dt = 0.01;
  double T = 1.0;
  Scheme scheme = Scheme::CrankNicolson;
  double solver_tol = 1e-13;  // relative residual of each implicit solve
  int max_solver_iterations = 2000;
  int sample_every = 1;  // record every k-th step
  bool require_normalized = true;

  int steps() const;
  void validate() const;
};

// What to record along a trajectory.
struct Observables {
  std::optional<MultiplierSpec> gamma;
  double decay_sigma = 1.0;  // integrand ‖⟨x⟩^{−(σ+1)}u‖²
};

struct LedgerRow {
  double t = 0.0;
  double gamma_expect = 0.0;       // ⟨ψ, γψ⟩
  double commutator_expect = 0.0;  // ⟨ψ, i[H, γ]ψ⟩
  double norm = 0.0;
  double energy = 0.0;  // ⟨ψ, H(t)ψ⟩
  double decay_integrand = 0.0;
  double gamma_psi_norm = 0.0;  // ‖γψ‖
};

struct MorawetzLedger {
  std::vector<LedgerRow> rows;
  double dt = 0.0;
  double norm0 = 0.0;
  double max_solver_residual = 0.0;
  int steps = 0;

  void write_csv(std::ostream& os) const;
  double max_norm_drift() const;
  double max_energy_drift() const;
};

struct Trajectory {
  MorawetzLedger ledger;
  Field final_state;
};

// e^{−iHt}ψ₀ by Crank–Nicolson (CG on I + τ²H², τ = dt/2) or Strang splitting;
// time-dependent V is sampled at the step midpoint.
Trajectory propagate(const GridSpec& grid, const Potential& V, const Field& psi0, const EvolutionConfig& cfg,
                     const Observables& obs = {});

// Normalized Gaussian packet exp(−|x−x₀|²/(2w²) + i k·x).
Field gaussian_packet(const GridSpec& grid, const Point& center, double width, const Point& momentum);

struct EhrenfestReport {
  double max_deviation = 0.0;  // max |(⟨γ⟩(t+Δ) − ⟨γ⟩(t−Δ))/2Δ − ⟨i[H, γ]⟩(t)|
  double min_commutator = 0.0;
  double max_dip = 0.0;        // largest decrease of ⟨γ⟩ between consecutive samples
};

EhrenfestReport ehrenfest_check(const MorawetzLedger& ledger);

// Least-squares order of deviation against step size.
double fitted_order(const std::vector<double>& steps, const std::vector<double>& deviations);

struct MorawetzBudget {
  double lhs = 0.0;  // ∫⟨ψ, i[H, γ]ψ⟩dt, trapezoid
  double rhs = 0.0;  // 2 sup‖γψ‖‖ψ₀‖
  bool holds = false;
};

MorawetzBudget morawetz_budget(const MorawetzLedger& ledger, double rel_tol = 1e-6);

struct DecayReport {
  double integral = 0.0;            // ∫‖⟨x⟩^{−(σ+1)}u‖²dt
  double norm0_squared = 0.0;
  double ratio = 0.0;
  double projected_integral = 0.0;  // same with Q₁(H)u
  double projected_ratio = 0.0;
};

// The projected ledger, when given, is a trajectory started from Q₁(H)u₀ (Q₁ commutes with the static flow).
DecayReport decay_integrals(const MorawetzLedger& ledger, const MorawetzLedger* projected = nullptr);

// Q_K(H)u₀ with the spectral calculus of −Δ_h (V ≡ 0) or the Chebyshev calculus of H.
Field low_energy_projection(const GridSpec& grid, const Potential& V, const Field& u0, const CutoffSpec& spec);

}  // namespace mvf
