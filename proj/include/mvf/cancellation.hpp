#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mvf/grid.hpp"
#include "mvf/multiplier.hpp"
#include "mvf/potentials.hpp"
#include "mvf/profile.hpp"

namespace mvf {

struct PairBound {
  double value = 0.0;  // i[V0, γ_c + γ_{−c}](x)
  double bound = 0.0;  // −2V0′(|x|) min{f(|x+c|), f(|x−c|)} (2|y|²/|x|) / (|x| + |c|)
};

// V0 radial about the origin, c on the first axis.
PairBound pair_bound_check(std::span<const double> x, std::span<const double> c, const BumpShape& V0,
                           const RadialProfile& profile);

struct ClaimSign {
  double sum = 0.0;
  int expected = 0;  // −1 when x₁ is nearer k1, +1 when nearer k2, 0 when equidistant
  bool holds = true;
};

// f(|x−k₁|)/|x−k₁|·(x₁−k₁) + f(|x−k₂|)/|x−k₂|·(x₁−k₂) with k_i = (k_i, 0⃗); requires k1 ≤ x₁ ≤ k2.
ClaimSign claim_monotone_check(double k1, double k2, std::span<const double> x, const RadialProfile& profile,
                               double tol = 1e-12);

struct NegativeRegion {
  std::optional<std::size_t> bump_index;  // empty: the whole potential
  std::vector<std::uint8_t> indicator;
  std::size_t flagged = 0;
  std::size_t support_nodes = 0;
  double tube_radius = 0.0;      // max |y| over flagged nodes
  double axial_extent = 0.0;     // max |x₁| over flagged nodes
  double volume_fraction = 0.0;  // flagged / support nodes
  double min_value = 0.0;
  // min over nodes of value + 4 f(∞) max|λ| |∇V_j| (the two-bump floor).
  double floor_margin = 0.0;
  bool outside_support = false;  // a flagged node where ∇V_j = 0
};

// Flags nodes where i[V_j, γ](x) < −1e−14·(local scale).
NegativeRegion negative_region(const Potential& V, const MultiplierSpec& spec, const GridSpec& grid,
                               std::optional<std::size_t> bump_index = std::nullopt,
                               std::optional<double> t = std::nullopt);

void write_region_dump(std::ostream& os, const GridSpec& grid, const NegativeRegion& region);

struct TubeLadder {
  std::vector<int> N;
  std::vector<double> tube_radius;  // max over bumps
  std::vector<double> axial_extent;
  std::vector<double> floor_margin;
  bool nonincreasing = true;
};

// Negative regions of every bump for γ_N along `axis_b` on each rung.
TubeLadder tube_ladder(const Potential& V, const RadialProfile& profile, const Point& axis_b,
                       std::span<const int> N_list, const GridSpec& grid);

// Smallest N on the ladder whose region fits inside [−L, L] × B(δ), per δ.
std::vector<std::optional<int>> fitting_thresholds(const TubeLadder& ladder, std::span<const double> deltas, double L);

struct LogFit {
  std::vector<int> N;
  std::vector<double> minima;  // min over probes of i[V0, γ_N]
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares fit of min_probes i[V0, γ_N] against log N; V0 centered at the origin.
LogFit log_accumulation_fit(const BumpShape& V0, const RadialProfile& profile, const Point& axis_b,
                            std::span<const int> N_list, std::span<const Point> probes);

struct LowerBoundSample {
  double value = 0.0;
  double floor = 0.0;
  bool holds = true;
};

// floor = −2|∂₁V|(2L+3)f(∞) − 2(∇_yV·y)Σ_k λ_k f(|x−c_k|)/|x−c_k|.
LowerBoundSample general_lower_bound_check(const Potential& V, const MultiplierSpec& spec, std::span<const double> x,
                                           double L, double tol = 1e-12);

// i[V, Σ_{c ∈ sym(x′)} γ_c^Mor](x); requires |x₁| > L.
double sym_morawetz_check(const Potential& V, std::span<const double> x_prime, std::span<const double> x, double L);

}  // namespace mvf
