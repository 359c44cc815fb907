#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mvf/grid.hpp"
#include "mvf/profile.hpp"

namespace mvf {

using Point = std::vector<double>;

// V(r) = A (1 − (r/R)²)³ for r < R, else 0.
struct BumpShape {
  double amplitude = 1.0;
  double radius = 1.0;

  double value(double r) const;
  double slope(double r) const;  // dV/dr
  // dV/dr divided by r, finite at r = 0.
  double slope_over_r(double r) const;
};

// Scalar law of time used for translations β(t) and transverse scalings λ(t).
struct MotionLaw {
  enum class Kind { Constant, Sinusoid, TanhStep, Triangle, LinearDrift };
  Kind kind = Kind::Constant;
  double base = 0.0;       // value at rest
  double amplitude = 0.0;  // peak deviation (rate for LinearDrift)
  double period = 1.0;     // time scale

  double value(double t) const;
  // sup_t |value − base|; infinite for LinearDrift.
  double deviation_bound() const;
  static Kind kind_from_string(const std::string& s);
};

std::string to_string(MotionLaw::Kind k);

// X(s) = A (exp(−(s−s₀)²/w²) + exp(−(s+s₀)²/w²)), the axial factor of the product family.
struct AxialFactor {
  double amplitude = 1.0;
  double offset = 1.0;
  double width = 1.0;

  double value(double s) const;
  double slope(double s) const;
};

enum class PotentialKind { Zero, RadialBump, TwoBump, Lattice1D, AxialProduct, NondefiniteRadial, WeightedSum, TimeDependent };

std::string to_string(PotentialKind k);

class Potential {
 public:
  static Potential zero(int dim);
  static Potential radial_bump(Point center, BumpShape shape);
  // Bumps at ±b.
  static Potential two_bump(Point b, BumpShape shape);
  // Bumps at j·b, |j| ≤ M.
  static Potential lattice(Point b, int M, BumpShape shape);
  // X(x₁) e^{−|y|}.
  static Potential axial_product(int dim, AxialFactor factor);
  // −1/(b + c r^{2+ε}).
  static Potential nondefinite_radial(int dim, double b, double c, double eps);
  static Potential weighted_sum(std::vector<std::pair<double, Potential>> terms);
  // V(x₁ − β(t), λ(t) y).
  static Potential time_dependent(Potential base, MotionLaw beta, MotionLaw lambda);

  PotentialKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_time_dependent() const { return kind_ == PotentialKind::TimeDependent; }

  double value(std::span<const double> x, std::optional<double> t = std::nullopt) const;
  void gradient(std::span<const double> x, std::span<double> out, std::optional<double> t = std::nullopt) const;
  Point gradient(std::span<const double> x, std::optional<double> t = std::nullopt) const;

  // Frozen copy at time t (static potentials return themselves).
  Potential at_time(double t) const;

  // Bump-sum families (RadialBump, TwoBump, Lattice1D) decompose into indexed radial bumps.
  std::size_t bump_count() const { return bump_centers_.size(); }
  const std::vector<Point>& bump_centers() const { return bump_centers_; }
  const BumpShape& bump_shape() const { return shape_; }
  double bump_value(std::size_t j, std::span<const double> x) const;
  void bump_gradient(std::size_t j, std::span<const double> x, std::span<double> out) const;

  // Smallest compact-support radius among the constituents, kInf when none is compact.
  double min_support_radius() const;
  // Axial extent of the support (max |x₁| with V ≠ 0), kInf when unbounded.
  double axial_support() const;

  // Family-specific parameters.
  const AxialFactor& axial_factor() const { return axial_; }
  double tail_b() const { return tail_b_; }
  double tail_c() const { return tail_c_; }
  double tail_eps() const { return tail_eps_; }
  int lattice_size() const { return lattice_M_; }
  const Point& axis_vector() const { return axis_; }
  const MotionLaw& beta() const { return beta_; }
  const MotionLaw& lambda() const { return lambda_; }
  const Potential& base() const { return *terms_.front().second; }
  const std::vector<std::pair<double, std::shared_ptr<const Potential>>>& terms() const { return terms_; }

 private:
  explicit Potential(PotentialKind k, int dim) : kind_(k), dim_(dim) {}
  void check_time(std::optional<double> t) const;
  double static_value(std::span<const double> x) const;
  void static_gradient(std::span<const double> x, std::span<double> out) const;

  PotentialKind kind_;
  int dim_;
  std::vector<Point> bump_centers_;
  BumpShape shape_;
  Point axis_;
  int lattice_M_ = 0;
  AxialFactor axial_;
  double tail_b_ = 1.0;
  double tail_c_ = 1.0;
  double tail_eps_ = 1.0;
  std::vector<std::pair<double, std::shared_ptr<const Potential>>> terms_;
  MotionLaw beta_;
  MotionLaw lambda_{MotionLaw::Kind::Constant, 1.0, 0.0, 1.0};
};

// Largest |analytic − central difference| of the gradient over the given points.
double gradient_fd_defect(const Potential& V, std::span<const double> points, double step = 1e-5,
                          std::optional<double> t = std::nullopt);

struct ConditionResult {
  bool pass = true;
  double worst = 0.0;  // most negative margin seen (0 when none)
  Point where;         // location of the worst margin
};

struct AxialConditionReport {
  ConditionResult nonneg;        // (A1) V ≥ 0
  ConditionResult c1;            // (A1) gradient continuity via finite differences
  ConditionResult transverse;    // (A2a) −y·∇_y V ≥ 0
  ConditionResult axial;         // (A2b) −x₁ ∂₁V ≥ 0 for |x₁| > L
  ConditionResult every_axis;    // (A4) −x_j ∂_j V ≥ 0 for |x₁| > L
  ConditionResult control;       // (A3) finite Λ_δ for every δ
  double L = 0.0;                // smallest slab half-length that passes
  double slab = 0.0;             // slab half-length used for Λ_δ
  std::vector<std::pair<double, double>> lambda;  // (δ, Λ_δ), δ ascending
  bool lambda_monotone = true;
  std::size_t samples = 0;

  bool all_pass() const;
};

struct AxialCheckOptions {
  double tol = 1e-12;
  double fd_step = 1e-5;
  double fd_tol = 1e-6;
  // Overrides the discovered L as the slab for Λ_δ.
  std::optional<double> slab;
};

// Sweeps the nodes of `sample` (its box must exceed the support along x₁).
AxialConditionReport check_axial_conditions(const Potential& V, const GridSpec& sample, std::span<const double> deltas,
                                            std::optional<double> t = std::nullopt, const AxialCheckOptions& opt = {});

struct TimeUniformityReport {
  bool pass = false;
  double L_static = 0.0;
  double L_bound = 0.0;     // L_static + β₀ (+ one sample spacing)
  double L_observed = 0.0;  // max over sampled times
  double envelope_tol = 0.0;
  std::vector<double> envelope;  // per δ
  std::vector<double> times;
  std::vector<AxialConditionReport> reports;
  std::string reason;
};

TimeUniformityReport check_time_uniformity(const Potential& V, std::span<const double> times, const GridSpec& sample,
                                           std::span<const double> deltas, double envelope_tol = 0.05);

struct NondefiniteReport {
  bool pass = false;
  double min_margin = 0.0;
  Point where;
  std::vector<double> margins;
};

// Margin λ((n−2)² − σ/4)/(r²⟨x⟩^{2σ}) − 2 f(∞)|∇V| at every sample point (node-major, dim per point).
NondefiniteReport check_nondefinite_condition(const Potential& V, const RadialProfile& profile, double lambda,
                                              std::span<const double> points);

// Values of the two-parameter family at which the sufficient condition is tight (n = 3, a = 1, σ = 1).
struct NondefiniteParameters {
  double lambda;
  double eps;
  double b;
  double c;
};
NondefiniteParameters nondefinite_equality_parameters();

}  // namespace mvf
