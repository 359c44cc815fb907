#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mvf/grid.hpp"
#include "mvf/operators.hpp"
#include "mvf/potentials.hpp"
#include "mvf/profile.hpp"

namespace mvf {

enum class MultiplierVariant { SmoothF, Morawetz };

std::string to_string(MultiplierVariant v);
MultiplierVariant multiplier_variant_from_string(const std::string& s);

// Σ_k λ_k γ_{c_k}; the Morawetz variant uses F(ρ) = ρ.
struct MultiplierSpec {
  RadialProfile profile;
  std::vector<Point> centers;
  std::vector<double> weights;
  MultiplierVariant variant = MultiplierVariant::SmoothF;

  void validate() const;
  int dim() const { return profile.dim(); }
  double weight_sum() const;
  // Σ_k λ_k ∇F_{c_k}(x).
  void gradient_F(std::span<const double> x, std::span<double> out) const;
  // Σ_k λ_k F_{c_k}(x).
  double value_F(std::span<const double> x) const;
};

// Centers k·b, k = −N..N, unit weights.
MultiplierSpec build_gamma_N(const RadialProfile& profile, int N, const Point& axis_b);
// All coordinate sign flips of x′ (deduplicated), Morawetz variant.
MultiplierSpec build_sym_morawetz(const Point& x_prime, const RadialProfile& profile = RadialProfile());
MultiplierSpec build_weighted(const RadialProfile& profile, std::vector<Point> centers, std::vector<double> weights);

// γ = −i A with A = Σ_j (D_j Φ_j + Φ_j D_j) real antisymmetric, D_j centered differences, Φ = ∇F.
class GammaOperator final : public DiscreteOperator {
 public:
  GammaOperator(GridSpec grid, std::vector<double> phi);  // phi node-major, dim per node

  void apply(std::span<const cplx> x, std::span<cplx> y) const override;
  void apply_antisymmetric(std::span<const double> x, std::span<double> y) const;
  const std::vector<double>& coefficients() const { return phi_; }

 private:
  std::vector<double> phi_;
};

std::shared_ptr<GammaOperator> assemble_gamma(const MultiplierSpec& spec, const GridSpec& grid);
Field apply_gamma(const MultiplierSpec& spec, const Field& psi);

// i[H, γ] = H A − A H for real symmetric H, applied by composition.
class CompositionCommutator final : public RealOperator {
 public:
  CompositionCommutator(OperatorPtr H, std::shared_ptr<const GammaOperator> gamma);
  void apply_real(std::span<const double> x, std::span<double> y) const override;

 private:
  OperatorPtr H_;
  std::shared_ptr<const GammaOperator> gamma_;
};

// i[−Δ_h, F] realized as the diagonal-stencil commutator, for the consistency oracle.
class FCommutator final : public DiscreteOperator {
 public:
  FCommutator(OperatorPtr laplacian, std::vector<double> F);
  void apply(std::span<const cplx> x, std::span<cplx> y) const override;

 private:
  OperatorPtr lap_;
  std::vector<double> F_;
};

// Power-iteration estimate of the operator norm of a Hermitian operator.
double operator_norm_estimate(const DiscreteOperator& op, int iterations = 200, unsigned seed = 7);

}  // namespace mvf
