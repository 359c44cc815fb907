#pragma once

#include <memory>
#include <optional>
#include <span>

#include "mvf/grid.hpp"
#include "mvf/multiplier.hpp"
#include "mvf/operators.hpp"
#include "mvf/potentials.hpp"

namespace mvf {

class GridTooCoarse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// i[H, γ] split into −4∂(F_jk)∂ − Δ²F (kinetic) and −2∇F·∇V (potential).
struct CommutatorForm {
  std::shared_ptr<const StencilOperator> kinetic;
  std::shared_ptr<const DiagonalOperator> potential;
  OperatorPtr total;
};

// −2 Σ_k λ_k ∇F_{c_k}(x)·∇V(x).
double potential_symbol(const Potential& V, const MultiplierSpec& spec, std::span<const double> x,
                        std::optional<double> t = std::nullopt);

// Kinetic part on a radius-1 box stencil: the quadratic form 4·2⁻ⁿ Σ_cells Σ_corners ∇_c u·A ∇_c u with
// one-sided edge gradients from each cell corner and A = Σ λ_k Hess F_k at the cell center, plus −Δ²F at nodes.
std::shared_ptr<StencilOperator> assemble_kinetic(const GridSpec& grid, const MultiplierSpec& spec);

// −2∇F·∇V averaged over each node's cell with the 2ⁿ-point Gauss rule.
std::shared_ptr<DiagonalOperator> assemble_potential_part(const GridSpec& grid, const Potential& V,
                                                          const MultiplierSpec& spec,
                                                          std::optional<double> t = std::nullopt);

// Rejects Morawetz multipliers and grids with h > (smallest bump radius)/4.
CommutatorForm assemble_commutator(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec,
                                   std::optional<double> t = std::nullopt);

// scale · w Σ_k λ_k ⟨x − c_k⟩^{−σ}(−Δ_h)⟨x − c_k⟩^{−σ}, w = 4 − σ/(n−2)².
OperatorPtr lower_bound_form(const GridSpec& grid, const MultiplierSpec& spec, double scale = 1.0);

// total − bound.
OperatorPtr residual_form(const CommutatorForm& comm, OperatorPtr bound);
// total − (1 − ε)·kinetic.
OperatorPtr residual_against_kinetic(const CommutatorForm& comm, double eps);

// Composition oracle H A − A H with H = −Δ_h + V.
std::shared_ptr<CompositionCommutator> composition_commutator(const GridSpec& grid, const Potential& V,
                                                              const MultiplierSpec& spec,
                                                              std::optional<double> t = std::nullopt);

// −Δ_h + V as an operator.
OperatorPtr build_hamiltonian(const GridSpec& grid, const Potential& V, std::optional<double> t = std::nullopt);

// Node values of V (t-dependent families need t).
std::vector<double> sample_potential(const GridSpec& grid, const Potential& V, std::optional<double> t = std::nullopt);

}  // namespace mvf
