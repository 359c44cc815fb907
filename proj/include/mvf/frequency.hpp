#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvf/certify.hpp"
#include "mvf/grid.hpp"
#include "mvf/multiplier.hpp"
#include "mvf/operators.hpp"
#include "mvf/potentials.hpp"

namespace mvf {

// C^∞ transition: 0 for t ≤ 0, 1 for t ≥ 1, built from e^{−1/t}.
double smooth_transition(double t);
// Base cutoffs: P rises across [1, 3], I across [−1, 0], Q = I − P.
double cutoff_P(double t);
double cutoff_I(double t);
double cutoff_Q(double t);

enum class CutoffPart { P, Q };

struct CutoffSpec {
  double K = 1.0;
  CutoffPart part = CutoffPart::P;

  double operator()(double lambda) const;
  CutoffSpec complement() const { return {K, part == CutoffPart::P ? CutoffPart::Q : CutoffPart::P}; }
};

// f(A) for a fixed symmetric A.
class SpectralCalculus {
 public:
  virtual ~SpectralCalculus() = default;
  virtual const GridSpec& grid() const = 0;
  virtual void apply(const std::function<double(double)>& fn, std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply(const std::function<double(double)>& fn, std::span<const cplx> x, std::span<cplx> y) const;
  // Spectral interval of A known to the realization.
  virtual double lower() const = 0;
  virtual double upper() const = 0;
  // Eigenvalues when known exactly (empty otherwise).
  virtual std::vector<double> eigenvalues() const { return {}; }
};

// −Δ_h via its sine/Fourier transform.
class LaplacianCalculus final : public SpectralCalculus {
 public:
  explicit LaplacianCalculus(const GridSpec& grid);
  const GridSpec& grid() const override { return spectrum_->grid(); }
  void apply(const std::function<double(double)>& fn, std::span<const double> x, std::span<double> y) const override;
  void apply(const std::function<double(double)>& fn, std::span<const cplx> x, std::span<cplx> y) const override;
  double lower() const override;
  double upper() const override;
  std::vector<double> eigenvalues() const override { return spectrum_->eigenvalues(); }

 private:
  std::shared_ptr<const LaplacianSpectrum> spectrum_;
};

// Full eigendecomposition of a small operator.
class DenseCalculus final : public SpectralCalculus {
 public:
  explicit DenseCalculus(const RealOperator& A);
  const GridSpec& grid() const override { return grid_; }
  void apply(const std::function<double(double)>& fn, std::span<const double> x, std::span<double> y) const override;
  double lower() const override { return evals_.front(); }
  double upper() const override { return evals_.back(); }
  std::vector<double> eigenvalues() const override { return evals_; }
  // f(A) as a dense row-major matrix.
  std::vector<double> matrix(const std::function<double(double)>& fn) const;

 private:
  GridSpec grid_;
  std::size_t n_;
  std::vector<double> evals_;
  std::vector<double> vecs_;  // column-major eigenvectors
};

struct ChebyshevSeries {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> coeffs;
  double tail_bound = 0.0;  // Σ |dropped coefficients| + aliasing estimate
  double operator()(double x) const;
};

// Chebyshev interpolant of fn on [lo, hi] truncated once the dropped tail is below tol.
ChebyshevSeries chebyshev_fit(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-8,
                              std::size_t max_degree = 1 << 16);

// Polynomial realization on an estimated spectral interval.
class ChebyshevCalculus final : public SpectralCalculus {
 public:
  ChebyshevCalculus(OperatorPtr A, double lo, double hi, double tol = 1e-8);
  const GridSpec& grid() const override { return A_->grid(); }
  void apply(const std::function<double(double)>& fn, std::span<const double> x, std::span<double> y) const override;
  double lower() const override { return lo_; }
  double upper() const override { return hi_; }
  std::size_t last_degree() const { return last_degree_; }
  void apply_series(const ChebyshevSeries& s, std::span<const double> x, std::span<double> y) const;

 private:
  OperatorPtr A_;
  double lo_, hi_, tol_;
  mutable std::size_t last_degree_ = 0;
};

// f(A) as an operator.
class FunctionOfOperator final : public RealOperator {
 public:
  FunctionOfOperator(std::shared_ptr<const SpectralCalculus> calc, std::function<double(double)> fn);
  void apply_real(std::span<const double> x, std::span<double> y) const override;
  void apply(std::span<const cplx> x, std::span<cplx> y) const override;

 private:
  std::shared_ptr<const SpectralCalculus> calc_;
  std::function<double(double)> fn_;
  std::function<void(std::span<const double>, std::span<double>)> series_apply_;
};

OperatorPtr cutoff_operator(std::shared_ptr<const SpectralCalculus> calc, const CutoffSpec& spec);
Field apply_cutoff(const SpectralCalculus& calc, const CutoffSpec& spec, const Field& psi);

struct SandwichForms {
  OperatorPtr high;  // P_K (εA − 2B) P_K
  OperatorPtr low;   // Q_K (εA − 2B) Q_K
  double cross_term_min = 0.0;  // min over spectral samples of P_K(λ) λ Q_K(λ)
};

// Splits εA − B into the two sandwiched pieces; B must be diagonal.
SandwichForms sandwich_lower_bound(std::shared_ptr<const SpectralCalculus> calcA, OperatorPtr A,
                                   std::shared_ptr<const DiagonalOperator> B, double K, double epsilon);

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// ‖χ_δ Q_K(−Δ_h) |x|‖ with χ_δ the indicator of [−L, L] × B(δ), by power iteration on the normal operator.
NormEstimate norm_chi_Q_x(double delta, const CutoffSpec& spec, const GridSpec& grid, double slab_L,
                          double tol = 1e-6, int max_iterations = 2000, unsigned seed = 3);

// Radius whose disc has the area covered by the transverse nodes with |y| ≤ δ.
double area_matched_radius(const GridSpec& grid, double delta);

struct HighEnergyOptions {
  bool dense = true;  // exact spectral realization; otherwise Chebyshev on an estimated interval
  CertifyOptions certify;
};

// W = (4 − σ/(n−2)²)V + 2⟨x⟩^{2σ}∇F·∇V at the nodes.
std::vector<double> high_energy_weight(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec);

// P_K(H)(i[H, γ] − (w − ε)⟨x⟩^{−σ}H⟨x⟩^{−σ})P_K(H) ≥ −floor.
PositivityCertificate high_energy_certificate(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec,
                                              double epsilon, double K, const HighEnergyOptions& opt = {});

// Reusable pieces of the high-energy form for a K ladder.
class HighEnergyProblem {
 public:
  HighEnergyProblem(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec, double epsilon,
                    const HighEnergyOptions& opt = {});
  PositivityCertificate certify_at(double K) const;
  double weight_norm() const { return weight_norm_; }
  // max |diag| of the unsandwiched form in the node basis; sets the floor for every K.
  double scale() const { return scale_; }
  // Top of the spectrum of H; P_K(H) vanishes once K reaches it.
  double spectral_upper() const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  double epsilon_;
  HighEnergyOptions opt_;
  OperatorPtr inner_;  // i[H, γ] − (w − ε)⟨x⟩^{−σ}H⟨x⟩^{−σ}
  OperatorPtr H_;
  std::shared_ptr<const SpectralCalculus> calc_;  // polynomial path
  Eigen::MatrixXd inner_eig_;                     // dense path: inner form in the eigenbasis of H
  Eigen::VectorXd evals_;
  double weight_norm_ = 0.0;
  double scale_ = 0.0;
  nlohmann::json params_;
};

}  // namespace mvf
