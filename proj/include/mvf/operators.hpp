#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "mvf/grid.hpp"

namespace mvf {

// Linear action on grid fields. Self-adjoint by contract.
class DiscreteOperator {
 public:
  explicit DiscreteOperator(GridSpec grid) : grid_(std::move(grid)) {}
  virtual ~DiscreteOperator() = default;

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  virtual void apply(std::span<const cplx> x, std::span<cplx> y) const = 0;
  virtual bool is_real() const { return false; }

  Field operator()(const Field& psi) const;

 private:
  GridSpec grid_;
};

// Real symmetric operator; complex fields are handled componentwise.
class RealOperator : public DiscreteOperator {
 public:
  using DiscreteOperator::DiscreteOperator;

  bool is_real() const override { return true; }
  void apply(std::span<const cplx> x, std::span<cplx> y) const override;
  virtual void apply_real(std::span<const double> x, std::span<double> y) const = 0;

  // Diagonal entries; the default probes with unit vectors and is only meant for small grids.
  virtual std::vector<double> diagonal() const;
  // Upper bound on the spectrum (Gershgorin where cheap, else power iteration with margin).
  virtual double spectral_upper_bound() const;
  // Lower bound on the spectrum when known (0 for positive semidefinite builders).
  virtual double spectral_lower_bound() const;

  using DiscreteOperator::operator();
  std::vector<double> operator()(std::span<const double> x) const;
  double max_abs_diagonal() const;
};

using OperatorPtr = std::shared_ptr<const RealOperator>;

class DiagonalOperator final : public RealOperator {
 public:
  DiagonalOperator(GridSpec grid, std::vector<double> values);
  static std::shared_ptr<DiagonalOperator> from_function(const GridSpec& grid,
                                                         const std::function<double(std::span<const double>)>& fn);

  void apply_real(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override { return values_; }
  double spectral_upper_bound() const override;
  double spectral_lower_bound() const override;
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Box stencil of half-width r with per-node coefficients: y_i = Σ_s c[i][s] x[i + offset_s].
// Out-of-grid neighbours are dropped (Dirichlet) or wrapped (periodic).
class StencilOperator final : public RealOperator {
 public:
  StencilOperator(GridSpec grid, int radius);

  int radius() const { return radius_; }
  int stencil_size() const { return static_cast<int>(offsets_.size()); }
  // Offset vector of stencil slot s (dim entries in [−r, r]).
  std::span<const int> offset(int s) const;
  int slot(std::span<const int> offset) const;
  double& coefficient(std::size_t node, int s) { return coeffs_[node * offsets_.size() + s]; }
  double coefficient(std::size_t node, int s) const { return coeffs_[node * offsets_.size() + s]; }
  void add_diagonal(std::span<const double> d);

  void apply_real(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;
  double spectral_upper_bound() const override;
  // Largest |c[i][s] − c[j][s̄]| over paired entries (0 for an exactly symmetric stencil).
  double symmetry_defect() const;
  // Coordinate-list triplets (row, col, value) of the nonzero entries.
  void write_triplets(std::ostream& os) const;

 private:
  int radius_;
  std::vector<std::vector<int>> offset_vectors_;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<double> coeffs_;
  int center_slot_ = 0;
};

// FFTW planning is not thread-safe; every planner call holds this lock.
std::mutex& fftw_planner_mutex();

// Spectral realization of f(−Δ_h) on Dirichlet (DST-I) or periodic (DFT) grids.
class LaplacianSpectrum {
 public:
  explicit LaplacianSpectrum(GridSpec grid);
  ~LaplacianSpectrum();
  LaplacianSpectrum(const LaplacianSpectrum&) = delete;
  LaplacianSpectrum& operator=(const LaplacianSpectrum&) = delete;

  const GridSpec& grid() const { return grid_; }
  // Eigenvalue of −Δ_h attached to each transform coefficient.
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  void apply_function(const std::function<double(double)>& fn, std::span<const double> x, std::span<double> y) const;
  void apply_function(const std::function<double(double)>& fn, std::span<const cplx> x, std::span<cplx> y) const;
  // Applies a precomputed multiplier (one value per eigenvalue slot).
  void apply_multiplier(std::span<const double> mult, std::span<const cplx> x, std::span<cplx> y) const;
  void apply_multiplier(std::span<const cplx> mult, std::span<const cplx> x, std::span<cplx> y) const;

 private:
  struct Plans;
  GridSpec grid_;
  std::vector<double> eigenvalues_;
  std::unique_ptr<Plans> plans_;
};

// −Δ_h: 2n+1-point stencil on Dirichlet grids, stencil symbol applied spectrally on periodic grids.
class Laplacian final : public RealOperator {
 public:
  explicit Laplacian(GridSpec grid);

  void apply_real(std::span<const double> x, std::span<double> y) const override;
  void apply(std::span<const cplx> x, std::span<cplx> y) const override;
  std::vector<double> diagonal() const override;
  double spectral_upper_bound() const override;
  double spectral_lower_bound() const override { return 0.0; }
  std::shared_ptr<const LaplacianSpectrum> spectrum() const;

 private:
  void apply_stencil(std::span<const double> x, std::span<double> y) const;
  mutable std::shared_ptr<const LaplacianSpectrum> spectrum_;
  mutable std::once_flag spectrum_once_;
};

std::shared_ptr<Laplacian> build_laplacian(const GridSpec& grid);

// Σ c_k A_k.
class SumOperator final : public RealOperator {
 public:
  explicit SumOperator(GridSpec grid);
  SumOperator& add(double coef, OperatorPtr op);
  void apply_real(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;
  double spectral_upper_bound() const override;
  double spectral_lower_bound() const override;
  const std::vector<std::pair<double, OperatorPtr>>& terms() const { return terms_; }

 private:
  std::vector<std::pair<double, OperatorPtr>> terms_;
};

// D A D with D diagonal.
class DiagonalSandwich final : public RealOperator {
 public:
  DiagonalSandwich(std::vector<double> d, OperatorPtr inner);
  void apply_real(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;
  double spectral_upper_bound() const override;
  double spectral_lower_bound() const override;

 private:
  std::vector<double> d_;
  OperatorPtr inner_;
};

// B A B with B symmetric.
class OperatorSandwich final : public RealOperator {
 public:
  OperatorSandwich(OperatorPtr outer, OperatorPtr inner);
  void apply_real(std::span<const double> x, std::span<double> y) const override;

 private:
  OperatorPtr outer_;
  OperatorPtr inner_;
};

// Dense symmetric matrix, for small grids and oracles.
class DenseOperator final : public RealOperator {
 public:
  DenseOperator(GridSpec grid, std::vector<double> row_major);
  static std::shared_ptr<DenseOperator> from_operator(const RealOperator& op);
  void apply_real(std::span<const double> x, std::span<double> y) const override;
  std::vector<double> diagonal() const override;
  const std::vector<double>& matrix() const { return m_; }

 private:
  std::vector<double> m_;
};

OperatorPtr operator_sum(double ca, OperatorPtr a, double cb, OperatorPtr b);

// Self-adjointness defect |⟨φ, Aψ⟩ − ⟨Aφ, ψ⟩| / (‖φ‖‖ψ‖) over random complex pairs.
double self_adjointness_defect(const DiscreteOperator& op, int trials, unsigned seed);

// Rayleigh quotient ⟨x, A x⟩ / ⟨x, x⟩ for real vectors.
double rayleigh_quotient(const RealOperator& op, std::span<const double> x);

}  // namespace mvf
