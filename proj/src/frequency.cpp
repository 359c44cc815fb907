#include "mvf/frequency.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mvf/commutator.hpp"
#include "mvf/parallel.hpp"

namespace mvf {

namespace {

double bump_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

double smooth_transition(double t) {
  const double a = bump_exp(t);
  const double b = bump_exp(1.0 - t);
  return a / (a + b);
}

double cutoff_P(double t) {
  const double a = bump_exp(t - 1.0);
  const double b = bump_exp(3.0 - t);
  return a / (a + b);
}

double cutoff_I(double t) {
  const double a = bump_exp(t + 1.0);
  const double b = bump_exp(-t);
  return a / (a + b);
}

double cutoff_Q(double t) { return cutoff_I(t) - cutoff_P(t); }

double CutoffSpec::operator()(double lambda) const {
  if (!(K > 0.0)) throw std::invalid_argument("cutoff: K must be positive");
  const double t = lambda / K;
  return part == CutoffPart::P ? cutoff_P(t) : cutoff_Q(t);
}

void SpectralCalculus::apply(const std::function<double(double)>& fn, std::span<const cplx> x,
                             std::span<cplx> y) const {
  const std::size_t n = x.size();
  std::vector<double> re(n), im(n), ore(n), oim(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  apply(fn, re, ore);
  apply(fn, im, oim);
  for (std::size_t i = 0; i < n; ++i) y[i] = {ore[i], oim[i]};
}

LaplacianCalculus::LaplacianCalculus(const GridSpec& grid) : spectrum_(build_laplacian(grid)->spectrum()) {}

void LaplacianCalculus::apply(const std::function<double(double)>& fn, std::span<const double> x,
                              std::span<double> y) const {
  spectrum_->apply_function(fn, x, y);
}

void LaplacianCalculus::apply(const std::function<double(double)>& fn, std::span<const cplx> x,
                              std::span<cplx> y) const {
  spectrum_->apply_function(fn, x, y);
}

double LaplacianCalculus::lower() const {
  const auto& e = spectrum_->eigenvalues();
  return *std::min_element(e.begin(), e.end());
}

double LaplacianCalculus::upper() const {
  const auto& e = spectrum_->eigenvalues();
  return *std::max_element(e.begin(), e.end());
}

DenseCalculus::DenseCalculus(const RealOperator& A) : grid_(A.grid()), n_(A.size()) {
  const auto dense = DenseOperator::from_operator(A);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(dense->matrix().data(),
                                                                                             n_, n_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense calculus: eigensolve failed");
  evals_.assign(es.eigenvalues().data(), es.eigenvalues().data() + n_);
  vecs_.assign(es.eigenvectors().data(), es.eigenvectors().data() + n_ * n_);
}

void DenseCalculus::apply(const std::function<double(double)>& fn, std::span<const double> x,
                          std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw std::invalid_argument("dense calculus: size mismatch");
  Eigen::Map<const Eigen::MatrixXd> V(vecs_.data(), n_, n_);
  Eigen::VectorXd z = V.transpose() * Eigen::Map<const Eigen::VectorXd>(x.data(), n_);
  for (std::size_t i = 0; i < n_; ++i) z(i) *= fn(evals_[i]);
  Eigen::Map<Eigen::VectorXd>(y.data(), n_) = V * z;
}

std::vector<double> DenseCalculus::matrix(const std::function<double(double)>& fn) const {
  Eigen::Map<const Eigen::MatrixXd> V(vecs_.data(), n_, n_);
  Eigen::VectorXd f(n_);
  for (std::size_t i = 0; i < n_; ++i) f(i) = fn(evals_[i]);
  const Eigen::MatrixXd M = V * f.asDiagonal() * V.transpose();
  std::vector<double> out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = M(i, j);
  return out;
}

double ChebyshevSeries::operator()(double x) const {
  const double t = (2.0 * x - (hi + lo)) / (hi - lo);
  // Clenshaw.
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + coeffs[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + (coeffs.empty() ? 0.0 : coeffs[0]);
}

ChebyshevSeries chebyshev_fit(const std::function<double(double)>& fn, double lo, double hi, double tol,
                              std::size_t max_degree) {
  if (!(hi > lo)) throw std::invalid_argument("chebyshev_fit: empty interval");
  if (!(tol > 0.0)) throw std::invalid_argument("chebyshev_fit: tolerance must be positive");
  for (std::size_t M = 64;; M *= 2) {
    std::vector<double> in(M), out(M);
    for (std::size_t k = 0; k < M; ++k) {
      const double t = std::cos(std::numbers::pi * (k + 0.5) / M);
      in[k] = fn(0.5 * (hi + lo) + 0.5 * (hi - lo) * t);
    }
    {
      fftw_plan plan;
      {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_r2r_1d(static_cast<int>(M), in.data(), out.data(), FFTW_REDFT10, FFTW_ESTIMATE);
      }
      fftw_execute(plan);
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
    for (auto& c : out) c /= static_cast<double>(M);
    out[0] *= 0.5;
    // Coefficients in the upper half stand in for the aliased remainder.
    double upper = 0.0;
    for (std::size_t k = M / 2; k < M; ++k) upper += std::abs(out[k]);
    if (upper <= 0.25 * tol || M >= max_degree) {
      std::size_t d = M / 2;
      double tail = upper;
      while (d > 1 && tail + std::abs(out[d - 1]) <= 0.5 * tol) tail += std::abs(out[--d]);
      ChebyshevSeries s;
      s.lo = lo;
      s.hi = hi;
      s.coeffs.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d));
      s.tail_bound = tail + upper;
      if (s.tail_bound > tol) {
        std::ostringstream os;
        os << "chebyshev_fit: degree cap " << max_degree << " reached with tail " << s.tail_bound;
        throw std::runtime_error(os.str());
      }
      return s;
    }
  }
}

ChebyshevCalculus::ChebyshevCalculus(OperatorPtr A, double lo, double hi, double tol)
    : A_(std::move(A)), lo_(lo), hi_(hi), tol_(tol) {
  if (!A_) throw std::invalid_argument("chebyshev calculus: null operator");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw std::invalid_argument("chebyshev calculus: a finite spectral interval is required");
  }
}

void ChebyshevCalculus::apply_series(const ChebyshevSeries& s, std::span<const double> x, std::span<double> y) const {
  const std::size_t n = x.size();
  const double a = 2.0 / (s.hi - s.lo);
  const double b = -(s.hi + s.lo) / (s.hi - s.lo);
  std::vector<double> t0(x.begin(), x.end()), t1(n), t2(n), Ax(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = s.coeffs[0] * t0[i];
  last_degree_ = s.coeffs.size() - 1;
  if (s.coeffs.size() == 1) return;
  A_->apply_real(t0, Ax);
  for (std::size_t i = 0; i < n; ++i) {
    t1[i] = a * Ax[i] + b * t0[i];
    y[i] += s.coeffs[1] * t1[i];
  }
  for (std::size_t k = 2; k < s.coeffs.size(); ++k) {
    A_->apply_real(t1, Ax);
    const double c = s.coeffs[k];
    for (std::size_t i = 0; i < n; ++i) {
      t2[i] = 2.0 * (a * Ax[i] + b * t1[i]) - t0[i];
      y[i] += c * t2[i];
    }
    std::swap(t0, t1);
    std::swap(t1, t2);
  }
}

void ChebyshevCalculus::apply(const std::function<double(double)>& fn, std::span<const double> x,
                              std::span<double> y) const {
  apply_series(chebyshev_fit(fn, lo_, hi_, tol_), x, y);
}

FunctionOfOperator::FunctionOfOperator(std::shared_ptr<const SpectralCalculus> calc, std::function<double(double)> fn)
    : RealOperator(calc->grid()), calc_(std::move(calc)), fn_(std::move(fn)) {
  if (auto cheb = std::dynamic_pointer_cast<const ChebyshevCalculus>(calc_)) {
    // Fit once; every matvec reuses the series.
    auto series = std::make_shared<ChebyshevSeries>(chebyshev_fit(fn_, cheb->lower(), cheb->upper()));
    series_apply_ = [cheb, series](std::span<const double> x, std::span<double> y) { cheb->apply_series(*series, x, y); };
  }
}

void FunctionOfOperator::apply_real(std::span<const double> x, std::span<double> y) const {
  if (series_apply_) {
    series_apply_(x, y);
  } else {
    calc_->apply(fn_, x, y);
  }
}

void FunctionOfOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  if (series_apply_) {
    RealOperator::apply(x, y);
  } else {
    calc_->apply(fn_, x, y);
  }
}

OperatorPtr cutoff_operator(std::shared_ptr<const SpectralCalculus> calc, const CutoffSpec& spec) {
  if (!(spec.K > 0.0)) throw std::invalid_argument("cutoff: K must be positive");
  return std::make_shared<FunctionOfOperator>(std::move(calc), [spec](double l) { return spec(l); });
}

Field apply_cutoff(const SpectralCalculus& calc, const CutoffSpec& spec, const Field& psi) {
  require_same_grid(calc.grid(), psi.grid());
  if (!(spec.K > 0.0)) throw std::invalid_argument("cutoff: K must be positive");
  Field out(psi.grid());
  calc.apply([spec](double l) { return spec(l); }, psi.values(), out.values());
  return out;
}

SandwichForms sandwich_lower_bound(std::shared_ptr<const SpectralCalculus> calcA, OperatorPtr A,
                                   std::shared_ptr<const DiagonalOperator> B, double K, double epsilon) {
  if (!B) throw std::invalid_argument("sandwich: B must be a diagonal operator");
  require_same_grid(A->grid(), B->grid());
  auto inner = operator_sum(epsilon, A, -2.0, B);
  SandwichForms s;
  s.high = std::make_shared<OperatorSandwich>(cutoff_operator(calcA, {K, CutoffPart::P}), inner);
  s.low = std::make_shared<OperatorSandwich>(cutoff_operator(calcA, {K, CutoffPart::Q}), inner);
  std::vector<double> samples = calcA->eigenvalues();
  if (samples.empty()) {
    const double lo = calcA->lower(), hi = calcA->upper();
    for (int i = 0; i <= 4096; ++i) samples.push_back(lo + (hi - lo) * i / 4096.0);
  }
  s.cross_term_min = kInf;
  const CutoffSpec P{K, CutoffPart::P}, Q{K, CutoffPart::Q};
  for (double l : samples) s.cross_term_min = std::min(s.cross_term_min, P(l) * l * Q(l));
  return s;
}

NormEstimate norm_chi_Q_x(double delta, const CutoffSpec& spec, const GridSpec& grid, double slab_L, double tol,
                          int max_iterations, unsigned seed) {
  if (grid.boundary != Boundary::Dirichlet) throw std::invalid_argument("norm_chi_Q_x: Dirichlet grid required");
  if (!(delta >= 0.0) || !(slab_L >= 0.0)) throw std::invalid_argument("norm_chi_Q_x: negative delta or slab");
  const std::size_t n = grid.size();
  std::vector<double> r(n), chi(n);
  std::vector<double> x(grid.dim);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    grid.coordinates(i, x);
    double y2 = 0.0, r2 = x[0] * x[0];
    for (int j = 1; j < grid.dim; ++j) y2 += x[j] * x[j];
    r2 += y2;
    r[i] = std::sqrt(r2);
    chi[i] = (std::abs(x[0]) <= slab_L && std::sqrt(y2) <= delta) ? 1.0 : 0.0;
    any = any || chi[i] > 0.0;
  }
  NormEstimate est;
  if (!any) {
    est.converged = true;
    return est;
  }
  LaplacianCalculus calc(grid);
  const auto q = [spec](double l) { return spec(l); };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> u(n), w(n), t(n);
  for (auto& v : u) v = nd(rng);
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    s = std::sqrt(s);
    for (auto& a : v) a /= s;
    return s;
  };
  normalize(u);
  double nu_prev = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) t[i] = r[i] * u[i];
    calc.apply(q, t, w);
    for (std::size_t i = 0; i < n; ++i) w[i] *= chi[i];
    calc.apply(q, w, t);
    for (std::size_t i = 0; i < n; ++i) w[i] = r[i] * t[i];
    const double nu = normalize(w);
    u.swap(w);
    est.iterations = it;
    est.value = std::sqrt(nu);
    if (std::abs(nu - nu_prev) <= tol * nu) {
      est.converged = true;
      return est;
    }
    nu_prev = nu;
  }
  std::ostringstream os;
  os << "norm_chi_Q_x: power iteration did not converge in " << max_iterations << " iterations (delta " << delta
     << ")";
  throw std::runtime_error(os.str());
}

double area_matched_radius(const GridSpec& grid, double delta) {
  const int m = grid.dim - 1;
  std::size_t count = 0;
  std::vector<int> idx(m, 0);
  for (;;) {
    double y2 = 0.0;
    for (int a = 0; a < m; ++a) {
      const double c = grid.coordinate(a + 1, idx[a]);
      y2 += c * c;
    }
    if (std::sqrt(y2) <= delta) ++count;
    int a = m - 1;
    for (; a >= 0; --a) {
      if (++idx[a] < grid.nodes(a + 1)) break;
      idx[a] = 0;
    }
    if (a < 0) break;
  }
  double area = static_cast<double>(count);
  for (int a = 1; a < grid.dim; ++a) area *= grid.spacing(a);
  const double unit = std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
  return std::pow(area / unit, 1.0 / m);
}

std::vector<double> high_energy_weight(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec) {
  const double w = spec.profile.hardy_weight();
  std::vector<double> W(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> x(grid.dim), gF(grid.dim), gV(grid.dim);
    for (std::size_t i = b; i < e; ++i) {
      grid.coordinates(i, x);
      spec.gradient_F(x, gF);
      V.gradient(x, gV);
      double r2 = 0.0, dot = 0.0;
      for (int j = 0; j < grid.dim; ++j) {
        r2 += (x[j] - spec.centers[0][j]) * (x[j] - spec.centers[0][j]);
        dot += gF[j] * gV[j];
      }
      const double g2 = spec.profile.g2(std::sqrt(r2));
      W[i] = w * V.value(x) + 2.0 * dot / g2;
    }
  });
  return W;
}

namespace {

constexpr std::size_t kDenseNodeLimit = 8000;

}  // namespace

HighEnergyProblem::HighEnergyProblem(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec,
                                     double epsilon, const HighEnergyOptions& opt)
    : grid_(grid), epsilon_(epsilon), opt_(opt) {
  spec.validate();
  const int n = spec.dim();
  const double sigma = spec.profile.sigma();
  if (!(sigma > 0.5 && sigma < 4.0 * (n - 2) * (n - 2))) {
    throw std::invalid_argument("high-energy: sigma must lie in (1/2, 4(n-2)^2)");
  }
  if (spec.centers.size() != 1) throw std::invalid_argument("high-energy: a single-center multiplier is required");
  if (V.is_time_dependent()) throw std::invalid_argument("high-energy: static potential required");
  const double w = spec.profile.hardy_weight();
  if (!(epsilon > 0.0 && epsilon <= w)) throw std::invalid_argument("high-energy: epsilon must lie in (0, w]");

  const auto comm = assemble_commutator(grid, V, spec);
  H_ = build_hamiltonian(grid, V);
  std::vector<double> g(grid.size());
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < g.size(); ++i) {
    grid.coordinates(i, x);
    double r2 = 0.0;
    for (int j = 0; j < grid.dim; ++j) r2 += (x[j] - spec.centers[0][j]) * (x[j] - spec.centers[0][j]);
    g[i] = spec.profile.g(std::sqrt(r2));
  }
  inner_ = operator_sum(1.0, comm.total, -(w - epsilon), std::make_shared<DiagonalSandwich>(g, H_));
  for (double d : inner_->diagonal()) scale_ = std::max(scale_, std::abs(d));
  for (double v : high_energy_weight(grid, V, spec)) weight_norm_ = std::max(weight_norm_, std::abs(v));

  if (opt_.dense) {
    const std::size_t N = grid.size();
    if (N > kDenseNodeLimit) throw std::invalid_argument("high-energy: grid too large for the dense realization");
    const auto Hd = DenseOperator::from_operator(*H_);
    const auto Xd = DenseOperator::from_operator(*inner_);
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::Map<const RowMat>(Hd->matrix().data(), N, N));
    if (es.info() != Eigen::Success) throw std::runtime_error("high-energy: eigensolve of H failed");
    evals_ = es.eigenvalues();
    const Eigen::MatrixXd& U = es.eigenvectors();
    inner_eig_ = U.transpose() * Eigen::Map<const RowMat>(Xd->matrix().data(), N, N) * U;
  } else {
    double lo = 0.0;
    for (double v : sample_potential(grid, V)) lo = std::min(lo, v);
    calc_ = std::make_shared<ChebyshevCalculus>(H_, lo, H_->spectral_upper_bound());
  }
  params_ = {{"epsilon", epsilon},
             {"sigma", sigma},
             {"a", spec.profile.a()},
             {"center", spec.centers[0]},
             {"points", grid.points},
             {"extent", grid.extent},
             {"realization", opt_.dense ? "dense" : "chebyshev"}};
}

double HighEnergyProblem::spectral_upper() const {
  return opt_.dense ? evals_.maxCoeff() : calc_->upper();
}

PositivityCertificate HighEnergyProblem::certify_at(double K) const {
  if (!(K > 0.0)) throw std::invalid_argument("high-energy: K must be positive");
  const CutoffSpec P{K, CutoffPart::P};
  CertifyOptions co = opt_.certify;
  co.scale = scale_;
  auto params = params_;
  params["K"] = K;
  if (opt_.dense) {
    const std::size_t N = static_cast<std::size_t>(evals_.size());
    Eigen::VectorXd p(N);
    for (std::size_t i = 0; i < N; ++i) p(i) = P(evals_(i));
    const Eigen::MatrixXd M = p.asDiagonal() * inner_eig_ * p.asDiagonal();
    std::vector<double> rm(N * N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) rm[i * N + j] = 0.5 * (M(i, j) + M(j, i));
    // The form lives in the eigenbasis of H; only its spectrum is used.
    DenseOperator form(grid_, std::move(rm));
    return certify(form, "high-energy-sandwich", params, co);
  }
  OperatorSandwich form(cutoff_operator(calc_, P), inner_);
  return certify(form, "high-energy-sandwich", params, co);
}

PositivityCertificate high_energy_certificate(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec,
                                              double epsilon, double K, const HighEnergyOptions& opt) {
  return HighEnergyProblem(grid, V, spec, epsilon, opt).certify_at(K);
}

}  // namespace mvf
