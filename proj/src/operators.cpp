#include "mvf/operators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace mvf {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

void check_sizes(std::size_t n, std::size_t a, std::size_t b) {
  if (a != n || b != n) throw std::invalid_argument("operator: vector size mismatch");
}

double power_norm_estimate(const RealOperator& op, int iterations) {
  const std::size_t n = op.size();
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = nd(rng);
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double nx = 0.0;
    for (double v : x) nx += v * v;
    nx = std::sqrt(nx);
    if (nx == 0.0) return 0.0;
    for (auto& v : x) v /= nx;
    op.apply_real(x, y);
    double ny = 0.0;
    for (double v : y) ny += v * v;
    est = std::sqrt(ny);
    std::swap(x, y);
  }
  return est;
}

}  // namespace

Field DiscreteOperator::operator()(const Field& psi) const {
  require_same_grid(grid(), psi.grid());
  Field out(grid());
  apply(psi.values(), out.values());
  return out;
}

void RealOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t n = size();
  check_sizes(n, x.size(), y.size());
  std::vector<double> re(n), im(n), yr(n), yi(n);
  bool has_imag = false;
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
    has_imag = has_imag || im[i] != 0.0;
  }
  apply_real(re, yr);
  if (has_imag) apply_real(im, yi);
  for (std::size_t i = 0; i < n; ++i) y[i] = {yr[i], yi[i]};
}

std::vector<double> RealOperator::diagonal() const {
  const std::size_t n = size();
  std::vector<double> d(n), e(n, 0.0), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 1.0;
    apply_real(e, y);
    d[i] = y[i];
    e[i] = 0.0;
  }
  return d;
}

double RealOperator::spectral_upper_bound() const { return 1.05 * power_norm_estimate(*this, 60) + 1e-12; }

double RealOperator::spectral_lower_bound() const { return -spectral_upper_bound(); }

std::vector<double> RealOperator::operator()(std::span<const double> x) const {
  std::vector<double> y(size());
  apply_real(x, y);
  return y;
}

double RealOperator::max_abs_diagonal() const {
  double m = 0.0;
  for (double v : diagonal()) m = std::max(m, std::abs(v));
  return m;
}

DiagonalOperator::DiagonalOperator(GridSpec grid, std::vector<double> values)
    : RealOperator(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != size()) throw std::invalid_argument("diagonal operator: size mismatch");
}

std::shared_ptr<DiagonalOperator> DiagonalOperator::from_function(
    const GridSpec& grid, const std::function<double(std::span<const double>)>& fn) {
  std::vector<double> v(grid.size());
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.coordinates(i, x);
    v[i] = fn(x);
  }
  return std::make_shared<DiagonalOperator>(grid, std::move(v));
}

void DiagonalOperator::apply_real(std::span<const double> x, std::span<double> y) const {
  check_sizes(size(), x.size(), y.size());
  for (std::size_t i = 0; i < values_.size(); ++i) y[i] = values_[i] * x[i];
}

double DiagonalOperator::spectral_upper_bound() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double DiagonalOperator::spectral_lower_bound() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

StencilOperator::StencilOperator(GridSpec grid, int radius) : RealOperator(std::move(grid)), radius_(radius) {
  const int n = this->grid().dim;
  const int width = 2 * radius + 1;
  int count = 1;
  for (int a = 0; a < n; ++a) count *= width;
  for (int s = 0; s < count; ++s) {
    std::vector<int> o(n);
    int rem = s;
    for (int a = n - 1; a >= 0; --a) {
      o[a] = rem % width - radius;
      rem /= width;
    }
    std::ptrdiff_t lin = 0;
    bool center = true;
    for (int a = 0; a < n; ++a) {
      lin += static_cast<std::ptrdiff_t>(o[a]) * static_cast<std::ptrdiff_t>(this->grid().stride(a));
      center = center && o[a] == 0;
    }
    if (center) center_slot_ = s;
    offset_vectors_.push_back(std::move(o));
    offsets_.push_back(lin);
  }
  coeffs_.assign(size() * offsets_.size(), 0.0);
}

std::span<const int> StencilOperator::offset(int s) const { return offset_vectors_[s]; }

int StencilOperator::slot(std::span<const int> offset) const {
  const int width = 2 * radius_ + 1;
  int s = 0;
  for (int o : offset) {
    if (std::abs(o) > radius_) throw std::out_of_range("stencil: offset outside radius");
    s = s * width + (o + radius_);
  }
  return s;
}

void StencilOperator::add_diagonal(std::span<const double> d) {
  if (d.size() != size()) throw std::invalid_argument("stencil: diagonal size mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) coefficient(i, center_slot_) += d[i];
}

void StencilOperator::apply_real(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  check_sizes(n, x.size(), y.size());
  const GridSpec& g = grid();
  const int dim = g.dim;
  const int ns = stencil_size();
  const bool periodic = g.boundary == Boundary::Periodic;
  std::vector<int> m(dim), idx(dim, 0);
  for (int a = 0; a < dim; ++a) m[a] = g.nodes(a);

  for (std::size_t i = 0; i < n; ++i) {
    bool interior = true;
    for (int a = 0; a < dim; ++a) interior = interior && idx[a] >= radius_ && idx[a] < m[a] - radius_;
    const double* c = &coeffs_[i * ns];
    double acc = 0.0;
    if (interior) {
      for (int s = 0; s < ns; ++s) acc += c[s] * x[i + offsets_[s]];
    } else {
      for (int s = 0; s < ns; ++s) {
        if (c[s] == 0.0) continue;
        const auto& o = offset_vectors_[s];
        std::size_t j = 0;
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
          int k = idx[a] + o[a];
          if (k < 0 || k >= m[a]) {
            if (!periodic) {
              inside = false;
              break;
            }
            k = (k % m[a] + m[a]) % m[a];
          }
          j += static_cast<std::size_t>(k) * g.stride(a);
        }
        if (inside) acc += c[s] * x[j];
      }
    }
    y[i] = acc;
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[a] < m[a]) break;
      idx[a] = 0;
    }
  }
}

std::vector<double> StencilOperator::diagonal() const {
  std::vector<double> d(size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = coefficient(i, center_slot_);
  return d;
}

double StencilOperator::spectral_upper_bound() const {
  const int ns = stencil_size();
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double row = 0.0;
    for (int s = 0; s < ns; ++s) row += std::abs(coeffs_[i * ns + s]);
    best = std::max(best, row);
  }
  return best;
}

double StencilOperator::symmetry_defect() const {
  const GridSpec& g = grid();
  const int dim = g.dim;
  const int ns = stencil_size();
  std::vector<int> idx(dim), opp(dim);
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    std::size_t rem = i;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % g.nodes(a));
      rem /= g.nodes(a);
    }
    for (int s = 0; s < ns; ++s) {
      const auto& o = offset_vectors_[s];
      std::size_t j = 0;
      bool inside = true;
      for (int a = 0; a < dim && inside; ++a) {
        int k = idx[a] + o[a];
        if (k < 0 || k >= g.nodes(a)) {
          if (g.boundary == Boundary::Dirichlet) {
            inside = false;
            break;
          }
          k = (k % g.nodes(a) + g.nodes(a)) % g.nodes(a);
        }
        j += static_cast<std::size_t>(k) * g.stride(a);
        opp[a] = -o[a];
      }
      if (!inside) continue;
      worst = std::max(worst, std::abs(coefficient(i, s) - coefficient(j, slot(opp))));
    }
  }
  return worst;
}

void StencilOperator::write_triplets(std::ostream& os) const {
  const GridSpec& g = grid();
  const int dim = g.dim;
  std::vector<int> idx(dim);
  os.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    std::size_t rem = i;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % g.nodes(a));
      rem /= g.nodes(a);
    }
    for (int s = 0; s < stencil_size(); ++s) {
      const double c = coefficient(i, s);
      if (c == 0.0) continue;
      const auto& o = offset_vectors_[s];
      std::size_t j = 0;
      bool inside = true;
      for (int a = 0; a < dim; ++a) {
        int k = idx[a] + o[a];
        if (k < 0 || k >= g.nodes(a)) {
          if (g.boundary == Boundary::Dirichlet) {
            inside = false;
            break;
          }
          k = (k % g.nodes(a) + g.nodes(a)) % g.nodes(a);
        }
        j += static_cast<std::size_t>(k) * g.stride(a);
      }
      if (inside) os << i << ' ' << j << ' ' << c << '\n';
    }
  }
}

struct LaplacianSpectrum::Plans {
  fftw_plan forward = nullptr;   // DST-I or forward DFT
  fftw_plan backward = nullptr;  // periodic only
  double scale = 1.0;
  bool periodic = false;
  std::size_t n = 0;

  ~Plans() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

LaplacianSpectrum::LaplacianSpectrum(GridSpec grid) : grid_(std::move(grid)), plans_(std::make_unique<Plans>()) {
  const int dim = grid_.dim;
  const std::size_t n = grid_.size();
  plans_->n = n;
  plans_->periodic = grid_.boundary == Boundary::Periodic;
  std::vector<int> m(dim);
  for (int a = 0; a < dim; ++a) m[a] = grid_.nodes(a);

  // Per-axis symbols; DST-I mode k ↔ sin(kπ i/(m+1)), DFT index j ↔ e^{2πi j i/m}.
  std::vector<std::vector<double>> axis(dim);
  for (int a = 0; a < dim; ++a) {
    const double h = grid_.spacing(a);
    axis[a].resize(m[a]);
    for (int k = 0; k < m[a]; ++k) {
      const double theta =
          plans_->periodic ? 2.0 * std::numbers::pi * k / m[a] : std::numbers::pi * (k + 1) / (m[a] + 1);
      axis[a][k] = (2.0 - 2.0 * std::cos(theta)) / (h * h);
    }
  }
  eigenvalues_.assign(n, 0.0);
  std::vector<int> idx(dim, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = 0.0;
    for (int a = 0; a < dim; ++a) lam += axis[a][idx[a]];
    eigenvalues_[i] = lam;
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[a] < m[a]) break;
      idx[a] = 0;
    }
  }

  std::lock_guard lock(fftw_planner_mutex());
  if (plans_->periodic) {
    auto* buf = fftw_alloc_complex(n);
    plans_->forward = fftw_plan_dft(dim, m.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft(dim, m.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(buf);
    plans_->scale = 1.0 / static_cast<double>(n);
  } else {
    auto* buf = fftw_alloc_real(n);
    std::vector<fftw_r2r_kind> kinds(dim, FFTW_RODFT00);
    plans_->forward = fftw_plan_r2r(dim, m.data(), buf, buf, kinds.data(), FFTW_ESTIMATE);
    fftw_free(buf);
    double s = 1.0;
    for (int a = 0; a < dim; ++a) s *= 2.0 * (m[a] + 1);
    plans_->scale = 1.0 / s;
  }
  if (!plans_->forward) throw std::runtime_error("fftw planning failed");
}

LaplacianSpectrum::~LaplacianSpectrum() = default;

void LaplacianSpectrum::apply_multiplier(std::span<const cplx> mult, std::span<const cplx> x,
                                         std::span<cplx> y) const {
  const std::size_t n = plans_->n;
  check_sizes(n, x.size(), y.size());
  if (mult.size() != n) throw std::invalid_argument("spectral multiplier: size mismatch");
  if (plans_->periodic) {
    auto* buf = fftw_alloc_complex(n);
    for (std::size_t i = 0; i < n; ++i) {
      buf[i][0] = x[i].real();
      buf[i][1] = x[i].imag();
    }
    fftw_execute_dft(plans_->forward, buf, buf);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx v = cplx(buf[i][0], buf[i][1]) * mult[i] * plans_->scale;
      buf[i][0] = v.real();
      buf[i][1] = v.imag();
    }
    fftw_execute_dft(plans_->backward, buf, buf);
    for (std::size_t i = 0; i < n; ++i) y[i] = {buf[i][0], buf[i][1]};
    fftw_free(buf);
    return;
  }
  auto* re = fftw_alloc_real(n);
  auto* im = fftw_alloc_real(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  fftw_execute_r2r(plans_->forward, re, re);
  fftw_execute_r2r(plans_->forward, im, im);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx v = cplx(re[i], im[i]) * mult[i] * plans_->scale;
    re[i] = v.real();
    im[i] = v.imag();
  }
  fftw_execute_r2r(plans_->forward, re, re);
  fftw_execute_r2r(plans_->forward, im, im);
  for (std::size_t i = 0; i < n; ++i) y[i] = {re[i], im[i]};
  fftw_free(re);
  fftw_free(im);
}

void LaplacianSpectrum::apply_multiplier(std::span<const double> mult, std::span<const cplx> x,
                                         std::span<cplx> y) const {
  std::vector<cplx> m(mult.begin(), mult.end());
  apply_multiplier(std::span<const cplx>(m), x, y);
}

void LaplacianSpectrum::apply_function(const std::function<double(double)>& fn, std::span<const cplx> x,
                                       std::span<cplx> y) const {
  std::vector<double> m(eigenvalues_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = fn(eigenvalues_[i]);
  apply_multiplier(std::span<const double>(m), x, y);
}

void LaplacianSpectrum::apply_function(const std::function<double(double)>& fn, std::span<const double> x,
                                       std::span<double> y) const {
  const std::size_t n = plans_->n;
  check_sizes(n, x.size(), y.size());
  if (plans_->periodic) {
    std::vector<cplx> cx(x.begin(), x.end()), cy(n);
    apply_function(fn, cx, cy);
    for (std::size_t i = 0; i < n; ++i) y[i] = cy[i].real();
    return;
  }
  auto* buf = fftw_alloc_real(n);
  std::copy(x.begin(), x.end(), buf);
  fftw_execute_r2r(plans_->forward, buf, buf);
  for (std::size_t i = 0; i < n; ++i) buf[i] *= fn(eigenvalues_[i]) * plans_->scale;
  fftw_execute_r2r(plans_->forward, buf, buf);
  std::copy(buf, buf + n, y.begin());
  fftw_free(buf);
}

Laplacian::Laplacian(GridSpec grid) : RealOperator(std::move(grid)) {}

std::shared_ptr<const LaplacianSpectrum> Laplacian::spectrum() const {
  std::call_once(spectrum_once_, [this] { spectrum_ = std::make_shared<LaplacianSpectrum>(grid()); });
  return spectrum_;
}

void Laplacian::apply_stencil(std::span<const double> x, std::span<double> y) const {
  const GridSpec& g = grid();
  const int dim = g.dim;
  const std::size_t n = size();
  std::vector<int> m(dim), idx(dim, 0);
  std::vector<double> w(dim);
  std::vector<std::size_t> st(dim);
  double center = 0.0;
  for (int a = 0; a < dim; ++a) {
    m[a] = g.nodes(a);
    w[a] = 1.0 / (g.spacing(a) * g.spacing(a));
    st[a] = g.stride(a);
    center += 2.0 * w[a];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double acc = center * x[i];
    for (int a = 0; a < dim; ++a) {
      if (idx[a] > 0) acc -= w[a] * x[i - st[a]];
      if (idx[a] + 1 < m[a]) acc -= w[a] * x[i + st[a]];
    }
    y[i] = acc;
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[a] < m[a]) break;
      idx[a] = 0;
    }
  }
}

void Laplacian::apply_real(std::span<const double> x, std::span<double> y) const {
  check_sizes(size(), x.size(), y.size());
  if (grid().boundary == Boundary::Dirichlet) {
    apply_stencil(x, y);
  } else {
    spectrum()->apply_function([](double l) { return l; }, x, y);
  }
}

void Laplacian::apply(std::span<const cplx> x, std::span<cplx> y) const {
  if (grid().boundary == Boundary::Dirichlet) {
    RealOperator::apply(x, y);
  } else {
    check_sizes(size(), x.size(), y.size());
    spectrum()->apply_multiplier(std::span<const double>(spectrum()->eigenvalues()), x, y);
  }
}

std::vector<double> Laplacian::diagonal() const {
  double center = 0.0;
  for (int a = 0; a < grid().dim; ++a) center += 2.0 / (grid().spacing(a) * grid().spacing(a));
  return std::vector<double>(size(), center);
}

double Laplacian::spectral_upper_bound() const {
  double b = 0.0;
  for (int a = 0; a < grid().dim; ++a) b += 4.0 / (grid().spacing(a) * grid().spacing(a));
  return b;
}

std::shared_ptr<Laplacian> build_laplacian(const GridSpec& grid) {
  grid.validate();
  return std::make_shared<Laplacian>(grid);
}

SumOperator::SumOperator(GridSpec grid) : RealOperator(std::move(grid)) {}

SumOperator& SumOperator::add(double coef, OperatorPtr op) {
  if (!op) throw std::invalid_argument("sum operator: null term");
  require_same_grid(grid(), op->grid());
  terms_.emplace_back(coef, std::move(op));
  return *this;
}

void SumOperator::apply_real(std::span<const double> x, std::span<double> y) const {
  check_sizes(size(), x.size(), y.size());
  std::fill(y.begin(), y.end(), 0.0);
  std::vector<double> tmp(size());
  for (const auto& [c, op] : terms_) {
    op->apply_real(x, tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) y[i] += c * tmp[i];
  }
}

std::vector<double> SumOperator::diagonal() const {
  std::vector<double> d(size(), 0.0);
  for (const auto& [c, op] : terms_) {
    const auto t = op->diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += c * t[i];
  }
  return d;
}

double SumOperator::spectral_upper_bound() const {
  double b = 0.0;
  for (const auto& [c, op] : terms_) b += c >= 0 ? c * op->spectral_upper_bound() : c * op->spectral_lower_bound();
  return b;
}

double SumOperator::spectral_lower_bound() const {
  double b = 0.0;
  for (const auto& [c, op] : terms_) b += c >= 0 ? c * op->spectral_lower_bound() : c * op->spectral_upper_bound();
  return b;
}

DiagonalSandwich::DiagonalSandwich(std::vector<double> d, OperatorPtr inner)
    : RealOperator(inner->grid()), d_(std::move(d)), inner_(std::move(inner)) {
  if (d_.size() != size()) throw std::invalid_argument("sandwich: size mismatch");
}

void DiagonalSandwich::apply_real(std::span<const double> x, std::span<double> y) const {
  check_sizes(size(), x.size(), y.size());
  std::vector<double> t(size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = d_[i] * x[i];
  inner_->apply_real(t, y);
  for (std::size_t i = 0; i < t.size(); ++i) y[i] *= d_[i];
}

std::vector<double> DiagonalSandwich::diagonal() const {
  auto d = inner_->diagonal();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= d_[i] * d_[i];
  return d;
}

double DiagonalSandwich::spectral_upper_bound() const {
  double m = 0.0;
  for (double v : d_) m = std::max(m, v * v);
  return std::max(0.0, inner_->spectral_upper_bound()) * m;
}

double DiagonalSandwich::spectral_lower_bound() const {
  double m = 0.0;
  for (double v : d_) m = std::max(m, v * v);
  return std::min(0.0, inner_->spectral_lower_bound()) * m;
}

OperatorSandwich::OperatorSandwich(OperatorPtr outer, OperatorPtr inner)
    : RealOperator(inner->grid()), outer_(std::move(outer)), inner_(std::move(inner)) {
  require_same_grid(outer_->grid(), inner_->grid());
}

void OperatorSandwich::apply_real(std::span<const double> x, std::span<double> y) const {
  check_sizes(size(), x.size(), y.size());
  std::vector<double> t(size()), u(size());
  outer_->apply_real(x, t);
  inner_->apply_real(t, u);
  outer_->apply_real(u, y);
}

DenseOperator::DenseOperator(GridSpec grid, std::vector<double> row_major)
    : RealOperator(std::move(grid)), m_(std::move(row_major)) {
  if (m_.size() != size() * size()) throw std::invalid_argument("dense operator: size mismatch");
}

std::shared_ptr<DenseOperator> DenseOperator::from_operator(const RealOperator& op) {
  const std::size_t n = op.size();
  std::vector<double> m(n * n), e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply_real(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) m[i * n + j] = col[i];
  }
  // Symmetrize away roundoff so downstream eigensolvers see an exactly symmetric matrix.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (m[i * n + j] + m[j * n + i]);
      m[i * n + j] = m[j * n + i] = s;
    }
  }
  return std::make_shared<DenseOperator>(op.grid(), std::move(m));
}

void DenseOperator::apply_real(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  check_sizes(n, x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &m_[i * n];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

std::vector<double> DenseOperator::diagonal() const {
  const std::size_t n = size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = m_[i * n + i];
  return d;
}

OperatorPtr operator_sum(double ca, OperatorPtr a, double cb, OperatorPtr b) {
  auto s = std::make_shared<SumOperator>(a->grid());
  s->add(ca, std::move(a)).add(cb, std::move(b));
  return s;
}

double self_adjointness_defect(const DiscreteOperator& op, int trials, unsigned seed) {
  const std::size_t n = op.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> phi(n), psi(n), aphi(n), apsi(n);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = {nd(rng), nd(rng)};
      psi[i] = {nd(rng), nd(rng)};
    }
    op.apply(phi, aphi);
    op.apply(psi, apsi);
    cplx lhs = 0.0, rhs = 0.0;
    double np = 0.0, nq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lhs += std::conj(phi[i]) * apsi[i];
      rhs += std::conj(aphi[i]) * psi[i];
      np += std::norm(phi[i]);
      nq += std::norm(psi[i]);
    }
    worst = std::max(worst, std::abs(lhs - rhs) / std::sqrt(np * nq));
  }
  return worst;
}

double rayleigh_quotient(const RealOperator& op, std::span<const double> x) {
  std::vector<double> y(op.size());
  op.apply_real(x, y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += x[i] * y[i];
    den += x[i] * x[i];
  }
  return num / den;
}

}  // namespace mvf
