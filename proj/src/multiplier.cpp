#include "mvf/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "mvf/parallel.hpp"

namespace mvf {

std::string to_string(MultiplierVariant v) { return v == MultiplierVariant::SmoothF ? "smooth" : "morawetz"; }

MultiplierVariant multiplier_variant_from_string(const std::string& s) {
  if (s == "smooth") return MultiplierVariant::SmoothF;
  if (s == "morawetz") return MultiplierVariant::Morawetz;
  throw std::invalid_argument("unknown multiplier variant '" + s + "'");
}

void MultiplierSpec::validate() const {
  if (centers.empty()) throw std::invalid_argument("multiplier: no centers");
  if (weights.size() != centers.size()) throw std::invalid_argument("multiplier: one weight per center required");
  for (const auto& c : centers) {
    if (static_cast<int>(c.size()) != profile.dim()) throw std::invalid_argument("multiplier: center dimension");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("multiplier: weights must be positive");
  }
}

double MultiplierSpec::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void MultiplierSpec::gradient_F(std::span<const double> x, std::span<double> out) const {
  const int n = dim();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto& c = centers[k];
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) r2 += (x[j] - c[j]) * (x[j] - c[j]);
    const double rho = std::sqrt(r2);
    double s;
    if (variant == MultiplierVariant::Morawetz) {
      // (x − c)/|x − c|, set to 0 at the center node.
      s = rho > 0.0 ? 1.0 / rho : 0.0;
    } else {
      s = profile.f_over_r(rho);
    }
    s *= weights[k];
    for (int j = 0; j < n; ++j) out[j] += s * (x[j] - c[j]);
  }
}

double MultiplierSpec::value_F(std::span<const double> x) const {
  const int n = dim();
  double v = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) r2 += (x[j] - centers[k][j]) * (x[j] - centers[k][j]);
    const double rho = std::sqrt(r2);
    v += weights[k] * (variant == MultiplierVariant::Morawetz ? rho : profile.F(rho));
  }
  return v;
}

MultiplierSpec build_gamma_N(const RadialProfile& profile, int N, const Point& axis_b) {
  if (N < 0) throw std::invalid_argument("gamma_N: N must be nonnegative");
  if (static_cast<int>(axis_b.size()) != profile.dim()) throw std::invalid_argument("gamma_N: axis dimension");
  if (std::all_of(axis_b.begin(), axis_b.end(), [](double v) { return v == 0.0; })) {
    throw std::invalid_argument("gamma_N: axis vector must be nonzero");
  }
  MultiplierSpec s{profile, {}, {}, MultiplierVariant::SmoothF};
  for (int k = -N; k <= N; ++k) {
    Point c = axis_b;
    for (auto& v : c) v *= k;
    s.centers.push_back(std::move(c));
    s.weights.push_back(1.0);
  }
  return s;
}

MultiplierSpec build_sym_morawetz(const Point& x_prime, const RadialProfile& profile) {
  const int n = static_cast<int>(x_prime.size());
  if (n != profile.dim()) throw std::invalid_argument("sym_morawetz: dimension mismatch");
  std::set<Point> seen;
  MultiplierSpec s{profile, {}, {}, MultiplierVariant::Morawetz};
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Point c = x_prime;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) c[j] = -c[j];
      if (c[j] == 0.0) c[j] = 0.0;  // fold −0 into +0
    }
    if (seen.insert(c).second) {
      s.centers.push_back(c);
      s.weights.push_back(1.0);
    }
  }
  return s;
}

MultiplierSpec build_weighted(const RadialProfile& profile, std::vector<Point> centers, std::vector<double> weights) {
  MultiplierSpec s{profile, std::move(centers), std::move(weights), MultiplierVariant::SmoothF};
  s.validate();
  return s;
}

GammaOperator::GammaOperator(GridSpec grid, std::vector<double> phi) : DiscreteOperator(std::move(grid)), phi_(std::move(phi)) {
  if (phi_.size() != size() * static_cast<std::size_t>(this->grid().dim)) {
    throw std::invalid_argument("gamma: coefficient table size mismatch");
  }
}

void GammaOperator::apply_antisymmetric(std::span<const double> x, std::span<double> y) const {
  const GridSpec& g = grid();
  const int n = g.dim;
  const std::size_t N = size();
  if (x.size() != N || y.size() != N) throw std::invalid_argument("gamma: vector size mismatch");
  const bool periodic = g.boundary == Boundary::Periodic;
  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    std::vector<int> idx(n);
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t rem = i;
      for (int a = n - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % g.nodes(a));
        rem /= g.nodes(a);
      }
      double acc = 0.0;
      for (int a = 0; a < n; ++a) {
        const int m = g.nodes(a);
        const std::size_t st = g.stride(a);
        const double inv = 1.0 / (2.0 * g.spacing(a));
        const double pi = phi_[i * n + a];
        // (D(Φx))_i + Φ_i (Dx)_i with zero (Dirichlet) or wrapped (periodic) neighbours.
        double up = 0.0, dn = 0.0, pup = 0.0, pdn = 0.0;
        if (idx[a] + 1 < m) {
          up = x[i + st];
          pup = phi_[(i + st) * n + a];
        } else if (periodic) {
          const std::size_t j = i - static_cast<std::size_t>(m - 1) * st;
          up = x[j];
          pup = phi_[j * n + a];
        }
        if (idx[a] > 0) {
          dn = x[i - st];
          pdn = phi_[(i - st) * n + a];
        } else if (periodic) {
          const std::size_t j = i + static_cast<std::size_t>(m - 1) * st;
          dn = x[j];
          pdn = phi_[j * n + a];
        }
        acc += inv * ((pup * up - pdn * dn) + pi * (up - dn));
      }
      y[i] = acc;
    }
  });
}

void GammaOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t N = size();
  if (x.size() != N || y.size() != N) throw std::invalid_argument("gamma: vector size mismatch");
  std::vector<double> re(N), im(N), ar(N), ai(N);
  for (std::size_t i = 0; i < N; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  apply_antisymmetric(re, ar);
  apply_antisymmetric(im, ai);
  // −i (ar + i ai) = ai − i ar
  for (std::size_t i = 0; i < N; ++i) y[i] = {ai[i], -ar[i]};
}

std::shared_ptr<GammaOperator> assemble_gamma(const MultiplierSpec& spec, const GridSpec& grid) {
  spec.validate();
  if (grid.dim != spec.dim()) throw std::invalid_argument("gamma: grid and profile dimensions differ");
  const int n = grid.dim;
  std::vector<double> phi(grid.size() * n);
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> x(n);
    for (std::size_t i = b; i < e; ++i) {
      grid.coordinates(i, x);
      spec.gradient_F(x, std::span<double>(phi.data() + i * n, n));
    }
  });
  return std::make_shared<GammaOperator>(grid, std::move(phi));
}

Field apply_gamma(const MultiplierSpec& spec, const Field& psi) {
  const auto gamma = assemble_gamma(spec, psi.grid());
  return (*gamma)(psi);
}

CompositionCommutator::CompositionCommutator(OperatorPtr H, std::shared_ptr<const GammaOperator> gamma)
    : RealOperator(H->grid()), H_(std::move(H)), gamma_(std::move(gamma)) {
  require_same_grid(H_->grid(), gamma_->grid());
}

void CompositionCommutator::apply_real(std::span<const double> x, std::span<double> y) const {
  const std::size_t N = size();
  std::vector<double> t(N), u(N);
  gamma_->apply_antisymmetric(x, t);
  H_->apply_real(t, y);
  H_->apply_real(x, t);
  gamma_->apply_antisymmetric(t, u);
  for (std::size_t i = 0; i < N; ++i) y[i] -= u[i];
}

FCommutator::FCommutator(OperatorPtr laplacian, std::vector<double> F)
    : DiscreteOperator(laplacian->grid()), lap_(std::move(laplacian)), F_(std::move(F)) {
  if (F_.size() != size()) throw std::invalid_argument("F commutator: size mismatch");
}

void FCommutator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t N = size();
  std::vector<cplx> fx(N), lfx(N), lx(N);
  for (std::size_t i = 0; i < N; ++i) fx[i] = F_[i] * x[i];
  lap_->apply(fx, lfx);
  lap_->apply(x, lx);
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < N; ++i) y[i] = I * (lfx[i] - F_[i] * lx[i]);
}

double operator_norm_estimate(const DiscreteOperator& op, int iterations, unsigned seed) {
  const std::size_t N = op.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> x(N), y(N);
  for (auto& v : x) v = {nd(rng), nd(rng)};
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double nx = 0.0;
    for (const auto& v : x) nx += std::norm(v);
    nx = std::sqrt(nx);
    for (auto& v : x) v /= nx;
    op.apply(x, y);
    double ny = 0.0;
    for (const auto& v : y) ny += std::norm(v);
    est = std::sqrt(ny);
    std::swap(x, y);
  }
  return est;
}

}  // namespace mvf
