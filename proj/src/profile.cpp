#include "mvf/profile.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mvf {

namespace {

constexpr double kSmallRadius = 1e-6;
constexpr double kSeriesRadius = 1e-3;
constexpr double kQuadratureTol = 1e-12;

void require_nonneg(double r, const char* what) {
  if (!(r >= 0.0)) {
    std::ostringstream os;
    os << what << ": radius must be nonnegative, got " << r;
    throw std::domain_error(os.str());
  }
}

}  // namespace

RadialProfile::RadialProfile(double a, double sigma, int dim) : a_(a), sigma_(sigma), dim_(dim) {
  if (!(a > 0.0)) throw std::invalid_argument("profile: a must be positive");
  if (!(sigma > 0.5)) throw std::invalid_argument("profile: sigma must exceed 1/2");
  if (dim < 3) throw std::invalid_argument("profile: dimension must be at least 3");

  // ∫₀^∞ (1+s²)^(−σ) ds with s = tan θ becomes ∫₀^{π/2} cos^{2σ−2} θ dθ.
  if (sigma_ == 1.0) {
    m_sigma_ = std::numbers::pi / 2;
  } else {
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double p = 2.0 * sigma_ - 2.0;
    double err = 0.0;
    m_sigma_ = integrator.integrate(
        [p](double t) { return std::pow(std::cos(t), p); }, 0.0, std::numbers::pi / 2, 1e-15, &err);
    if (err > kQuadratureTol * std::max(1.0, m_sigma_)) {
      throw QuadratureError("profile: M_sigma quadrature did not converge", err);
    }
  }
}

double RadialProfile::g(double r) const {
  require_nonneg(r, "eval_g");
  if (r == 0.0) return 1.0;
  return std::pow(1.0 + a_ * r * r, -0.5 * sigma_);
}

double RadialProfile::g2(double r) const {
  if (r == 0.0) return 1.0;
  return std::pow(1.0 + a_ * r * r, -sigma_);
}

double RadialProfile::f_quadrature(double r) const {
  // f(r) = a^{-1/2} ∫₀^{atan(√a r)} cos^{2σ−2} θ dθ: finite, smooth interval.
  const double upper = std::atan(std::sqrt(a_) * r);
  const double p = 2.0 * sigma_ - 2.0;
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [p](double t) { return std::pow(std::cos(t), p); }, 0.0, upper, 15, 1e-13, &err);
  if (err / std::sqrt(a_) > kQuadratureTol) {
    std::ostringstream os;
    os << "eval_f: quadrature reached only " << err << " at r = " << r;
    throw QuadratureError(os.str(), err);
  }
  return val / std::sqrt(a_);
}

double RadialProfile::f(double r) const {
  require_nonneg(r, "eval_f");
  if (r == 0.0) return 0.0;
  if (std::isinf(r)) return f_inf();
  if (sigma_ == 1.0) return std::atan(std::sqrt(a_) * r) / std::sqrt(a_);
  return f_quadrature(r);
}

double RadialProfile::F(double r) const {
  require_nonneg(r, "eval_F");
  if (r == 0.0) return 0.0;
  // F = r f(r) − ∫₀ʳ s g²(s) ds, the second integral in closed form.
  const double l = std::log1p(a_ * r * r);
  double moment;
  if (sigma_ == 1.0) {
    moment = l / (2.0 * a_);
  } else {
    moment = -std::expm1((1.0 - sigma_) * l) / (2.0 * a_ * (sigma_ - 1.0));
  }
  return r * f(r) - moment;
}

double RadialProfile::f_over_r(double r) const {
  require_nonneg(r, "f_over_r");
  if (r < kSmallRadius) {
    const double ar2 = a_ * r * r;
    return 1.0 - sigma_ * ar2 / 3.0 + sigma_ * (sigma_ + 1.0) * ar2 * ar2 / 10.0;
  }
  return f(r) / r;
}

double RadialProfile::dg(double r) const {
  require_nonneg(r, "dg");
  return -a_ * sigma_ * r * std::pow(1.0 + a_ * r * r, -0.5 * sigma_ - 1.0);
}

double RadialProfile::d2g(double r) const {
  require_nonneg(r, "d2g");
  const double q = 1.0 + a_ * r * r;
  return -a_ * sigma_ * std::pow(q, -0.5 * sigma_ - 1.0) +
         a_ * a_ * sigma_ * (sigma_ + 2.0) * r * r * std::pow(q, -0.5 * sigma_ - 2.0);
}

double RadialProfile::lap_g(double r) const {
  require_nonneg(r, "lap_g");
  const double q = 1.0 + a_ * r * r;
  return -dim_ * a_ * sigma_ * std::pow(q, -0.5 * sigma_ - 1.0) +
         a_ * a_ * sigma_ * (sigma_ + 2.0) * r * r * std::pow(q, -0.5 * sigma_ - 2.0);
}

double RadialProfile::lap_F(double r) const {
  return (dim_ - 1) * f_over_r(r) + g2(r);
}

namespace {

double bilap_terms(const RadialProfile& p, double rho) {
  const double a = p.a();
  const double s = p.sigma();
  const int n = p.dim();
  const double q = 1.0 + a * rho * rho;
  double first = 0.0;
  if (n != 3) {
    const double c = double(n - 1) * double(n - 3);
    if (rho < kSeriesRadius) {
      first = c * (2.0 * s * a / 3.0 - 2.0 * s * (s + 1.0) * a * a * rho * rho / 5.0);
    } else {
      first = c / (rho * rho) * (p.f_over_r(rho) - p.g2(rho));
    }
  }
  return first + a * s * (4.0 * n - 2.0) * std::pow(q, -s - 1.0) -
         4.0 * a * a * s * (s + 1.0) * rho * rho * std::pow(q, -s - 2.0);
}

}  // namespace

double RadialProfile::neg_bilaplacian_F(double rho) const {
  if (!(rho > 0.0)) throw std::domain_error("bilaplacian_F: rho must be positive");
  return bilap_terms(*this, rho);
}

double RadialProfile::neg_bilaplacian_F_continuous(double rho) const {
  require_nonneg(rho, "bilaplacian_F");
  return bilap_terms(*this, rho);
}

Eigen::MatrixXd RadialProfile::hessian_F(const Eigen::VectorXd& x, const Eigen::VectorXd& c) const {
  if (x.size() != dim_ || c.size() != dim_) throw std::invalid_argument("hessian_F: dimension mismatch");
  const Eigen::VectorXd d = x - c;
  const double rho = d.norm();
  if (rho == 0.0) return Eigen::MatrixXd::Identity(dim_, dim_);
  const double q = f_over_r(rho);
  const Eigen::VectorXd u = d / rho;
  return q * Eigen::MatrixXd::Identity(dim_, dim_) + (g2(rho) - q) * u * u.transpose();
}

ProfileStack RadialProfile::derivative_stack(double r) const {
  require_nonneg(r, "derivative_stack");
  ProfileStack s;
  s.g = g(r);
  s.dg = dg(r);
  s.d2g = d2g(r);
  s.lap_g = lap_g(r);
  s.f = f(r);
  s.F = F(r);
  s.f_over_r = f_over_r(r);
  s.lap_F = lap_F(r);
  s.bilap_F = -bilap_terms(*this, r);
  return s;
}

double RadialProfile::hardy_weight() const {
  const double m = dim_ - 2.0;
  return 4.0 - sigma_ / (m * m);
}

}  // namespace mvf
