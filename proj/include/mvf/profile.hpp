#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace mvf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// Values of the radial seed functions and their derivatives at one radius.
struct ProfileStack {
  double g = 0;
  double dg = 0;
  double d2g = 0;
  double lap_g = 0;
  double f = 0;
  double F = 0;
  double f_over_r = 0;
  double lap_F = 0;
  double bilap_F = 0;  // Δ²F (not negated)
};

// g(r) = (1 + a r²)^(−σ/2), f = ∫₀ʳ g², F = ∫₀ʳ f, in dimension n.
class RadialProfile {
 public:
  RadialProfile(double a = 1.0, double sigma = 1.0, int dim = 3);

  double a() const { return a_; }
  double sigma() const { return sigma_; }
  int dim() const { return dim_; }

  double g(double r) const;
  double g2(double r) const;
  double f(double r) const;  // accepts kInf
  double F(double r) const;
  double f_over_r(double r) const;
  double f_inf() const { return m_sigma_ / std::sqrt(a_); }
  double m_sigma() const { return m_sigma_; }

  double dg(double r) const;
  double d2g(double r) const;
  double lap_g(double r) const;
  double lap_F(double r) const;

  // −Δ²F as the sum of the three closed-form terms; finite as rho → 0.
  double neg_bilaplacian_F(double rho) const;
  // Same, extended to rho = 0 by its limit.
  double neg_bilaplacian_F_continuous(double rho) const;

  // Hessian of F(|x − c|); equals g²(0)·I at x = c.
  Eigen::MatrixXd hessian_F(const Eigen::VectorXd& x, const Eigen::VectorXd& c) const;

  ProfileStack derivative_stack(double r) const;

  // Lower-bound weight 4 − σ/(n−2)².
  double hardy_weight() const;

 private:
  double f_quadrature(double r) const;

  double a_;
  double sigma_;
  int dim_;
  double m_sigma_;
};

}  // namespace mvf
