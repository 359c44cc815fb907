#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "mvf/profile.hpp"

using namespace mvf;

namespace {

// a = σ = 1: f = arctan r, F = r arctan r − log(1 + r²)/2, ΔF = 1/(1+r²) + 2 arctan(r)/r in n = 3.
double f_closed(double r) { return std::atan(r); }
double F_closed(double r) { return r * std::atan(r) - 0.5 * std::log1p(r * r); }
double lapF_closed(double r) { return 1.0 / (1.0 + r * r) + 2.0 * std::atan(r) / r; }

}  // namespace

TEST_CASE("seed functions match closed forms for a = sigma = 1") {
  const RadialProfile p(1.0, 1.0, 3);
  for (double r : {0.0, 0.1, 0.7, 1.0, 3.0, 25.0}) {
    CHECK(p.g(r) == doctest::Approx(1.0 / std::sqrt(1.0 + r * r)).epsilon(1e-14));
    CHECK(p.f(r) == doctest::Approx(f_closed(r)).epsilon(1e-12));
    CHECK(p.F(r) == doctest::Approx(F_closed(r)).epsilon(1e-12));
  }
  CHECK(p.f_inf() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(p.f(kInf) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(p.hardy_weight() == doctest::Approx(3.0));
}

TEST_CASE("f for sigma = 2 matches its antiderivative") {
  const double a = 2.5;
  const RadialProfile p(a, 2.0, 3);
  for (double r : {0.2, 1.0, 4.0}) {
    const double want = r / (2.0 * (1.0 + a * r * r)) + std::atan(std::sqrt(a) * r) / (2.0 * std::sqrt(a));
    CHECK(p.f(r) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("Hessian eigenvalues are g^2 once and f/rho n-1 times") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int n : {3, 4}) {
    const RadialProfile p(0.7, 1.3, n);
    for (int s = 0; s < 50; ++s) {
      Eigen::VectorXd x(n), c(n);
      for (int j = 0; j < n; ++j) {
        x(j) = u(rng);
        c(j) = u(rng);
      }
      const double rho = (x - c).norm();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.hessian_F(x, c));
      std::vector<double> want(n, p.f(rho) / rho);
      want[0] = std::pow(1.0 + 0.7 * rho * rho, -1.3);
      std::sort(want.begin(), want.end());
      for (int j = 0; j < n; ++j) CHECK(es.eigenvalues()(j) == doctest::Approx(want[j]).epsilon(1e-10));
    }
  }
  const RadialProfile p(1.0, 1.0, 3);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 0.5);
  CHECK((p.hessian_F(c, c) - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("bilaplacian matches differences of the closed-form Laplacian") {
  const RadialProfile p(1.0, 1.0, 3);
  const double h = 1e-3;
  for (double r : {0.3, 1.0, 2.5, 8.0}) {
    CHECK(p.lap_F(r) == doctest::Approx(lapF_closed(r)).epsilon(1e-12));
    const double d1 = (-lapF_closed(r + 2 * h) + 8 * lapF_closed(r + h) - 8 * lapF_closed(r - h) + lapF_closed(r - 2 * h)) / (12 * h);
    const double d2 = (-lapF_closed(r + 2 * h) + 16 * lapF_closed(r + h) - 30 * lapF_closed(r) + 16 * lapF_closed(r - h) -
                       lapF_closed(r - 2 * h)) / (12 * h * h);
    const double bilap = d2 + 2.0 / r * d1;
    CHECK(-p.neg_bilaplacian_F(r) == doctest::Approx(bilap).epsilon(1e-7));
    CHECK(p.derivative_stack(r).bilap_F == doctest::Approx(bilap).epsilon(1e-7));
  }
}

TEST_CASE("continuous bilaplacian extends to the origin") {
  const RadialProfile p(1.0, 1.0, 3);
  const double at0 = p.neg_bilaplacian_F_continuous(0.0);
  CHECK(std::isfinite(at0));
  CHECK(at0 == doctest::Approx(p.neg_bilaplacian_F_continuous(1e-4)).epsilon(1e-6));
}

TEST_CASE("profile rejects invalid parameters") {
  CHECK_THROWS(RadialProfile(-1.0, 1.0, 3));
  CHECK_THROWS(RadialProfile(1.0, 0.0, 3));
}
