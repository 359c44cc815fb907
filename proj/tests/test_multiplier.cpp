#include <doctest.h>

#include <cmath>

#include "mvf/multiplier.hpp"

using namespace mvf;

TEST_CASE("gamma_N places 2N+1 unit-weight centers") {
  const auto s = build_gamma_N(RadialProfile(), 3, {2.0, 0.0, 0.0});
  REQUIRE(s.centers.size() == 7);
  CHECK(s.centers.front()[0] == doctest::Approx(-6.0));
  CHECK(s.weight_sum() == doctest::Approx(7.0));
  CHECK_THROWS(build_gamma_N(RadialProfile(), -1, {1.0, 0.0, 0.0}));
}

TEST_CASE("symmetrized Morawetz centers are deduplicated") {
  CHECK(build_sym_morawetz({1.0, 0.5, 0.0}).centers.size() == 4);
  CHECK(build_sym_morawetz({1.0, 0.5, 0.2}).centers.size() == 8);
  CHECK(build_sym_morawetz({0.0, 0.0, 0.0}).centers.size() == 1);
  CHECK(build_sym_morawetz({1.0, 0.5, 0.2}).variant == MultiplierVariant::Morawetz);
}

TEST_CASE("gradient of the weight matches differences") {
  const auto s = build_weighted(RadialProfile(0.5, 1.5, 3), {{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}, {1.0, 0.5});
  const std::vector<double> x{0.3, -0.7, 1.1};
  std::vector<double> g(3);
  s.gradient_F(x, g);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    auto up = x, dn = x;
    up[j] += h;
    dn[j] -= h;
    CHECK(g[j] == doctest::Approx((s.value_F(up) - s.value_F(dn)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("gamma is Hermitian and its real part antisymmetric") {
  const auto g = GridSpec::cube(3, 3.0, 10);
  const auto spec = build_gamma_N(RadialProfile(), 1, {1.0, 0.0, 0.0});
  const auto gamma = assemble_gamma(spec, g);
  CHECK(self_adjointness_defect(*gamma, 4, 9) < 1e-12);
  std::vector<double> u(g.size()), v(g.size()), Au(g.size()), Av(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = std::sin(0.3 * i);
    v[i] = std::cos(0.7 * i);
  }
  gamma->apply_antisymmetric(u, Au);
  gamma->apply_antisymmetric(v, Av);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    a += v[i] * Au[i];
    b += Av[i] * u[i];
  }
  CHECK(a == doctest::Approx(-b).epsilon(1e-12));
}

TEST_CASE("operator norm estimate of a diagonal") {
  const auto g = GridSpec::cube(2, 1.0, 6);
  auto D = DiagonalOperator::from_function(g, [](auto x) { return 1.0 + x[0]; });
  double mx = 0;
  for (double d : D->diagonal()) mx = std::max(mx, std::abs(d));
  CHECK(operator_norm_estimate(*D) == doctest::Approx(mx).epsilon(1e-6));
}
