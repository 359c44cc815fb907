#include <doctest.h>

#include <cmath>

#include "mvf/commutator.hpp"
#include "mvf/evolution.hpp"

using namespace mvf;

TEST_CASE("potential symbol against the direct formula") {
  const RadialProfile p(1.0, 1.0, 3);
  const auto V = Potential::two_bump({1.0, 0, 0}, BumpShape{2.0, 1.5});
  const auto spec = build_gamma_N(p, 2, {1.0, 0, 0});
  const std::vector<double> x{0.4, 0.3, -0.2};
  const auto gV = V.gradient(x);
  double want = 0.0;
  for (const auto& c : spec.centers) {
    double rho2 = 0, dot = 0;
    for (int j = 0; j < 3; ++j) rho2 += (x[j] - c[j]) * (x[j] - c[j]);
    const double rho = std::sqrt(rho2);
    for (int j = 0; j < 3; ++j) dot += std::atan(rho) / rho * (x[j] - c[j]) * gV[j];
    want += -2.0 * dot;
  }
  CHECK(potential_symbol(V, spec, x) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("a single centered bump gives a nonnegative potential part") {
  const auto g = GridSpec::cube(3, 4.0, 16);
  const auto V = Potential::radial_bump({0, 0, 0}, BumpShape{1.0, 2.0});
  const auto spec = build_gamma_N(RadialProfile(), 0, {1.0, 0, 0});
  const auto part = assemble_potential_part(g, V, spec);
  for (double v : part->values()) CHECK(v >= -1e-14);
  for (double v : assemble_potential_part(g, Potential::zero(3), spec)->values()) CHECK(v == 0.0);
}

TEST_CASE("assembled kinetic part is symmetric and converges to the composition at second order") {
  const auto spec = build_weighted(RadialProfile(), {{0.3, 0.0, 0.0}}, {1.0});
  std::vector<double> defect, hs;
  for (int P : {12, 24}) {
    const auto g = GridSpec::cube(3, 6.0, P);
    const auto kin = assemble_kinetic(g, spec);
    CHECK(kin->symmetry_defect() < 1e-12);
    const auto comp = composition_commutator(g, Potential::zero(3), spec);
    const auto psi = gaussian_packet(g, {1.0, 0.5, -0.4}, 1.5, {0, 0, 0});
    std::vector<double> re(psi.size());
    for (std::size_t i = 0; i < re.size(); ++i) re[i] = psi[i].real();
    const double a = rayleigh_quotient(*kin, re), b = rayleigh_quotient(*comp, re);
    defect.push_back(std::abs(a - b) / std::abs(a));
    hs.push_back(g.spacing(0));
  }
  CHECK(fitted_order(hs, defect) == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("commutator assembly guards") {
  const auto V = Potential::radial_bump({0, 0, 0}, BumpShape{1.0, 0.5});
  CHECK_THROWS_AS(assemble_commutator(GridSpec::cube(3, 4.0, 8), V, build_gamma_N(RadialProfile(), 0, {1, 0, 0})),
                  GridTooCoarse);
  CHECK_THROWS(assemble_commutator(GridSpec::cube(3, 4.0, 64), V, build_sym_morawetz({1.0, 0.0, 0.0})));
}

TEST_CASE("residual forms subtract their bounds") {
  const auto g = GridSpec::cube(3, 3.0, 12);
  const auto V = Potential::radial_bump({0, 0, 0}, BumpShape{1.0, 2.0});
  const auto spec = build_gamma_N(RadialProfile(), 0, {1, 0, 0});
  const auto c = assemble_commutator(g, V, spec);
  const auto r = residual_against_kinetic(c, 0.25);
  std::vector<double> x(g.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(0.1 * i * i);
  const auto a = (*r)(x), t = (*c.total)(x), k = (*c.kinetic)(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(a[i] == doctest::Approx(t[i] - 0.75 * k[i]).epsilon(1e-12));
}
