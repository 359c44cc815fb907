#include <doctest.h>

#include <cmath>
#include <random>

#include "mvf/cancellation.hpp"

using namespace mvf;

TEST_CASE("pair bound holds at random points") {
  const BumpShape V0{1.0, 1.0};
  const RadialProfile p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uc(0.0, 4.0);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    if (std::hypot(x[0], x[1], x[2]) >= 1.0) continue;
    const std::vector<double> c{uc(rng), 0.0, 0.0};
    const auto r = pair_bound_check(x, c, V0, p);
    CHECK(r.value >= r.bound - 1e-12);
    CHECK(r.bound >= 0.0);
    ++checked;
  }
  CHECK(checked > 500);
  CHECK_THROWS(pair_bound_check(std::vector<double>{0.1, 0.1, 0.1}, std::vector<double>{1.0, 0.5, 0.0}, V0, p));
}

TEST_CASE("claim sign follows the nearer center") {
  const RadialProfile p;
  CHECK(claim_monotone_check(-1.0, 3.0, std::vector<double>{0.0, 0.5, 0.0}, p).expected == -1);
  CHECK(claim_monotone_check(-1.0, 3.0, std::vector<double>{0.0, 0.5, 0.0}, p).holds);
  CHECK(claim_monotone_check(-1.0, 3.0, std::vector<double>{2.5, 0.5, 0.0}, p).expected == 1);
  const auto mid = claim_monotone_check(-1.0, 3.0, std::vector<double>{1.0, 0.5, 0.2}, p);
  CHECK(mid.expected == 0);
  CHECK(std::abs(mid.sum) < 1e-14);
  CHECK_THROWS(claim_monotone_check(0.0, 1.0, std::vector<double>{2.0, 0.0, 0.0}, p));
}

TEST_CASE("a bump centered on the only center has no negative region") {
  const auto g = GridSpec::cube(3, 3.0, 16);
  const auto V = Potential::radial_bump({0, 0, 0}, BumpShape{1.0, 2.0});
  const auto reg = negative_region(V, build_gamma_N(RadialProfile(), 0, {1, 0, 0}), g);
  CHECK(reg.flagged == 0);
  CHECK(reg.support_nodes > 0);
  const auto off = negative_region(V, build_weighted(RadialProfile(), {{1.0, 0, 0}}, {1.0}), g);
  CHECK(off.flagged > 0);
  CHECK_FALSE(off.outside_support);
}

TEST_CASE("fitting thresholds pick the first rung inside the box") {
  TubeLadder lad;
  lad.N = {1, 2, 4};
  lad.tube_radius = {1.0, 0.6, 0.2};
  lad.axial_extent = {2.0, 2.0, 1.0};
  const std::vector<double> deltas{0.5, 0.7, 0.1};
  const auto t = fitting_thresholds(lad, deltas, 1.5);
  CHECK(t[0] == 4);
  CHECK(t[1] == 4);
  CHECK_FALSE(t[2].has_value());
}

TEST_CASE("log fit input validation and exact data") {
  const BumpShape V0{1.0, 2.0};
  const std::vector<Point> probes{{0.0, 0.2, 0.0}};
  CHECK_THROWS(log_accumulation_fit(V0, RadialProfile(), {2, 0, 0}, std::vector<int>{8, 16}, probes));
  const auto fit = log_accumulation_fit(V0, RadialProfile(), {2, 0, 0}, std::vector<int>{8, 16, 32, 64}, probes);
  CHECK(fit.slope > 0.0);
  CHECK(fit.r2 > 0.99);
}

TEST_CASE("symmetrized Morawetz check needs points outside the slab") {
  const auto V = Potential::axial_product(3, AxialFactor{1.0, 1.0, 1.0});
  CHECK_THROWS(sym_morawetz_check(V, std::vector<double>{1, 0.5, 0.5}, std::vector<double>{0.5, 0, 0}, 1.0));
  CHECK(sym_morawetz_check(V, std::vector<double>{1, 0.5, 0.5}, std::vector<double>{4.0, 0.3, 0.1}, 3.0) >= -1e-12);
}
