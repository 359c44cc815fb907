#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mvf/potentials.hpp"

using namespace mvf;

TEST_CASE("bump shape values and slopes") {
  const BumpShape b{3.0, 2.0};
  CHECK(b.value(0.0) == doctest::Approx(3.0));
  CHECK(b.value(2.0) == 0.0);
  CHECK(b.value(5.0) == 0.0);
  CHECK(b.value(1.0) == doctest::Approx(3.0 * std::pow(0.75, 3)));
  const double h = 1e-6;
  for (double r : {0.3, 1.1, 1.9}) {
    CHECK(b.slope(r) == doctest::Approx((b.value(r + h) - b.value(r - h)) / (2 * h)).epsilon(1e-7));
    CHECK(b.slope_over_r(r) == doctest::Approx(b.slope(r) / r));
  }
  CHECK(std::isfinite(b.slope_over_r(0.0)));
}

TEST_CASE("families evaluate and differentiate consistently") {
  const BumpShape s{2.0, 1.0};
  std::vector<Potential> fam = {Potential::radial_bump({0.5, 0, 0}, s),
                                Potential::two_bump({1.5, 0, 0}, s),
                                Potential::lattice({1.0, 0, 0}, 2, s),
                                Potential::axial_product(3, AxialFactor{2.0, 1.0, 0.8}),
                                Potential::nondefinite_radial(3, 2.0, 3.0, 1.0)};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(u(rng));
  for (const auto& V : fam) CHECK(gradient_fd_defect(V, pts) < 1e-6);

  const auto two = Potential::two_bump({1.5, 0, 0}, s);
  CHECK(two.bump_count() == 2);
  CHECK(two.value(std::vector<double>{1.5, 0, 0}) == doctest::Approx(2.0));
  CHECK(Potential::lattice({1.0, 0, 0}, 2, s).bump_count() == 5);
  const auto nd = Potential::nondefinite_radial(3, 2.0, 3.0, 1.0);
  CHECK(nd.value(std::vector<double>{0, 0, 0}) == doctest::Approx(-0.5));
}

TEST_CASE("moving potentials need a time") {
  const auto base = Potential::two_bump({2.0, 0, 0}, BumpShape{1.0, 1.0});
  const MotionLaw beta{MotionLaw::Kind::Sinusoid, 0.0, 0.5, 2.0};
  const auto V = Potential::time_dependent(base, beta, MotionLaw{MotionLaw::Kind::Constant, 1.0, 0.0, 1.0});
  const std::vector<double> x{2.0, 0.0, 0.0};
  CHECK_THROWS(V.value(x));
  CHECK_THROWS(base.value(x, 1.0));
  CHECK(V.value(x, 0.0) == doctest::Approx(1.0));
  const std::vector<double> shifted{2.5, 0.0, 0.0};
  CHECK(V.value(shifted, 0.5) == doctest::Approx(1.0));  // β(1/2) = 1/2
  CHECK(V.at_time(0.5).value(shifted) == doctest::Approx(1.0));
  CHECK(beta.deviation_bound() == doctest::Approx(0.5));
  CHECK(MotionLaw::kind_from_string(to_string(MotionLaw::Kind::Triangle)) == MotionLaw::Kind::Triangle);
}

TEST_CASE("lattice axial half-length sits inside the outermost bump") {
  const int M = 2;
  const double R = 0.45;
  const auto V = Potential::lattice({1.0, 0, 0}, M, BumpShape{1.0, R});
  const auto sample = GridSpec::cube(3, 4.0, 64);
  const std::vector<double> deltas{0.25, 0.5, 1.0};
  const auto rep = check_axial_conditions(V, sample, deltas);
  CHECK(rep.all_pass());
  CHECK(rep.L <= M);
  CHECK(rep.L >= M - R);
  CHECK(rep.lambda_monotone);
}

TEST_CASE("an attractive well violates nonnegativity") {
  const auto V = Potential::weighted_sum({{-1.0, Potential::radial_bump({0, 0, 0}, BumpShape{1.0, 1.0})}});
  const std::vector<double> deltas{0.5};
  const auto rep = check_axial_conditions(V, GridSpec::cube(3, 3.0, 24), deltas);
  CHECK_FALSE(rep.nonneg.pass);
  CHECK_FALSE(rep.all_pass());
}

TEST_CASE("equality parameters of the nondefinite family") {
  const auto p = nondefinite_equality_parameters();
  CHECK(p.lambda == 0.5);
  CHECK(p.b == doctest::Approx(12 * std::numbers::pi));
  CHECK(p.c == doctest::Approx(48 * std::numbers::pi));
  const auto V = Potential::nondefinite_radial(3, p.b, p.c, p.eps);
  const auto pts = GridSpec::cube(3, 10.0, 21).coordinate_table();
  const auto rep = check_nondefinite_condition(V, RadialProfile(1.0, 1.0, 3), p.lambda, pts);
  CHECK(rep.pass);
  CHECK(rep.min_margin >= 0.0);
  // A deeper well breaks the condition.
  const auto deep = Potential::nondefinite_radial(3, p.b / 100, p.c / 100, p.eps);
  CHECK_FALSE(check_nondefinite_condition(deep, RadialProfile(1.0, 1.0, 3), p.lambda, pts).pass);
}
