#include <doctest.h>

#include <cmath>

#include "mvf/evolution.hpp"

using namespace mvf;

TEST_CASE("fitted order recovers a power law") {
  const std::vector<double> h{0.1, 0.05, 0.025};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  CHECK(fitted_order(h, e) == doctest::Approx(2.0));
  CHECK_THROWS(fitted_order({0.1}, {1.0}));
}

TEST_CASE("scheme names round trip") {
  for (auto s : {Scheme::CrankNicolson, Scheme::StrangSplitStep}) CHECK(scheme_from_string(to_string(s)) == s);
  CHECK(scheme_from_string("cn") == Scheme::CrankNicolson);
  CHECK_THROWS(scheme_from_string("euler"));
}

TEST_CASE("packets are normalized") {
  const auto g = GridSpec::cube(3, 6.0, 24);
  CHECK(norm(gaussian_packet(g, {0.5, 0, -1}, 1.0, {1, 0, 0})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Crank-Nicolson conserves norm and energy for a static potential") {
  const auto g = GridSpec::cube(3, 5.0, 16);
  const auto V = Potential::two_bump({1.5, 0, 0}, BumpShape{2.0, 1.5});
  EvolutionConfig cfg;
  cfg.dt = 0.02;
  cfg.T = 1.0;
  const auto tr = propagate(g, V, gaussian_packet(g, {-2, 0.5, 0}, 1.0, {1, 0, 0}), cfg);
  CHECK(tr.ledger.max_norm_drift() < 1e-10);
  CHECK(tr.ledger.max_energy_drift() < 1e-9);
  CHECK(tr.ledger.steps == 50);
}

TEST_CASE("Crank-Nicolson and split-step agree as dt shrinks") {
  const auto g = GridSpec::cube(2, 6.0, 32, Boundary::Periodic);
  const auto V = Potential::radial_bump({0, 0}, BumpShape{1.0, 2.0});
  const auto psi0 = gaussian_packet(g, {-2, 0}, 1.0, {1, 0});
  std::vector<double> diffs;
  for (double dt : {0.02, 0.01}) {
    EvolutionConfig a;
    a.dt = dt;
    a.T = 0.5;
    EvolutionConfig b = a;
    b.scheme = Scheme::StrangSplitStep;
    diffs.push_back(norm(propagate(g, V, psi0, a).final_state - propagate(g, V, psi0, b).final_state));
  }
  CHECK(diffs[1] < diffs[0] / 3.0);
  CHECK(diffs[1] < 1e-3);
}

TEST_CASE("Ehrenfest and budget on a synthetic ledger") {
  MorawetzLedger led;
  led.dt = 0.1;
  led.norm0 = 1.0;
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.1 * i;
    LedgerRow r;
    r.t = t;
    r.gamma_expect = t * t;
    r.commutator_expect = 2 * t;
    r.norm = 1.0;
    r.gamma_psi_norm = 5.0;
    led.rows.push_back(r);
  }
  const auto e = ehrenfest_check(led);
  CHECK(e.max_deviation < 1e-12);
  CHECK(e.max_dip == 0.0);
  const auto b = morawetz_budget(led);
  CHECK(b.lhs == doctest::Approx(4.0));
  CHECK(b.rhs == doctest::Approx(10.0));
  CHECK(b.holds);
}

TEST_CASE("evolution config validation") {
  EvolutionConfig cfg;
  cfg.dt = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg.dt = 0.1;
  cfg.T = 1.0;
  CHECK(cfg.steps() == 10);
  const auto g = GridSpec::cube(3, 4.0, 8);
  Field twice = cplx(2.0) * gaussian_packet(g, {0, 0, 0}, 1.0, {0, 0, 0});
  CHECK_THROWS(propagate(g, Potential::zero(3), twice, cfg));
}
