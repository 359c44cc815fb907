#include <doctest.h>

#include <cmath>
#include <random>

#include "mvf/commutator.hpp"
#include "mvf/frequency.hpp"

using namespace mvf;

namespace {

double psi(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

TEST_CASE("cutoffs against the defining formula") {
  for (double t : {-2.0, -0.5, 0.0, 0.5, 1.0, 1.7, 2.0, 2.9, 3.0, 5.0}) {
    const double P = psi(t - 1) / (psi(t - 1) + psi(3 - t));
    CHECK(cutoff_P(t) == doctest::Approx(P).epsilon(1e-14));
    CHECK(cutoff_P(t) + cutoff_Q(t) == doctest::Approx(cutoff_I(t)).epsilon(1e-15));
  }
  CHECK(cutoff_P(1.0) == 0.0);
  CHECK(cutoff_P(3.0) == 1.0);
  CHECK(cutoff_P(2.0) == doctest::Approx(0.5));
  CHECK(cutoff_I(0.0) == 1.0);
  CHECK(cutoff_I(-1.0) == 0.0);
  CHECK(smooth_transition(0.5) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double t = 0.0; t <= 4.0; t += 0.01) {
    CHECK(cutoff_P(t) >= prev);
    prev = cutoff_P(t);
  }
  const CutoffSpec s{2.0, CutoffPart::P};
  CHECK(s(4.0) == doctest::Approx(0.5));
  CHECK(s.complement()(4.0) == doctest::Approx(0.5));
}

TEST_CASE("Chebyshev fit of a smooth function") {
  const auto s = chebyshev_fit([](double x) { return std::exp(-x) * std::cos(3 * x); }, 0.0, 4.0, 1e-12);
  for (double x = 0.0; x <= 4.0; x += 0.013) CHECK(s(x) == doctest::Approx(std::exp(-x) * std::cos(3 * x)).epsilon(1e-10));
  CHECK(s.coeffs.size() < 80);
}

TEST_CASE("spectral calculi agree on a small grid") {
  const auto g = GridSpec::cube(3, 3.0, 8);
  const auto L = build_laplacian(g);
  const LaplacianCalculus lap(g);
  const DenseCalculus dense(*L);
  const ChebyshevCalculus cheb(L, 0.0, L->spectral_upper_bound(), 1e-10);
  const CutoffSpec P{4.0, CutoffPart::P};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<double> x(g.size()), a(g.size()), b(g.size()), c(g.size());
  for (auto& v : x) v = nd(rng);
  lap.apply(P, x, a);
  dense.apply(P, x, b);
  cheb.apply(P, x, c);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
    CHECK(c[i] == doctest::Approx(b[i]).epsilon(1e-6));
  }
  auto ev = lap.eigenvalues();
  std::sort(ev.begin(), ev.end());
  const auto dv = dense.eigenvalues();
  for (std::size_t i = 0; i < ev.size(); ++i) CHECK(ev[i] == doctest::Approx(dv[i]).epsilon(1e-10));
}

TEST_CASE("P and Q partition unity on the nonnegative spectrum") {
  const auto g = GridSpec::cube(3, 4.0, 12);
  const LaplacianCalculus lap(g);
  Field psi = Field::from_function(g, [](auto x) { return cplx(std::exp(-x[0] * x[0]), x[1]); });
  for (double K : {0.3, 2.0}) {
    const Field s = apply_cutoff(lap, {K, CutoffPart::P}, psi) + apply_cutoff(lap, {K, CutoffPart::Q}, psi);
    CHECK(norm(s - psi) < 1e-12 * norm(psi));
  }
}

TEST_CASE("area-matched radius tracks delta on fine grids") {
  const auto g = GridSpec::cube(3, 6.0, 96);
  CHECK(area_matched_radius(g, 1.0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(area_matched_radius(g, 2.0) > area_matched_radius(g, 1.0));
}

TEST_CASE("high-frequency norm grows with the tube radius") {
  const auto g = GridSpec::cube(3, 6.0, 24);
  const CutoffSpec Q{0.2, CutoffPart::Q};
  const auto a = norm_chi_Q_x(0.5, Q, g, 2.0), b = norm_chi_Q_x(1.5, Q, g, 2.0);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(b.value > a.value);
}

TEST_CASE("high-energy sandwich is trivial above the spectrum") {
  const auto g = GridSpec::cube(3, 3.0, 8);
  const auto V = Potential::radial_bump({1.0, 0, 0}, BumpShape{2.0, 3.2});
  const auto spec = build_weighted(RadialProfile(), {{0, 0, 0}}, {1.0});
  const HighEnergyProblem prob(g, V, spec, 1.0);
  const auto top = prob.certify_at(prob.spectral_upper() * 1.01);
  CHECK(top.verdict == Verdict::Pass);
  CHECK(std::abs(top.estimate) < 1e-12);
  CHECK(prob.weight_norm() > 0.0);
  CHECK_THROWS(HighEnergyProblem(g, V, build_gamma_N(RadialProfile(), 1, {1, 0, 0}), 1.0));
}
