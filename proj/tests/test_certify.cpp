#include <doctest.h>

#include <cmath>

#include "mvf/certify.hpp"
#include "mvf/commutator.hpp"

using namespace mvf;

TEST_CASE("Lanczos agrees with the dense eigensolver") {
  const auto g = GridSpec::cube(3, 3.0, 10);
  const auto V = Potential::weighted_sum({{-4.0, Potential::radial_bump({0, 0, 0}, BumpShape{1.0, 2.0})}});
  const auto H = build_hamiltonian(g, V);
  const auto dense = min_eig_dense(*H);
  LanczosOptions lo;
  lo.tol = 1e-10;
  const auto it = min_eig(*H, lo);
  CHECK(it.converged);
  CHECK(it.estimate == doctest::Approx(dense.estimate).epsilon(1e-8));
  CHECK(it.residual < 1e-8 * it.scale);
}

TEST_CASE("certificate verdicts") {
  const auto g = GridSpec::cube(2, 1.0, 8);
  auto pos = DiagonalOperator::from_function(g, [](auto x) { return 1.0 + x[0] * x[0]; });
  auto cert = certify(*pos, "diag", {{"k", 1}});
  CHECK(cert.verdict == Verdict::Pass);
  CHECK(cert.estimate == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(to_json(cert)["verdict"] == "pass");

  auto neg = DiagonalOperator::from_function(g, [](auto x) { return x[0] - 0.2; });
  cert = certify(*neg, "diag");
  CHECK(cert.verdict == Verdict::Fail);
  REQUIRE(cert.witness.size() == g.size());
  CHECK(cert.witness_quotient < -cert.floor);
  CHECK(rayleigh_quotient(*neg, cert.witness) == doctest::Approx(cert.witness_quotient));
}

TEST_CASE("scan reports first pass and reversions") {
  auto fake = [](std::vector<double> est) {
    return [est](double k) {
      PositivityCertificate c;
      c.estimate = est[static_cast<std::size_t>(k)];
      c.verdict = c.estimate >= 0 ? Verdict::Pass : Verdict::Fail;
      return c;
    };
  };
  const std::vector<double> ladder{0, 1, 2, 3};
  auto s = scan("N", ladder, fake({-1, -0.5, 0.1, 0.2}));
  REQUIRE(s.first_pass);
  CHECK(*s.first_pass_value() == 2.0);
  CHECK(s.monotone);
  s = scan("N", ladder, fake({-1, 0.5, -0.1, 0.2}));
  CHECK_FALSE(s.monotone);
  CHECK_FALSE(s.anomalies.empty());
  s = scan("N", ladder, fake({-1, -1, -1, -1}));
  CHECK_FALSE(s.first_pass);
}

TEST_CASE("scenario hash depends only on content") {
  const nlohmann::json a = {{"x", 1}, {"y", {1, 2}}};
  const nlohmann::json b = nlohmann::json::parse(R"({"y":[1,2],"x":1})");
  CHECK(scenario_hash(a) == scenario_hash(b));
  CHECK(scenario_hash(a) != scenario_hash({{"x", 2}, {"y", {1, 2}}}));
  CHECK(scenario_hash(a).size() == 16);
}
