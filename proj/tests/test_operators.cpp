#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mvf/operators.hpp"

using namespace mvf;

TEST_CASE("Dirichlet Laplacian diagonalizes sine modes") {
  const double E = 2.0;
  const int P = 10;
  const auto g = GridSpec::cube(3, E, P);
  const double h = g.spacing(0);
  const int k[3] = {1, 3, 2};
  const Field u = Field::from_function(g, [&](auto x) {
    double v = 1.0;
    for (int j = 0; j < 3; ++j) v *= std::sin(k[j] * std::numbers::pi * (x[j] + E) / (2 * E));
    return cplx(v);
  });
  double lam = 0.0;
  for (int j = 0; j < 3; ++j) lam += (2.0 - 2.0 * std::cos(k[j] * std::numbers::pi * h / (2 * E))) / (h * h);
  const Laplacian L(g);
  CHECK(norm(L(u) - cplx(lam) * u) < 1e-10 * norm(u) * lam);
  CHECK(L.spectral_upper_bound() >= lam);
}

TEST_CASE("periodic Laplacian diagonalizes plane waves") {
  const auto g = GridSpec::cube(2, std::numbers::pi, 16, Boundary::Periodic);
  const double h = g.spacing(0);
  const Field u = Field::from_function(g, [](auto x) { return std::exp(cplx(0.0, 3.0 * x[0] - 2.0 * x[1])); });
  const double lam = (2 - 2 * std::cos(3 * h)) / (h * h) + (2 - 2 * std::cos(2 * h)) / (h * h);
  const Laplacian L(g);
  CHECK(norm(L(u) - cplx(lam) * u) < 1e-9 * norm(u) * lam);
}

TEST_CASE("assembled operators are self-adjoint and consistent") {
  const auto g = GridSpec::cube(2, 1.0, 8);
  const auto L = build_laplacian(g);
  CHECK(self_adjointness_defect(*L, 5, 3) < 1e-12);
  auto V = DiagonalOperator::from_function(g, [](auto x) { return x[0] * x[0] + 1.0; });
  const auto H = operator_sum(1.0, L, 2.0, V);
  const auto dense = DenseOperator::from_operator(*H);
  std::vector<double> x(g.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(1.0 + i);
  const auto a = (*H)(x), b = (*dense)(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  const auto d = H->diagonal();
  const auto dl = L->diagonal();
  const auto dv = V->diagonal();
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(dl[i] + 2 * dv[i]));
  CHECK(rayleigh_quotient(*V, std::vector<double>(g.size(), 1.0)) >= 1.0);
}
