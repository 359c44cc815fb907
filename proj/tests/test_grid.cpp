#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mvf/grid.hpp"

using namespace mvf;

TEST_CASE("Dirichlet grids keep interior nodes") {
  const auto g = GridSpec::cube(3, 2.0, 4);
  CHECK(g.spacing(0) == doctest::Approx(1.0));
  CHECK(g.nodes(0) == 3);
  CHECK(g.size() == 27);
  std::vector<double> x(3);
  g.coordinates(0, x);
  CHECK(x == std::vector<double>{-1.0, -1.0, -1.0});
  g.coordinates(26, x);
  CHECK(x == std::vector<double>{1.0, 1.0, 1.0});
  g.coordinates(1, x);
  CHECK(x[2] == doctest::Approx(0.0));  // last axis fastest
  CHECK(g.cell_volume() == doctest::Approx(1.0));
}

TEST_CASE("periodic grids keep every node") {
  const auto g = GridSpec::cube(2, 1.0, 8, Boundary::Periodic);
  CHECK(g.size() == 64);
  CHECK(g.coordinate(0, 0) == doctest::Approx(-1.0));
  const auto r = g.refined();
  CHECK(r.points[0] == 16);
  CHECK(r.spacing(0) == doctest::Approx(g.spacing(0) / 2));
}

TEST_CASE("grid validation") {
  CHECK_THROWS(GridSpec::cube(3, -1.0, 8).validate());
  CHECK_THROWS(GridSpec::cube(3, 1.0, 1).validate());
  CHECK_THROWS(GridSpec::cube(3, 1.0, 1024).validate(1000));
  CHECK(boundary_from_string(to_string(Boundary::Periodic)) == Boundary::Periodic);
}

TEST_CASE("inner product carries the cell volume") {
  const auto g = GridSpec::cube(3, 3.0, 6);
  Field one = Field::from_function(g, [](auto) { return cplx(1.0); });
  CHECK(norm_squared(one) == doctest::Approx(g.size() * g.cell_volume()));
  Field i1 = cplx(0.0, 1.0) * one;
  CHECK(inner(one, i1).imag() == doctest::Approx(norm_squared(one)));
  CHECK(norm(one - one) == 0.0);
}

TEST_CASE("field dump round trip") {
  const auto g = GridSpec::cube(2, 1.5, 6);
  const Field f = Field::from_function(g, [](auto x) { return cplx(x[0], -x[1] * x[1]); });
  std::stringstream ss;
  write_field_dump(ss, f);
  const Field back = read_field_dump(ss);
  CHECK(back.grid() == g);
  CHECK(norm(back - f) == 0.0);
}

TEST_CASE("discrete Hardy inequality holds away from the origin") {
  const auto g = GridSpec::cube(3, 6.0, 24);
  const Field psi = Field::from_function(g, [](auto x) {
    const double r2 = (x[0] - 2.5) * (x[0] - 2.5) + x[1] * x[1] + x[2] * x[2];
    return r2 < 1.5 ? cplx(std::exp(-r2)) : cplx(0.0);
  });
  const auto t = hardy_check(g, psi);
  CHECK(t.lhs >= t.rhs);
  const Field at0 = Field::from_function(g, [](auto) { return cplx(1.0); });
  CHECK_THROWS(hardy_check(g, at0));
}
