#include "mvf/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mvf/operators.hpp"

namespace mvf {

std::string to_string(Boundary b) { return b == Boundary::Dirichlet ? "dirichlet" : "periodic"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return Boundary::Dirichlet;
  if (s == "periodic") return Boundary::Periodic;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

GridSpec GridSpec::cube(int dim, double extent, int points, Boundary boundary) {
  GridSpec g;
  g.dim = dim;
  g.extent.assign(dim, extent);
  g.points.assign(dim, points);
  g.boundary = boundary;
  g.validate();
  return g;
}

void GridSpec::validate(std::size_t node_budget) const {
  if (dim < 1) throw std::invalid_argument("grid: dimension must be positive");
  if (static_cast<int>(extent.size()) != dim || static_cast<int>(points.size()) != dim) {
    throw std::invalid_argument("grid: extent and points need one entry per axis");
  }
  for (int a = 0; a < dim; ++a) {
    if (!(extent[a] > 0.0)) throw std::invalid_argument("grid: extent must be positive");
    if (points[a] < 2) throw std::invalid_argument("grid: need at least 2 points per axis");
  }
  if (size() > node_budget) {
    std::ostringstream os;
    os << "grid: " << size() << " nodes exceed the budget of " << node_budget;
    throw std::invalid_argument(os.str());
  }
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(nodes(a));
  return n;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = dim - 1; a > axis; --a) s *= static_cast<std::size_t>(nodes(a));
  return s;
}

double GridSpec::coordinate(int axis, int i) const {
  const double h = spacing(axis);
  return boundary == Boundary::Dirichlet ? -extent[axis] + (i + 1) * h : -extent[axis] + i * h;
}

void GridSpec::coordinates(std::size_t index, std::span<double> out) const {
  for (int a = dim - 1; a >= 0; --a) {
    const auto m = static_cast<std::size_t>(nodes(a));
    out[a] = coordinate(a, static_cast<int>(index % m));
    index /= m;
  }
}

std::vector<double> GridSpec::coordinate_table() const {
  const std::size_t n = size();
  std::vector<double> table(n * dim);
  for (std::size_t i = 0; i < n; ++i) coordinates(i, std::span<double>(table.data() + i * dim, dim));
  return table;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing(a);
  return v;
}

double GridSpec::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < dim; ++a) h = std::min(h, spacing(a));
  return h;
}

GridSpec GridSpec::refined() const {
  GridSpec g = *this;
  for (auto& p : g.points) p *= 2;
  return g;
}

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

Field::Field(GridSpec grid) : grid_(std::move(grid)), values_(grid_.size()) {}

Field::Field(GridSpec grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

Field Field::from_function(const GridSpec& grid, const std::function<cplx(std::span<const double>)>& fn) {
  Field f(grid);
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    grid.coordinates(i, x);
    f[i] = fn(x);
  }
  return f;
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

cplx inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * a.grid().cell_volume();
}

double norm_squared(const Field& a) {
  double s = 0.0;
  for (const auto& v : a.values()) s += std::norm(v);
  return s * a.grid().cell_volume();
}

double norm(const Field& a) { return std::sqrt(norm_squared(a)); }

HardyTerms hardy_check(const GridSpec& grid, const Field& psi) {
  require_same_grid(grid, psi.grid());
  if (grid.boundary != Boundary::Dirichlet) throw std::invalid_argument("hardy_check: needs a Dirichlet grid");
  const double guard = 2.0 * grid.min_spacing();
  std::vector<double> x(grid.dim);
  double weighted = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (psi[i] == cplx(0.0)) continue;
    grid.coordinates(i, x);
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    if (std::sqrt(r2) < guard) throw std::invalid_argument("hardy_check: field touches the origin");
    weighted += std::norm(psi[i]) / r2;
  }
  const Laplacian lap(grid);
  const Field lpsi = lap(psi);
  const double m = grid.dim - 2.0;
  return {inner(psi, lpsi).real(), 0.25 * m * m * weighted * grid.cell_volume()};
}

namespace {

nlohmann::json dump_header(const GridSpec& g) {
  return {{"dim", g.dim}, {"points", g.points}, {"extent", g.extent}, {"boundary", to_string(g.boundary)}};
}

void write_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double read_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field_dump(std::ostream& os, const Field& f) {
  os << dump_header(f.grid()).dump() << '\n';
  for (const auto& v : f.values()) {
    write_le(os, v.real());
    write_le(os, v.imag());
  }
}

void write_real_dump(std::ostream& os, const GridSpec& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw std::invalid_argument("dump size does not match grid");
  os << dump_header(grid).dump() << '\n';
  for (double v : values) {
    write_le(os, v);
    write_le(os, 0.0);
  }
}

Field read_field_dump(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field dump: missing header");
  const auto h = nlohmann::json::parse(line);
  GridSpec g;
  g.dim = h.at("dim").get<int>();
  g.points = h.at("points").get<std::vector<int>>();
  g.extent = h.at("extent").get<std::vector<double>>();
  g.boundary = boundary_from_string(h.at("boundary").get<std::string>());
  g.validate();
  Field f(g);
  for (auto& v : f.values()) {
    const double re = read_le(is);
    const double im = read_le(is);
    v = {re, im};
  }
  if (!is) throw std::runtime_error("field dump: truncated payload");
  return f;
}

}  // namespace mvf
