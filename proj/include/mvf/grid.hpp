#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mvf {

using cplx = std::complex<double>;

enum class Boundary { Dirichlet, Periodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// Box [−E, E]ⁿ with spacing h = 2E/points per axis. Dirichlet grids keep only
// interior nodes x = −E + i·h, i = 1..points−1; periodic grids keep i = 0..points−1.
struct GridSpec {
  static constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 25;

  int dim = 3;
  std::vector<double> extent;
  std::vector<int> points;
  Boundary boundary = Boundary::Dirichlet;

  static GridSpec cube(int dim, double extent, int points, Boundary boundary = Boundary::Dirichlet);

  void validate(std::size_t node_budget = kDefaultNodeBudget) const;

  double spacing(int axis) const { return 2.0 * extent[axis] / points[axis]; }
  int nodes(int axis) const { return boundary == Boundary::Dirichlet ? points[axis] - 1 : points[axis]; }
  std::size_t size() const;
  std::size_t stride(int axis) const;
  double coordinate(int axis, int i) const;
  void coordinates(std::size_t index, std::span<double> out) const;
  // size()·dim coordinates, node-major.
  std::vector<double> coordinate_table() const;
  double cell_volume() const;
  double min_spacing() const;
  // Same box, spacing halved.
  GridSpec refined() const;

  bool operator==(const GridSpec&) const = default;
};

void require_same_grid(const GridSpec& a, const GridSpec& b);

// Complex samples on the nodes of a grid, row-major with the last axis fastest.
class Field {
 public:
  Field() = default;
  explicit Field(GridSpec grid);
  Field(GridSpec grid, std::vector<cplx> values);

  static Field from_function(const GridSpec& grid, const std::function<cplx(std::span<const double>)>& fn);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  std::vector<cplx>& data() { return values_; }
  const std::vector<cplx>& data() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx s);

 private:
  GridSpec grid_;
  std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

// ⟨a, b⟩ = Σ conj(a) b hⁿ.
cplx inner(const Field& a, const Field& b);
double norm(const Field& a);
double norm_squared(const Field& a);

struct HardyTerms {
  double lhs = 0;  // ⟨ψ, −Δ_h ψ⟩
  double rhs = 0;  // ((n−2)²/4)⟨ψ, |x|⁻² ψ⟩
};

// Discrete Hardy inequality terms on a Dirichlet grid; rejects fields within 2h of the origin.
HardyTerms hardy_check(const GridSpec& grid, const Field& psi);

// One-line JSON header (dim, points, extent, boundary) then little-endian (re, im) doubles.
void write_field_dump(std::ostream& os, const Field& f);
Field read_field_dump(std::istream& is);
void write_real_dump(std::ostream& os, const GridSpec& grid, std::span<const double> values);

}  // namespace mvf
