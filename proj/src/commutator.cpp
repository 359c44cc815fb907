#include "mvf/commutator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mvf/parallel.hpp"

namespace mvf {

double potential_symbol(const Potential& V, const MultiplierSpec& spec, std::span<const double> x,
                        std::optional<double> t) {
  const int n = spec.dim();
  Point gF(n), gV(n);
  spec.gradient_F(x, gF);
  V.gradient(x, gV, t);
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += gF[j] * gV[j];
  return -2.0 * s;
}

namespace {

// Σ λ_k Hess F_{c_k}(y), row-major n×n.
void hessian_sum(const MultiplierSpec& spec, std::span<const double> y, std::span<double> A) {
  const int n = spec.dim();
  std::fill(A.begin(), A.end(), 0.0);
  std::vector<double> d(n);
  for (std::size_t k = 0; k < spec.centers.size(); ++k) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) {
      d[j] = y[j] - spec.centers[k][j];
      r2 += d[j] * d[j];
    }
    const double w = spec.weights[k];
    const double rho = std::sqrt(r2);
    if (rho == 0.0) {
      for (int j = 0; j < n; ++j) A[j * n + j] += w;
      continue;
    }
    const double q = spec.profile.f_over_r(rho);
    const double c = (spec.profile.g2(rho) - q) / r2;
    for (int j = 0; j < n; ++j) {
      A[j * n + j] += w * q;
      for (int l = 0; l < n; ++l) A[j * n + l] += w * c * d[j] * d[l];
    }
  }
}

}  // namespace

std::shared_ptr<StencilOperator> assemble_kinetic(const GridSpec& grid, const MultiplierSpec& spec) {
  spec.validate();
  if (spec.variant == MultiplierVariant::Morawetz) {
    throw std::invalid_argument("kinetic form: the Morawetz weight has a singular Hessian at its centers");
  }
  const int n = grid.dim;
  if (n != spec.dim()) throw std::invalid_argument("kinetic form: grid and profile dimensions differ");
  const bool periodic = grid.boundary == Boundary::Periodic;
  for (int a = 0; a < n; ++a) {
    if (periodic && grid.points[a] < 3) throw std::invalid_argument("kinetic form: periodic axes need 3+ points");
  }
  auto K = std::make_shared<StencilOperator>(grid, 1);
  const int corners = 1 << n;

  // B[j][k][p][q] = 4·2⁻ⁿ Σ_κ G_κ[j][p] G_κ[k][q], G_κ[j] the edge difference leaving corner κ along axis j.
  std::vector<double> B(static_cast<std::size_t>(n * n * corners * corners), 0.0);
  auto Bat = [&](int j, int k, int p, int q) -> double& {
    return B[((static_cast<std::size_t>(j) * n + k) * corners + p) * corners + q];
  };
  for (int kap = 0; kap < corners; ++kap) {
    std::vector<std::vector<double>> G(n, std::vector<double>(corners, 0.0));
    for (int j = 0; j < n; ++j) {
      const double sgn = (kap >> j & 1) ? -1.0 : 1.0;
      const double inv_h = 1.0 / grid.spacing(n - 1 - j);
      G[j][kap ^ (1 << j)] += sgn * inv_h;
      G[j][kap] -= sgn * inv_h;
    }
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int p = 0; p < corners; ++p)
          for (int q = 0; q < corners; ++q) Bat(j, k, p, q) += 4.0 / corners * G[j][p] * G[k][q];
  }
  // Bit j of a corner label refers to axis n−1−j (last axis fastest).

  std::vector<int> cells(n);
  std::size_t ncell = 1;
  for (int a = 0; a < n; ++a) {
    cells[a] = grid.points[a];
    ncell *= static_cast<std::size_t>(cells[a]);
  }

  std::vector<int> cidx(n, 0);
  std::vector<double> y(n), A(n * n), M(corners * corners);
  std::vector<long long> node(corners);
  std::vector<std::vector<int>> bits(corners, std::vector<int>(n));
  for (int p = 0; p < corners; ++p)
    for (int a = 0; a < n; ++a) bits[p][a] = p >> (n - 1 - a) & 1;

  std::vector<int> off(n);
  for (std::size_t c = 0; c < ncell; ++c) {
    for (int a = 0; a < n; ++a) y[a] = -grid.extent[a] + (cidx[a] + 0.5) * grid.spacing(a);
    // Corner node indices (−1 when on the Dirichlet boundary).
    bool any = false;
    for (int p = 0; p < corners; ++p) {
      long long lin = 0;
      bool inside = true;
      for (int a = 0; a < n; ++a) {
        int f = cidx[a] + bits[p][a];
        int v;
        if (periodic) {
          v = f % grid.points[a];
        } else {
          v = f - 1;
          if (v < 0 || v >= grid.nodes(a)) inside = false;
        }
        lin = lin * grid.nodes(a) + v;
      }
      node[p] = inside ? lin : -1;
      any = any || inside;
    }
    if (any) {
      hessian_sum(spec, y, A);
      std::fill(M.begin(), M.end(), 0.0);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          // Axis ordering: A is indexed by coordinate axis, B by bit position.
          const double ajk = A[(n - 1 - j) * n + (n - 1 - k)];
          if (ajk == 0.0) continue;
          for (int p = 0; p < corners; ++p)
            for (int q = 0; q < corners; ++q) M[p * corners + q] += ajk * Bat(j, k, p, q);
        }
      for (int p = 0; p < corners; ++p) {
        if (node[p] < 0) continue;
        for (int q = 0; q < corners; ++q) {
          if (node[q] < 0) continue;
          for (int a = 0; a < n; ++a) off[a] = bits[q][a] - bits[p][a];
          K->coefficient(static_cast<std::size_t>(node[p]), K->slot(off)) += M[p * corners + q];
        }
      }
    }
    for (int a = n - 1; a >= 0; --a) {
      if (++cidx[a] < cells[a]) break;
      cidx[a] = 0;
    }
  }

  std::vector<double> diag(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> x(n);
    for (std::size_t i = b; i < e; ++i) {
      grid.coordinates(i, x);
      double s = 0.0;
      for (std::size_t k = 0; k < spec.centers.size(); ++k) {
        double r2 = 0.0;
        for (int j = 0; j < n; ++j) r2 += (x[j] - spec.centers[k][j]) * (x[j] - spec.centers[k][j]);
        s += spec.weights[k] * spec.profile.neg_bilaplacian_F_continuous(std::sqrt(r2));
      }
      diag[i] = s;
    }
  });
  K->add_diagonal(diag);
  return K;
}

std::vector<double> sample_potential(const GridSpec& grid, const Potential& V, std::optional<double> t) {
  if (V.dim() != grid.dim) throw std::invalid_argument("potential and grid dimensions differ");
  std::vector<double> v(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> x(grid.dim);
    for (std::size_t i = b; i < e; ++i) {
      grid.coordinates(i, x);
      v[i] = V.value(x, t);
    }
  });
  return v;
}

std::shared_ptr<DiagonalOperator> assemble_potential_part(const GridSpec& grid, const Potential& V,
                                                          const MultiplierSpec& spec, std::optional<double> t) {
  if (V.dim() != grid.dim || spec.dim() != grid.dim) throw std::invalid_argument("potential part: dimension mismatch");
  const int n = grid.dim;
  const int corners = 1 << n;
  std::vector<double> v(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> x(n), q(n);
    for (std::size_t i = b; i < e; ++i) {
      grid.coordinates(i, x);
      // Two-point Gauss average over the node's cell; node sampling alone over-weights ridges thinner than h.
      double s = 0.0;
      for (int c = 0; c < corners; ++c) {
        for (int a = 0; a < n; ++a) {
          const double off = grid.spacing(a) / (2.0 * std::sqrt(3.0));
          q[a] = x[a] + ((c >> a & 1) ? off : -off);
        }
        s += potential_symbol(V, spec, q, t);
      }
      v[i] = s / corners;
    }
  });
  return std::make_shared<DiagonalOperator>(grid, std::move(v));
}

CommutatorForm assemble_commutator(const GridSpec& grid, const Potential& V, const MultiplierSpec& spec,
                                   std::optional<double> t) {
  grid.validate();
  if (spec.variant == MultiplierVariant::Morawetz) {
    throw std::invalid_argument("commutator: Morawetz multipliers are only evaluated pointwise");
  }
  const double R = V.min_support_radius();
  if (std::isfinite(R) && grid.min_spacing() > R / 4.0) {
    std::ostringstream os;
    os << "grid too coarse: spacing " << grid.min_spacing() << " exceeds a quarter of the bump radius " << R;
    throw GridTooCoarse(os.str());
  }
  CommutatorForm c;
  c.kinetic = assemble_kinetic(grid, spec);
  c.potential = assemble_potential_part(grid, V, spec, t);
  auto sum = std::make_shared<SumOperator>(grid);
  sum->add(1.0, c.kinetic).add(1.0, c.potential);
  c.total = sum;
  return c;
}

OperatorPtr lower_bound_form(const GridSpec& grid, const MultiplierSpec& spec, double scale) {
  spec.validate();
  const auto lap = build_laplacian(grid);
  const double w = spec.profile.hardy_weight();
  auto sum = std::make_shared<SumOperator>(grid);
  for (std::size_t k = 0; k < spec.centers.size(); ++k) {
    std::vector<double> gk(grid.size());
    std::vector<double> x(grid.dim);
    for (std::size_t i = 0; i < gk.size(); ++i) {
      grid.coordinates(i, x);
      double r2 = 0.0;
      for (int j = 0; j < grid.dim; ++j) r2 += (x[j] - spec.centers[k][j]) * (x[j] - spec.centers[k][j]);
      gk[i] = spec.profile.g(std::sqrt(r2));
    }
    sum->add(scale * w * spec.weights[k], std::make_shared<DiagonalSandwich>(std::move(gk), lap));
  }
  return sum;
}

OperatorPtr residual_form(const CommutatorForm& comm, OperatorPtr bound) {
  return operator_sum(1.0, comm.total, -1.0, std::move(bound));
}

OperatorPtr residual_against_kinetic(const CommutatorForm& comm, double eps) {
  auto sum = std::make_shared<SumOperator>(comm.kinetic->grid());
  sum->add(eps, comm.kinetic).add(1.0, comm.potential);
  return sum;
}

OperatorPtr build_hamiltonian(const GridSpec& grid, const Potential& V, std::optional<double> t) {
  auto lap = build_laplacian(grid);
  if (V.kind() == PotentialKind::Zero) return lap;
  auto sum = std::make_shared<SumOperator>(grid);
  sum->add(1.0, lap).add(1.0, std::make_shared<DiagonalOperator>(grid, sample_potential(grid, V, t)));
  return sum;
}

std::shared_ptr<CompositionCommutator> composition_commutator(const GridSpec& grid, const Potential& V,
                                                              const MultiplierSpec& spec, std::optional<double> t) {
  return std::make_shared<CompositionCommutator>(build_hamiltonian(grid, V, t), assemble_gamma(spec, grid));
}

}  // namespace mvf
