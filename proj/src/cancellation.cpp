#include "mvf/cancellation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mvf/commutator.hpp"
#include "mvf/parallel.hpp"

namespace mvf {

namespace {

double dist(std::span<const double> a, std::span<const double> b, double sign = 1.0) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - sign * b[j]) * (a[j] - sign * b[j]);
  return std::sqrt(s);
}

double transverse_norm(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) s += x[j] * x[j];
  return std::sqrt(s);
}

}  // namespace

PairBound pair_bound_check(std::span<const double> x, std::span<const double> c, const BumpShape& V0,
                           const RadialProfile& profile) {
  const std::size_t n = x.size();
  if (c.size() != n || static_cast<int>(n) != profile.dim()) throw std::invalid_argument("pair bound: dimension");
  for (std::size_t j = 1; j < n; ++j) {
    if (c[j] != 0.0) throw std::invalid_argument("pair bound: c must lie on the first axis");
  }
  PairBound out;
  const double r = dist(x, std::vector<double>(n, 0.0));
  if (r == 0.0) return out;
  const double s = V0.slope_over_r(r);
  // −2 Σ_± f(ρ±)/ρ± (x ∓ c)·∇V0 with ∇V0 = (V0′/r) x.
  for (double sign : {1.0, -1.0}) {
    const double rho = dist(x, c, sign);
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += (x[j] - sign * c[j]) * x[j];
    out.value += -2.0 * profile.f_over_r(rho) * dot * s;
  }
  const double y = transverse_norm(x);
  const double fmin = std::min(profile.f(dist(x, c, -1.0)), profile.f(dist(x, c, 1.0)));
  out.bound = -2.0 * V0.slope(r) * fmin * (2.0 * y * y / r) / (r + std::abs(c[0]));
  return out;
}

ClaimSign claim_monotone_check(double k1, double k2, std::span<const double> x, const RadialProfile& profile,
                               double tol) {
  if (!(k1 <= x[0] && x[0] <= k2)) throw std::invalid_argument("claim: requires k1 <= x1 <= k2");
  const double y = transverse_norm(x);
  auto term = [&](double k) {
    const double rho = std::hypot(x[0] - k, y);
    return profile.f_over_r(rho) * (x[0] - k);
  };
  ClaimSign out;
  out.sum = term(k1) + term(k2);
  const double d1 = x[0] - k1, d2 = k2 - x[0];
  out.expected = d1 < d2 ? -1 : (d1 > d2 ? 1 : 0);
  if (out.expected < 0) out.holds = out.sum <= tol;
  if (out.expected > 0) out.holds = out.sum >= -tol;
  if (out.expected == 0) out.holds = std::abs(out.sum) <= tol;
  return out;
}

NegativeRegion negative_region(const Potential& V, const MultiplierSpec& spec, const GridSpec& grid,
                               std::optional<std::size_t> bump_index, std::optional<double> t) {
  spec.validate();
  if (V.dim() != grid.dim || spec.dim() != grid.dim) throw std::invalid_argument("negative region: dimension mismatch");
  if (bump_index) {
    if (*bump_index >= V.bump_count()) throw std::invalid_argument("negative region: bump index out of range");
    if (t) throw std::invalid_argument("negative region: indexed bumps are static");
  }
  const bool morawetz = spec.variant == MultiplierVariant::Morawetz;
  const double f_inf = morawetz ? 1.0 : spec.profile.f_inf();
  double lam_max = 0.0;
  for (double w : spec.weights) lam_max = std::max(lam_max, std::abs(w));

  const std::size_t N = grid.size();
  NegativeRegion reg;
  reg.bump_index = bump_index;
  reg.indicator.assign(N, 0);
  std::vector<double> value(N), margin(N);
  std::vector<std::uint8_t> support(N, 0);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    const int n = grid.dim;
    std::vector<double> x(n), gF(n), gV(n);
    for (std::size_t i = b; i < e; ++i) {
      grid.coordinates(i, x);
      double v;
      if (bump_index) {
        V.bump_gradient(*bump_index, x, gV);
        v = V.bump_value(*bump_index, x);
      } else {
        V.gradient(x, gV, t);
        v = V.value(x, t);
      }
      spec.gradient_F(x, gF);
      double dot = 0.0, gv2 = 0.0;
      for (int j = 0; j < n; ++j) {
        dot += gF[j] * gV[j];
        gv2 += gV[j] * gV[j];
      }
      const double gvn = std::sqrt(gv2);
      double fsum = 0.0;
      for (std::size_t k = 0; k < spec.centers.size(); ++k) {
        fsum += std::abs(spec.weights[k]) * (morawetz ? 1.0 : spec.profile.f(dist(x, spec.centers[k])));
      }
      value[i] = -2.0 * dot;
      margin[i] = value[i] + 4.0 * f_inf * lam_max * gvn;
      support[i] = (v != 0.0 || gvn != 0.0) ? 1 : 0;
      reg.indicator[i] = value[i] < -1e-14 * 2.0 * fsum * gvn ? 1 : 0;
    }
  });
  reg.min_value = 0.0;
  reg.floor_margin = kInf;
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < N; ++i) {
    reg.support_nodes += support[i];
    reg.min_value = std::min(reg.min_value, value[i]);
    reg.floor_margin = std::min(reg.floor_margin, margin[i]);
    if (!reg.indicator[i]) continue;
    ++reg.flagged;
    grid.coordinates(i, x);
    reg.tube_radius = std::max(reg.tube_radius, transverse_norm(x));
    reg.axial_extent = std::max(reg.axial_extent, std::abs(x[0]));
    if (!support[i]) reg.outside_support = true;
  }
  reg.volume_fraction = reg.support_nodes ? static_cast<double>(reg.flagged) / reg.support_nodes : 0.0;
  return reg;
}

void write_region_dump(std::ostream& os, const GridSpec& grid, const NegativeRegion& region) {
  std::vector<double> v(region.indicator.begin(), region.indicator.end());
  write_real_dump(os, grid, v);
}

TubeLadder tube_ladder(const Potential& V, const RadialProfile& profile, const Point& axis_b,
                       std::span<const int> N_list, const GridSpec& grid) {
  TubeLadder out;
  for (int N : N_list) {
    const auto spec = build_gamma_N(profile, N, axis_b);
    double tube = 0.0, axial = 0.0, margin = kInf;
    const std::size_t nb = std::max<std::size_t>(V.bump_count(), 1);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto reg = V.bump_count() ? negative_region(V, spec, grid, j) : negative_region(V, spec, grid);
      tube = std::max(tube, reg.tube_radius);
      axial = std::max(axial, reg.axial_extent);
      margin = std::min(margin, reg.floor_margin);
    }
    if (!out.tube_radius.empty() && tube > out.tube_radius.back()) out.nonincreasing = false;
    out.N.push_back(N);
    out.tube_radius.push_back(tube);
    out.axial_extent.push_back(axial);
    out.floor_margin.push_back(margin);
  }
  return out;
}

std::vector<std::optional<int>> fitting_thresholds(const TubeLadder& ladder, std::span<const double> deltas,
                                                   double L) {
  std::vector<std::optional<int>> out;
  for (double d : deltas) {
    std::optional<int> first;
    for (std::size_t i = 0; i < ladder.N.size(); ++i) {
      if (ladder.tube_radius[i] <= d && ladder.axial_extent[i] <= L) {
        first = ladder.N[i];
        break;
      }
    }
    out.push_back(first);
  }
  return out;
}

LogFit log_accumulation_fit(const BumpShape& V0, const RadialProfile& profile, const Point& axis_b,
                            std::span<const int> N_list, std::span<const Point> probes) {
  if (N_list.size() < 3) throw std::invalid_argument("log fit: at least three N values are required");
  if (probes.empty()) throw std::invalid_argument("log fit: no probes");
  LogFit out;
  const int n = profile.dim();
  std::vector<double> gF(n);
  for (int N : N_list) {
    if (N < 1) throw std::invalid_argument("log fit: N must be positive");
    const auto spec = build_gamma_N(profile, N, axis_b);
    double m = kInf;
    for (const auto& x : probes) {
      if (static_cast<int>(x.size()) != n) throw std::invalid_argument("log fit: probe dimension");
      double r = 0.0;
      for (double v : x) r += v * v;
      r = std::sqrt(r);
      spec.gradient_F(x, gF);
      const double s = V0.slope_over_r(r);
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += gF[j] * s * x[j];
      m = std::min(m, -2.0 * dot);
    }
    out.N.push_back(N);
    out.minima.push_back(m);
  }
  const std::size_t k = out.N.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double lx = std::log(static_cast<double>(out.N[i]));
    sx += lx;
    sy += out.minima[i];
    sxx += lx * lx;
    sxy += lx * out.minima[i];
  }
  const double den = k * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("log fit: N values must be distinct");
  out.slope = (k * sxy - sx * sy) / den;
  out.intercept = (sy - out.slope * sx) / k;
  const double mean = sy / k;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double fit = out.intercept + out.slope * std::log(static_cast<double>(out.N[i]));
    ss_res += (out.minima[i] - fit) * (out.minima[i] - fit);
    ss_tot += (out.minima[i] - mean) * (out.minima[i] - mean);
  }
  out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

LowerBoundSample general_lower_bound_check(const Potential& V, const MultiplierSpec& spec, std::span<const double> x,
                                           double L, double tol) {
  spec.validate();
  const int n = spec.dim();
  Point gV(n);
  V.gradient(x, gV);
  double S = 0.0;
  for (std::size_t k = 0; k < spec.centers.size(); ++k) S += spec.weights[k] * spec.profile.f_over_r(dist(x, spec.centers[k]));
  double ydot = 0.0;
  for (int j = 1; j < n; ++j) ydot += gV[j] * x[j];
  LowerBoundSample out;
  out.value = potential_symbol(V, spec, x);
  out.floor = -2.0 * std::abs(gV[0]) * (2.0 * L + 3.0) * spec.profile.f_inf() - 2.0 * ydot * S;
  out.holds = out.value >= out.floor - tol;
  return out;
}

double sym_morawetz_check(const Potential& V, std::span<const double> x_prime, std::span<const double> x, double L) {
  if (!(std::abs(x[0]) > L)) throw std::invalid_argument("sym Morawetz: requires |x1| > L");
  const auto spec = build_sym_morawetz(Point(x_prime.begin(), x_prime.end()), RadialProfile(1.0, 1.0, V.dim()));
  return potential_symbol(V, spec, x);
}

}  // namespace mvf
