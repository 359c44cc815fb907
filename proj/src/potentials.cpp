#include "mvf/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mvf {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double transverse_norm(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) s += x[j] * x[j];
  return std::sqrt(s);
}

void require_dim(int dim, std::span<const double> x) {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("potential: point has wrong dimension");
}

}  // namespace

double BumpShape::value(double r) const {
  if (r >= radius) return 0.0;
  const double t = 1.0 - (r / radius) * (r / radius);
  return amplitude * t * t * t;
}

double BumpShape::slope(double r) const { return slope_over_r(r) * r; }

double BumpShape::slope_over_r(double r) const {
  if (r >= radius) return 0.0;
  const double t = 1.0 - (r / radius) * (r / radius);
  return -6.0 * amplitude / (radius * radius) * t * t;
}

double MotionLaw::value(double t) const {
  switch (kind) {
    case Kind::Constant:
      return base;
    case Kind::Sinusoid:
      return base + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
    case Kind::TanhStep:
      return base + amplitude * std::tanh(t / period);
    case Kind::Triangle: {
      // Period-`period` zigzag through base with peak deviation `amplitude`.
      const double u = t / period - std::floor(t / period);
      const double tri = u < 0.25 ? 4 * u : (u < 0.75 ? 2 - 4 * u : 4 * u - 4);
      return base + amplitude * tri;
    }
    case Kind::LinearDrift:
      return base + amplitude * t / period;
  }
  return base;
}

double MotionLaw::deviation_bound() const {
  if (kind == Kind::LinearDrift && amplitude != 0.0) return kInf;
  return kind == Kind::Constant ? 0.0 : std::abs(amplitude);
}

MotionLaw::Kind MotionLaw::kind_from_string(const std::string& s) {
  if (s == "constant") return Kind::Constant;
  if (s == "sinusoid") return Kind::Sinusoid;
  if (s == "tanh-step") return Kind::TanhStep;
  if (s == "triangle") return Kind::Triangle;
  if (s == "linear-drift") return Kind::LinearDrift;
  throw std::invalid_argument("unknown motion law '" + s + "'");
}

std::string to_string(MotionLaw::Kind k) {
  switch (k) {
    case MotionLaw::Kind::Constant: return "constant";
    case MotionLaw::Kind::Sinusoid: return "sinusoid";
    case MotionLaw::Kind::TanhStep: return "tanh-step";
    case MotionLaw::Kind::Triangle: return "triangle";
    case MotionLaw::Kind::LinearDrift: return "linear-drift";
  }
  return "constant";
}

double AxialFactor::value(double s) const {
  const double p = (s - offset) / width;
  const double m = (s + offset) / width;
  return amplitude * (std::exp(-p * p) + std::exp(-m * m));
}

double AxialFactor::slope(double s) const {
  const double p = (s - offset) / width;
  const double m = (s + offset) / width;
  return -2.0 * amplitude / width * (p * std::exp(-p * p) + m * std::exp(-m * m));
}

std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::RadialBump: return "radial-bump";
    case PotentialKind::TwoBump: return "two-bump";
    case PotentialKind::Lattice1D: return "lattice";
    case PotentialKind::AxialProduct: return "axial-product";
    case PotentialKind::NondefiniteRadial: return "nondefinite-radial";
    case PotentialKind::WeightedSum: return "weighted-sum";
    case PotentialKind::TimeDependent: return "time-dependent";
  }
  return "zero";
}

Potential Potential::zero(int dim) {
  if (dim < 1) throw std::invalid_argument("potential: dimension must be positive");
  return Potential(PotentialKind::Zero, dim);
}

Potential Potential::radial_bump(Point center, BumpShape shape) {
  if (!(shape.radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
  Potential p(PotentialKind::RadialBump, static_cast<int>(center.size()));
  p.bump_centers_.push_back(std::move(center));
  p.shape_ = shape;
  return p;
}

Potential Potential::two_bump(Point b, BumpShape shape) {
  if (!(shape.radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
  if (norm2(b) == 0.0) throw std::invalid_argument("two-bump: separation vector must be nonzero");
  Potential p(PotentialKind::TwoBump, static_cast<int>(b.size()));
  Point minus = b;
  for (auto& v : minus) v = -v;
  p.bump_centers_ = {minus, b};
  p.axis_ = std::move(b);
  p.shape_ = shape;
  return p;
}

Potential Potential::lattice(Point b, int M, BumpShape shape) {
  if (!(shape.radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
  if (M < 0) throw std::invalid_argument("lattice: M must be nonnegative");
  if (norm2(b) == 0.0) throw std::invalid_argument("lattice: spacing vector must be nonzero");
  Potential p(PotentialKind::Lattice1D, static_cast<int>(b.size()));
  for (int j = -M; j <= M; ++j) {
    Point c = b;
    for (auto& v : c) v *= j;
    p.bump_centers_.push_back(std::move(c));
  }
  p.axis_ = std::move(b);
  p.lattice_M_ = M;
  p.shape_ = shape;
  return p;
}

Potential Potential::axial_product(int dim, AxialFactor factor) {
  if (dim < 2) throw std::invalid_argument("axial product needs dimension at least 2");
  if (!(factor.width > 0.0) || factor.amplitude < 0.0) throw std::invalid_argument("axial factor: bad parameters");
  Potential p(PotentialKind::AxialProduct, dim);
  p.axial_ = factor;
  return p;
}

Potential Potential::nondefinite_radial(int dim, double b, double c, double eps) {
  if (!(b > 0.0) || !(c > 0.0) || !(eps > 0.0)) throw std::invalid_argument("nondefinite potential: need b, c, eps > 0");
  Potential p(PotentialKind::NondefiniteRadial, dim);
  p.tail_b_ = b;
  p.tail_c_ = c;
  p.tail_eps_ = eps;
  return p;
}

Potential Potential::weighted_sum(std::vector<std::pair<double, Potential>> terms) {
  if (terms.empty()) throw std::invalid_argument("weighted sum: no terms");
  Potential p(PotentialKind::WeightedSum, terms.front().second.dim());
  for (auto& [w, v] : terms) {
    if (v.dim() != p.dim_) throw std::invalid_argument("weighted sum: dimension mismatch");
    if (v.is_time_dependent()) throw std::invalid_argument("weighted sum: terms must be static");
    p.terms_.emplace_back(w, std::make_shared<const Potential>(std::move(v)));
  }
  return p;
}

Potential Potential::time_dependent(Potential base, MotionLaw beta, MotionLaw lambda) {
  if (base.is_time_dependent()) throw std::invalid_argument("time-dependent: base must be static");
  Potential p(PotentialKind::TimeDependent, base.dim());
  p.terms_.emplace_back(1.0, std::make_shared<const Potential>(std::move(base)));
  p.beta_ = beta;
  p.lambda_ = lambda;
  return p;
}

void Potential::check_time(std::optional<double> t) const {
  if (is_time_dependent() && !t) throw std::invalid_argument("time-dependent potential needs a time argument");
  if (!is_time_dependent() && t) throw std::invalid_argument("static potential takes no time argument");
}

double Potential::static_value(std::span<const double> x) const {
  switch (kind_) {
    case PotentialKind::Zero:
      return 0.0;
    case PotentialKind::RadialBump:
    case PotentialKind::TwoBump:
    case PotentialKind::Lattice1D: {
      double v = 0.0;
      for (std::size_t j = 0; j < bump_centers_.size(); ++j) v += bump_value(j, x);
      return v;
    }
    case PotentialKind::AxialProduct:
      return axial_.value(x[0]) * std::exp(-transverse_norm(x));
    case PotentialKind::NondefiniteRadial: {
      const double r = std::sqrt(norm2(x));
      return -1.0 / (tail_b_ + tail_c_ * std::pow(r, 2.0 + tail_eps_));
    }
    case PotentialKind::WeightedSum: {
      double v = 0.0;
      for (const auto& [w, p] : terms_) v += w * p->static_value(x);
      return v;
    }
    case PotentialKind::TimeDependent:
      break;
  }
  throw std::logic_error("static_value on a time-dependent potential");
}

void Potential::static_gradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  switch (kind_) {
    case PotentialKind::Zero:
      return;
    case PotentialKind::RadialBump:
    case PotentialKind::TwoBump:
    case PotentialKind::Lattice1D: {
      Point g(dim_);
      for (std::size_t j = 0; j < bump_centers_.size(); ++j) {
        bump_gradient(j, x, g);
        for (int k = 0; k < dim_; ++k) out[k] += g[k];
      }
      return;
    }
    case PotentialKind::AxialProduct: {
      const double y = transverse_norm(x);
      const double e = std::exp(-y);
      out[0] = axial_.slope(x[0]) * e;
      // The transverse factor has a kink on the axis; its one-sided gradient is set to 0 there.
      if (y > 0.0) {
        const double s = -axial_.value(x[0]) * e / y;
        for (int k = 1; k < dim_; ++k) out[k] = s * x[k];
      }
      return;
    }
    case PotentialKind::NondefiniteRadial: {
      const double r = std::sqrt(norm2(x));
      if (r == 0.0) return;
      const double p = 2.0 + tail_eps_;
      const double den = tail_b_ + tail_c_ * std::pow(r, p);
      // dV/dr / r = c p r^{p−2} / den²
      const double s = tail_c_ * p * std::pow(r, p - 2.0) / (den * den);
      for (int k = 0; k < dim_; ++k) out[k] = s * x[k];
      return;
    }
    case PotentialKind::WeightedSum: {
      Point g(dim_);
      for (const auto& [w, p] : terms_) {
        p->static_gradient(x, g);
        for (int k = 0; k < dim_; ++k) out[k] += w * g[k];
      }
      return;
    }
    case PotentialKind::TimeDependent:
      break;
  }
  throw std::logic_error("static_gradient on a time-dependent potential");
}

double Potential::value(std::span<const double> x, std::optional<double> t) const {
  require_dim(dim_, x);
  check_time(t);
  if (!is_time_dependent()) return static_value(x);
  Point z(x.begin(), x.end());
  z[0] -= beta_.value(*t);
  const double lam = lambda_.value(*t);
  for (int k = 1; k < dim_; ++k) z[k] *= lam;
  return base().static_value(z);
}

void Potential::gradient(std::span<const double> x, std::span<double> out, std::optional<double> t) const {
  require_dim(dim_, x);
  if (static_cast<int>(out.size()) != dim_) throw std::invalid_argument("potential: gradient buffer has wrong size");
  check_time(t);
  if (!is_time_dependent()) {
    static_gradient(x, out);
    return;
  }
  Point z(x.begin(), x.end());
  z[0] -= beta_.value(*t);
  const double lam = lambda_.value(*t);
  for (int k = 1; k < dim_; ++k) z[k] *= lam;
  base().static_gradient(z, out);
  for (int k = 1; k < dim_; ++k) out[k] *= lam;
}

Point Potential::gradient(std::span<const double> x, std::optional<double> t) const {
  Point g(dim_);
  gradient(x, g, t);
  return g;
}

Potential Potential::at_time(double t) const {
  if (!is_time_dependent()) return *this;
  const double b = beta_.value(t);
  const double lam = lambda_.value(t);
  const Potential& p = base();
  if (lam == 1.0 && !p.bump_centers_.empty()) {
    // Translated bump sums stay in their family.
    Potential q = p;
    for (auto& c : q.bump_centers_) c[0] += b;
    return q;
  }
  Potential q = *this;
  q.beta_ = MotionLaw{MotionLaw::Kind::Constant, b, 0.0, 1.0};
  q.lambda_ = MotionLaw{MotionLaw::Kind::Constant, lam, 0.0, 1.0};
  // Still carries the time argument contract; callers use it with any t.
  return q;
}

double Potential::bump_value(std::size_t j, std::span<const double> x) const {
  const Point& c = bump_centers_.at(j);
  double r2 = 0.0;
  for (int k = 0; k < dim_; ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
  return shape_.value(std::sqrt(r2));
}

void Potential::bump_gradient(std::size_t j, std::span<const double> x, std::span<double> out) const {
  const Point& c = bump_centers_.at(j);
  double r2 = 0.0;
  for (int k = 0; k < dim_; ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
  const double s = shape_.slope_over_r(std::sqrt(r2));
  for (int k = 0; k < dim_; ++k) out[k] = s * (x[k] - c[k]);
}

double Potential::min_support_radius() const {
  switch (kind_) {
    case PotentialKind::RadialBump:
    case PotentialKind::TwoBump:
    case PotentialKind::Lattice1D:
      return shape_.radius;
    case PotentialKind::WeightedSum:
    case PotentialKind::TimeDependent: {
      double r = kInf;
      for (const auto& [w, p] : terms_) r = std::min(r, p->min_support_radius());
      // Transverse scaling by λ shrinks the support to R/λ.
      if (kind_ == PotentialKind::TimeDependent) r /= std::max(1.0, lambda_.base + lambda_.deviation_bound());
      return r;
    }
    default:
      return kInf;
  }
}

double Potential::axial_support() const {
  switch (kind_) {
    case PotentialKind::Zero:
      return 0.0;
    case PotentialKind::RadialBump:
    case PotentialKind::TwoBump:
    case PotentialKind::Lattice1D: {
      double m = 0.0;
      for (const auto& c : bump_centers_) m = std::max(m, std::abs(c[0]) + shape_.radius);
      return m;
    }
    case PotentialKind::WeightedSum: {
      double m = 0.0;
      for (const auto& [w, p] : terms_) m = std::max(m, p->axial_support());
      return m;
    }
    case PotentialKind::TimeDependent:
      return base().axial_support() + beta_.deviation_bound() + std::abs(beta_.base);
    default:
      return kInf;
  }
}

double gradient_fd_defect(const Potential& V, std::span<const double> points, double step, std::optional<double> t) {
  const int n = V.dim();
  if (points.size() % n != 0) throw std::invalid_argument("gradient check: point table size");
  Point x(n), g(n);
  double worst = 0.0;
  for (std::size_t p = 0; p < points.size() / n; ++p) {
    std::copy_n(points.begin() + p * n, n, x.begin());
    V.gradient(x, g, t);
    for (int k = 0; k < n; ++k) {
      const double keep = x[k];
      x[k] = keep + step;
      const double up = V.value(x, t);
      x[k] = keep - step;
      const double dn = V.value(x, t);
      x[k] = keep;
      worst = std::max(worst, std::abs((up - dn) / (2 * step) - g[k]));
    }
  }
  return worst;
}

bool AxialConditionReport::all_pass() const {
  return nonneg.pass && c1.pass && transverse.pass && axial.pass && every_axis.pass && control.pass &&
         lambda_monotone;
}

namespace {

void record(ConditionResult& r, double margin, double tol, std::span<const double> x) {
  if (margin < r.worst) {
    r.worst = margin;
    r.where.assign(x.begin(), x.end());
  }
  if (margin < -tol) r.pass = false;
}

}  // namespace

AxialConditionReport check_axial_conditions(const Potential& V, const GridSpec& sample, std::span<const double> deltas,
                                            std::optional<double> t, const AxialCheckOptions& opt) {
  const int n = V.dim();
  if (sample.dim != n) throw std::invalid_argument("axial check: sample dimension mismatch");
  sample.validate();
  if (sample.size() == 0) throw std::invalid_argument("axial check: empty sample");
  if (deltas.empty()) throw std::invalid_argument("axial check: empty delta list");
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] > deltas[i - 1])) throw std::invalid_argument("axial check: deltas must increase");
  }

  AxialConditionReport rep;
  rep.samples = sample.size();
  const std::vector<double> table = sample.coordinate_table();
  std::vector<double> vals(sample.size());
  std::vector<double> grads(sample.size() * n);
  double gscale = 0.0;
  double max_x1 = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::span<const double> x(table.data() + i * n, n);
    vals[i] = V.value(x, t);
    V.gradient(x, std::span<double>(grads.data() + i * n, n), t);
    for (int k = 0; k < n; ++k) gscale = std::max(gscale, std::abs(grads[i * n + k]));
    max_x1 = std::max(max_x1, std::abs(x[0]));
  }

  // L: largest |x₁| where some per-direction repulsiveness fails.
  double L = 0.0;
  bool any_violation = false;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double* x = &table[i * n];
    const double* g = &grads[i * n];
    bool bad = -x[0] * g[0] < -opt.tol;
    for (int k = 1; k < n && !bad; ++k) bad = -x[k] * g[k] < -opt.tol;
    if (bad) {
      L = std::max(L, std::abs(x[0]));
      any_violation = true;
    }
  }
  rep.L = L;
  rep.slab = opt.slab.value_or(L);
  // A violation on the outermost sampled slice leaves L undetermined.
  const bool L_resolved = !any_violation || L < max_x1 - 0.5 * sample.spacing(0);

  Point x(n);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::copy_n(table.begin() + i * n, n, x.begin());
    const double* g = &grads[i * n];
    record(rep.nonneg, vals[i], opt.tol, x);
    double ydot = 0.0;
    for (int k = 1; k < n; ++k) ydot += x[k] * g[k];
    record(rep.transverse, -ydot, opt.tol, x);
    if (std::abs(x[0]) > L) {
      record(rep.axial, -x[0] * g[0], opt.tol, x);
      record(rep.axial, -ydot, opt.tol, x);
      for (int k = 0; k < n; ++k) record(rep.every_axis, -x[k] * g[k], opt.tol, x);
    }
  }
  if (!L_resolved) {
    rep.axial.pass = false;
    rep.every_axis.pass = false;
  }

  // C¹: analytic gradient against central differences; stencils straddling the axis are skipped.
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::copy_n(table.begin() + i * n, n, x.begin());
    if (transverse_norm(x) <= 2.0 * opt.fd_step) continue;
    for (int k = 0; k < n; ++k) {
      const double keep = x[k];
      x[k] = keep + opt.fd_step;
      const double up = V.value(x, t);
      x[k] = keep - opt.fd_step;
      const double dn = V.value(x, t);
      x[k] = keep;
      const double err = std::abs((up - dn) / (2 * opt.fd_step) - grads[i * n + k]);
      const double margin = opt.fd_tol - err;
      if (margin < 0.0) {
        rep.c1.pass = false;
        if (margin < rep.c1.worst) {
          rep.c1.worst = margin;
          rep.c1.where = x;
        }
      }
    }
  }

  // Λ_δ over the slab |x₁| ≤ slab, |y| > δ; 0/0 contributes nothing.
  const double vanish = 1e-14 * std::max(gscale, 1e-300);
  for (double delta : deltas) {
    double lam = 0.0;
    Point where;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double* xp = &table[i * n];
      if (std::abs(xp[0]) > rep.slab) continue;
      const std::span<const double> xs(xp, n);
      const double y = transverse_norm(xs);
      if (y <= delta) continue;
      const double* g = &grads[i * n];
      double radial = 0.0;
      for (int k = 1; k < n; ++k) radial += xp[k] * g[k];
      radial = std::abs(radial) / y;
      const double num = std::abs(g[0]);
      double ratio;
      if (radial <= vanish) {
        if (num <= vanish) continue;
        ratio = kInf;
      } else {
        ratio = num / radial;
      }
      if (ratio > lam) {
        lam = ratio;
        where.assign(xp, xp + n);
      }
    }
    rep.lambda.emplace_back(delta, lam);
    if (std::isinf(lam)) {
      rep.control.pass = false;
      rep.control.where = where;
    }
  }
  for (std::size_t i = 1; i < rep.lambda.size(); ++i) {
    if (rep.lambda[i].second > rep.lambda[i - 1].second) rep.lambda_monotone = false;
  }
  return rep;
}

TimeUniformityReport check_time_uniformity(const Potential& V, std::span<const double> times, const GridSpec& sample,
                                           std::span<const double> deltas, double envelope_tol) {
  if (!V.is_time_dependent()) throw std::invalid_argument("time uniformity: potential is static");
  TimeUniformityReport rep;
  rep.envelope_tol = envelope_tol;
  rep.times.assign(times.begin(), times.end());
  const double beta0 = V.beta().deviation_bound() + std::abs(V.beta().base);
  const double lam_dev = V.lambda().deviation_bound();
  const double lam0 = V.lambda().base - lam_dev;
  if (!(lam0 > 0.0)) {
    rep.reason = "transverse scaling is not bounded away from 0";
    return rep;
  }

  const AxialConditionReport stat = check_axial_conditions(V.base(), sample, deltas);
  rep.L_static = stat.L;
  if (!stat.all_pass()) {
    rep.reason = "static potential fails the axial conditions";
    return rep;
  }
  if (std::isinf(beta0)) {
    rep.L_bound = kInf;
  } else {
    rep.L_bound = stat.L + beta0 + sample.spacing(0);
  }

  // Envelope: the static ratio over the slab widened by 2β₀, at transverse radius λ₀δ, scaled by 1/λ₀.
  if (!std::isinf(beta0)) {
    std::vector<double> scaled(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) scaled[i] = deltas[i] * lam0;
    AxialCheckOptions wide;
    wide.slab = stat.L + 2.0 * beta0;
    // Moved and scaled nodes fall between the static ones, so the envelope is sampled four times finer.
    const AxialConditionReport env =
        check_axial_conditions(V.base(), sample.refined().refined(), scaled, std::nullopt, wide);
    for (const auto& [d, l] : env.lambda) rep.envelope.push_back(l / lam0);
  }

  rep.pass = true;
  for (double t : times) {
    rep.reports.push_back(check_axial_conditions(V, sample, deltas, t));
    const auto& r = rep.reports.back();
    rep.L_observed = std::max(rep.L_observed, r.L);
    if (!r.all_pass()) {
      rep.pass = false;
      if (rep.reason.empty()) {
        std::ostringstream os;
        os << "axial conditions fail at t = " << t;
        rep.reason = os.str();
      }
    }
    if (r.L > rep.L_bound) {
      rep.pass = false;
      if (rep.reason.empty()) {
        std::ostringstream os;
        os << "L(t) = " << r.L << " exceeds the uniform bound " << rep.L_bound << " at t = " << t;
        rep.reason = os.str();
      }
    }
    for (std::size_t i = 0; i < r.lambda.size() && i < rep.envelope.size(); ++i) {
      if (r.lambda[i].second > rep.envelope[i] * (1.0 + envelope_tol)) {
        rep.pass = false;
        if (rep.reason.empty()) {
          std::ostringstream os;
          os << "Lambda_delta leaves the envelope at t = " << t << ", delta = " << r.lambda[i].first;
          rep.reason = os.str();
        }
      }
    }
  }
  if (std::isinf(rep.L_bound)) {
    rep.pass = false;
    if (rep.reason.empty()) rep.reason = "translation is unbounded in time";
  }
  return rep;
}

NondefiniteReport check_nondefinite_condition(const Potential& V, const RadialProfile& profile, double lambda,
                                              std::span<const double> points) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("nondefinite check: lambda must lie in (0, 1)");
  if (V.is_time_dependent()) throw std::invalid_argument("nondefinite check: static potential required");
  const int n = profile.dim();
  if (V.dim() != n || points.size() % n != 0) throw std::invalid_argument("nondefinite check: dimension mismatch");
  const double m = n - 2.0;
  const double coef = lambda * (m * m - profile.sigma() / 4.0);
  const double finf = profile.f_inf();
  NondefiniteReport rep;
  rep.min_margin = kInf;
  Point x(n), g(n);
  for (std::size_t p = 0; p < points.size() / n; ++p) {
    std::copy_n(points.begin() + p * n, n, x.begin());
    const double r2 = norm2(x);
    if (r2 == 0.0) throw std::invalid_argument("nondefinite check: sample contains the origin");
    V.gradient(x, g);
    const double bracket = std::pow(1.0 + profile.a() * r2, profile.sigma());
    const double margin = coef / (r2 * bracket) - 2.0 * finf * std::sqrt(norm2(g));
    rep.margins.push_back(margin);
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.where = x;
    }
  }
  rep.pass = rep.margins.empty() || rep.min_margin >= -1e-12;
  if (rep.margins.empty()) rep.min_margin = 0.0;
  return rep;
}

NondefiniteParameters nondefinite_equality_parameters() {
  // n = 3, a = 1, σ = 1, M₁ = π/2, ε = 2σ − 1, λ = 1/2.
  const double lambda = 0.5;
  const double eps = 1.0;
  const double M = std::numbers::pi / 2;
  const double b = 4.0 * (2.0 + eps) * M / lambda;
  const double c = 16.0 * (2.0 + eps) * M / lambda;
  return {lambda, eps, b, c};
}

}  // namespace mvf
