#include "triodlab/flux.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "triodlab/numerics.hpp"

namespace triodlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Arc distance (in length units) around an interface meridian that is
// sampled at full resolution; beyond it the stress decays exponentially
// and a coarse grid suffices.
constexpr double kFineArc = 14.0;

double wrap_pi(double a) {
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

double wrap_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

struct VecRows {
  std::vector<double> x, y, z;
  void push(const Vec3& v) {
    x.push_back(v.x);
    y.push_back(v.y);
    z.push_back(v.z);
  }
  void resize(std::size_t n) {
    x.assign(n, 0.0);
    y.assign(n, 0.0);
    z.assign(n, 0.0);
  }
  void set(std::size_t k, const Vec3& v) {
    x[k] = v.x;
    y[k] = v.y;
    z[k] = v.z;
  }
  Vec3 sum() const { return {pairwise_sum(x), pairwise_sum(y), pairwise_sum(z)}; }
};

struct TensorProbe {
  Mat3 t;
  double frobenius = 0.0;
  double bound_gap = 0.0;  // |T|_F - pointwise bound (should be <= 0)
};

TensorProbe probe(const PlanarSampler& sampler, const Potential& pot, double x,
                  double y) {
  const auto du = sampler.gradient(x, y);
  const double w = pot.value(sampler.value(x, y));
  TensorProbe p;
  p.t = stress_tensor_from(du[0], du[1], w);
  p.frobenius = p.t.frobenius_norm();
  p.bound_gap = p.frobenius - frobenius_bound(du[0], du[1], w);
  return p;
}

/// Trapezoid nodes/weights over [a, b] with at least min_nodes nodes,
/// targeting the given samples-per-radian density.
struct Rule {
  double a = 0.0, step = 0.0;
  int n = 0;
  double node(int k) const { return a + step * static_cast<double>(k); }
  double weight(int k) const {
    return (k == 0 || k == n - 1) ? 0.5 * step : step;
  }
};

Rule trapezoid_rule(double a, double b, double per_radian, int min_nodes) {
  Rule r;
  const int cells =
      std::max(min_nodes - 1, static_cast<int>(std::ceil((b - a) * per_radian)));
  r.a = a;
  r.n = cells + 1;
  r.step = (b - a) / static_cast<double>(cells);
  return r;
}

}  // namespace

SurgeryPlan make_surgery_plan(double R, const AngleSchedule& schedule,
                              std::span<const double> interface_azimuths,
                              double delta, double resolution) {
  if (R <= 0.0) throw std::invalid_argument("make_surgery_plan: R must be positive");
  if (resolution <= 0.0)
    throw std::invalid_argument("make_surgery_plan: nonpositive resolution");

  SurgeryPlan plan;
  plan.R = R;
  plan.psi1 = schedule.psi1(R);
  plan.psi2 = schedule.psi2(R);
  plan.resolution = resolution;

  if (!(plan.psi1 > 0.0) || !(plan.psi2 > 0.0) || plan.psi2 >= std::numbers::pi / 3.0)
    throw std::invalid_argument("make_surgery_plan: cap/strip angle out of range");

  const double lhs = std::sqrt(2.0) * std::sin(plan.psi1);
  const double rhs = std::sin(plan.psi2);
  if (!(lhs < rhs)) {
    std::ostringstream msg;
    msg << "make_surgery_plan: schedule violates the strict strip inequality "
           "sqrt(2)*sin(psi1) < sin(psi2) at R = "
        << R << " (lhs " << lhs << " >= rhs " << rhs << ")";
    throw ScheduleViolationError(msg.str());
  }

  const std::size_t m = interface_azimuths.size();
  if (m < 2)
    throw std::invalid_argument("make_surgery_plan: need at least 2 interfaces");

  std::vector<double> az(interface_azimuths.begin(), interface_azimuths.end());
  for (double& a : az) a = wrap_2pi(a);
  std::sort(az.begin(), az.end());
  for (std::size_t k = 0; k < m; ++k) {
    const double gap = (k + 1 < m) ? az[k + 1] - az[k] : az[0] + kTwoPi - az[k];
    if (gap < 1e-9)
      throw std::invalid_argument("make_surgery_plan: coincident interface azimuths");
  }

  plan.slices.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double prev = (k == 0) ? az[m - 1] - kTwoPi : az[k - 1];
    const double next = (k + 1 < m) ? az[k + 1] : az[0] + kTwoPi;
    Slice& s = plan.slices[k];
    s.azimuth = az[k];
    if (delta <= 0.0) {
      s.lo = 0.5 * (prev + az[k]);
      s.hi = 0.5 * (az[k] + next);
    } else {
      const double gap_lo = az[k] - prev, gap_hi = next - az[k];
      if (2.0 * delta > gap_lo + 1e-12 || 2.0 * delta > gap_hi + 1e-12)
        throw std::invalid_argument("make_surgery_plan: overlapping slices");
      if (2.0 * delta < gap_lo - 1e-12 || 2.0 * delta < gap_hi - 1e-12)
        throw std::invalid_argument(
            "make_surgery_plan: slices leave azimuthal gaps uncovered");
      s.lo = az[k] - delta;
      s.hi = az[k] + delta;
    }
  }

  // The strip's azimuthal extent peaks at the cap boundary; it must stay
  // inside its slice there.
  const double strip_max_half_angle = std::asin(std::sin(plan.psi1) / rhs);
  for (const Slice& s : plan.slices) {
    const double half = std::min(s.azimuth - s.lo, s.hi - s.azimuth);
    if (strip_max_half_angle >= half)
      throw std::invalid_argument(
          "make_surgery_plan: strip exceeds its slice near the caps");
  }
  return plan;
}

namespace {

struct CapResult {
  Vec3 flux{};
  double abs_flux = 0.0;
  double area = 0.0;
  double sup_tensor = 0.0;
  double bound_violation = 0.0;
  long evals = 0;
};

CapResult integrate_caps(const PlanarSampler& sampler, const Potential& pot,
                         const SurgeryPlan& plan) {
  CapResult out;
  const double R = plan.R;
  const double res_len = plan.resolution;

  for (int pole = 0; pole < 2; ++pole) {
    const Rule polar = trapezoid_rule(0.0, plan.psi2, res_len * R, 17);
    VecRows rows;
    std::vector<double> abs_rows, area_rows;
    for (int i = 0; i < polar.n; ++i) {
      const double t2 = polar.node(i);
      const double sin_t2 = std::sin(t2);
      const double cos_t2 = (pole == 0) ? std::cos(t2) : -std::cos(t2);
      const double rp = R * sin_t2;  // in-plane radius
      const int naz = std::max(
          16, static_cast<int>(std::ceil(res_len * kTwoPi * std::max(rp, 1.0))));
      const double waz = kTwoPi / static_cast<double>(naz);
      Vec3 row{};
      double row_abs = 0.0;
      for (int j = 0; j < naz; ++j) {
        const double t1 = waz * static_cast<double>(j);
        const double cx = rp * std::cos(t1), cy = rp * std::sin(t1);
        const TensorProbe p = probe(sampler, pot, cx, cy);
        out.sup_tensor = std::max(out.sup_tensor, p.frobenius);
        out.bound_violation = std::max(out.bound_violation, p.bound_gap);
        const Vec3 nu{sin_t2 * std::cos(t1), sin_t2 * std::sin(t1), cos_t2};
        const Vec3 tn = p.t.matvec(nu);
        const double w = R * sin_t2 * waz * polar.weight(i);
        row += tn * w;
        row_abs += tn.norm() * w;
        ++out.evals;
      }
      rows.push(row);
      abs_rows.push_back(row_abs);
      area_rows.push_back(R * sin_t2 * kTwoPi * polar.weight(i));
    }
    out.flux += rows.sum();
    out.abs_flux += pairwise_sum(abs_rows);
    out.area += pairwise_sum(area_rows);
  }
  return out;
}

struct StripResult {
  Vec3 flux{};
  std::array<double, 3> I{};
  double bound_violation = 0.0;
  long evals = 0;
};

StripResult integrate_strip(const PlanarSampler& sampler, const Potential& pot,
                            const SurgeryPlan& plan, const Slice& slice) {
  StripResult out;
  const double R = plan.R;
  const double half_width = R * std::sin(plan.psi1);
  const double beta = slice.azimuth;
  const Vec2 e1{-std::sin(beta), std::cos(beta)};
  const Vec2 e2{std::cos(beta), std::sin(beta)};

  // The profile varies on an O(1) length scale across the strip.
  const double res_y1 = std::max(plan.resolution, 48.0);
  const Rule line_rule = trapezoid_rule(-half_width, half_width, res_y1, 97);

  VecRows rows;
  for (int i = 0; i < line_rule.n; ++i) {
    const double y1 = line_rule.node(i);
    const double rho2 = R * R - y1 * y1;
    const double edge = R * std::cos(plan.psi2);
    if (rho2 <= edge * edge)
      throw GeometryError(
          "flux_sphere_3d: strip parametrization left its valid region "
          "(y2^2 <= 0)");
    const double rho = std::sqrt(rho2);
    const double phi_max = std::asin(edge / rho);

    const Rule phi_rule =
        trapezoid_rule(-phi_max, phi_max, 0.5 * plan.resolution * R, 129);
    Vec3 line{};
    std::array<double, 3> line_I{};
    for (int j = 0; j < phi_rule.n; ++j) {
      const double phi = phi_rule.node(j);
      const double y2 = rho * std::cos(phi);
      const double y3 = rho * std::sin(phi);
      const double cx = y1 * e1.x + y2 * e2.x;
      const double cy = y1 * e1.y + y2 * e2.y;
      const TensorProbe p = probe(sampler, pot, cx, cy);
      out.bound_violation = std::max(out.bound_violation, p.bound_gap);
      // (1/R) T nu dS with dS = (R / y2) dy3 dy1; substituting
      // y3 = rho sin(phi) absorbs the surface element exactly:
      // (1/R) T yvec dphi dy1.
      const Vec3 yvec{cx, cy, y3};
      const double w = phi_rule.weight(j) / R;
      line += p.t.matvec(yvec) * w;
      line_I[0] += std::abs(y1) * w;
      line_I[1] += std::abs(y2) * w;
      line_I[2] += std::abs(y3) * w;
      ++out.evals;
    }
    rows.push(line * line_rule.weight(i));
    for (int j = 0; j < 3; ++j)
      out.I[static_cast<std::size_t>(j)] =
          std::max(out.I[static_cast<std::size_t>(j)], line_I[static_cast<std::size_t>(j)]);
  }
  out.flux = rows.sum();
  return out;
}

struct OffStripResult {
  Vec3 flux{};
  double bound_violation = 0.0;
  long evals = 0;
};

/// One azimuthal subinterval of an off-strip row, sampled fine near both
/// ends (interface side and slice boundary side) and coarse in between.
void row_subinterval(const PlanarSampler& sampler, const Potential& pot,
                     const SurgeryPlan& plan, double beta, double sin_t2,
                     double cos_t2, double lo, double hi, double w_polar,
                     Vec3& row, double& violation, long& evals) {
  const double R = plan.R;
  const double rp = R * sin_t2;
  if (hi <= lo) return;

  const double res = plan.resolution;
  const double coarse = std::max(res / 8.0, 0.5);

  // Angular half-width of the fine bands at the interval ends.
  const double fine_angle =
      (rp > 1e-12) ? std::asin(std::min(1.0, kFineArc / rp)) : std::numbers::pi;

  struct Zone {
    double a, b, density;
  };
  std::vector<Zone> zones;
  if (rp <= 2.0 * kFineArc || (hi - lo) <= 2.0 * fine_angle) {
    zones.push_back({lo, hi, res});
  } else {
    zones.push_back({lo, lo + fine_angle, res});
    zones.push_back({lo + fine_angle, hi - fine_angle, coarse});
    zones.push_back({hi - fine_angle, hi, res});
  }

  for (const Zone& zone : zones) {
    const Rule rule = trapezoid_rule(zone.a, zone.b, zone.density * rp, 5);
    for (int j = 0; j < rule.n; ++j) {
      const double t1 = beta + rule.node(j);
      const double cx = rp * std::cos(t1), cy = rp * std::sin(t1);
      const TensorProbe p = probe(sampler, pot, cx, cy);
      violation = std::max(violation, p.bound_gap);
      const Vec3 nu{sin_t2 * std::cos(t1), sin_t2 * std::sin(t1), cos_t2};
      row += p.t.matvec(nu) * (R * sin_t2 * rule.weight(j) * w_polar);
      ++evals;
    }
  }
}

OffStripResult integrate_offstrip(const PlanarSampler& sampler,
                                  const Potential& pot, const SurgeryPlan& plan,
                                  const Slice& slice, int workers) {
  const double R = plan.R;
  const double sin_psi1 = std::sin(plan.psi1);
  const double lo_off = slice.lo - slice.azimuth;  // < 0
  const double hi_off = slice.hi - slice.azimuth;  // > 0

  const Rule polar = trapezoid_rule(
      plan.psi2, std::numbers::pi - plan.psi2, 0.5 * plan.resolution * R, 65);

  VecRows rows;
  rows.resize(static_cast<std::size_t>(polar.n));
  std::vector<double> violations(static_cast<std::size_t>(polar.n), 0.0);
  std::vector<long> evals(static_cast<std::size_t>(polar.n), 0);

  auto do_rows = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const double t2 = polar.node(i);
      const double sin_t2 = std::sin(t2);
      const double cos_t2 = std::cos(t2);
      // Azimuthal half-angle of the strip hole at this polar row.
      const double alpha = std::asin(std::min(1.0, sin_psi1 / sin_t2));
      Vec3 row{};
      double violation = 0.0;
      long n_eval = 0;
      row_subinterval(sampler, pot, plan, slice.azimuth, sin_t2, cos_t2, lo_off,
                      -alpha, polar.weight(i), row, violation, n_eval);
      row_subinterval(sampler, pot, plan, slice.azimuth, sin_t2, cos_t2, alpha,
                      hi_off, polar.weight(i), row, violation, n_eval);
      rows.set(static_cast<std::size_t>(i), row);
      violations[static_cast<std::size_t>(i)] = violation;
      evals[static_cast<std::size_t>(i)] = n_eval;
    }
  };

  if (workers <= 1) {
    do_rows(0, polar.n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (polar.n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(polar.n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(do_rows, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  OffStripResult out;
  out.flux = rows.sum();
  for (double v : violations) out.bound_violation = std::max(out.bound_violation, v);
  for (long e : evals) out.evals += e;
  return out;
}

}  // namespace

FluxDecomposition flux_sphere_3d(const PlanarSampler& sampler,
                                 const Potential& pot, const SurgeryPlan& plan,
                                 int workers) {
  if (plan.slices.empty())
    throw std::invalid_argument("flux_sphere_3d: plan has no slices");

  FluxDecomposition out;
  out.plan = plan;

  const CapResult caps = integrate_caps(sampler, pot, plan);
  out.cap = caps.flux;
  out.cap_abs = caps.abs_flux;
  out.cap_area_renormalized = caps.area;
  out.cap_sup_tensor = caps.sup_tensor;
  out.cap_bound =
      caps.sup_tensor * 4.0 * std::numbers::pi * plan.R * (1.0 - std::cos(plan.psi2));
  out.frobenius_bound_violation = caps.bound_violation;
  out.evaluations = caps.evals;

  out.total = out.cap;
  for (const Slice& slice : plan.slices) {
    SliceContribution c;
    const StripResult strip = integrate_strip(sampler, pot, plan, slice);
    const OffStripResult off = integrate_offstrip(sampler, pot, plan, slice, workers);
    c.strip = strip.flux;
    c.offstrip = off.flux;
    c.strip_I = strip.I;
    out.frobenius_bound_violation = std::max(
        out.frobenius_bound_violation,
        std::max(strip.bound_violation, off.bound_violation));
    out.evaluations += strip.evals + off.evals;
    out.total += c.strip + c.offstrip;
    out.slices.push_back(c);
  }
  return out;
}

CircleFlux flux_circle_2d(const PlanarSampler& sampler, const Potential& pot,
                          double radius, int quadrature_points,
                          std::span<const double> interface_azimuths,
                          double capture_width) {
  if (radius <= 0.0)
    throw std::invalid_argument("flux_circle_2d: radius must be positive");
  if (quadrature_points < 8)
    throw std::invalid_argument("flux_circle_2d: too few quadrature points");

  CircleFlux out;
  const std::size_t m = interface_azimuths.size();
  out.windows.assign(m, Vec2{});
  out.window_half_angle.assign(m, 0.0);

  // Window half-angles: capture the full profile but never reach the
  // midpoint toward a neighboring interface.
  std::vector<double> az(interface_azimuths.begin(), interface_azimuths.end());
  for (std::size_t k = 0; k < m; ++k) {
    double nearest_gap = kTwoPi;
    for (std::size_t l = 0; l < m; ++l)
      if (l != k) {
        const double gap = std::abs(wrap_pi(az[l] - az[k]));
        nearest_gap = std::min(nearest_gap, gap);
      }
    const double cap_angle = std::asin(std::min(1.0, capture_width / radius));
    out.window_half_angle[k] = std::min(cap_angle, 0.45 * nearest_gap);
  }

  const double w = kTwoPi / static_cast<double>(quadrature_points);
  std::vector<double> tx(static_cast<std::size_t>(quadrature_points));
  std::vector<double> ty(static_cast<std::size_t>(quadrature_points));
  std::vector<Vec2> window_sum(m, Vec2{});
  Vec2 rest{};
  for (int j = 0; j < quadrature_points; ++j) {
    const double theta = w * static_cast<double>(j);
    const double cx = radius * std::cos(theta), cy = radius * std::sin(theta);
    const auto du = sampler.gradient(cx, cy);
    const Mat3 t = stress_tensor_from(du[0], du[1], pot.value(sampler.value(cx, cy)));
    const Vec3 tn3 = t.matvec({std::cos(theta), std::sin(theta), 0.0});
    const Vec2 term{tn3.x * radius * w, tn3.y * radius * w};
    tx[static_cast<std::size_t>(j)] = term.x;
    ty[static_cast<std::size_t>(j)] = term.y;

    bool in_window = false;
    for (std::size_t k = 0; k < m; ++k)
      if (std::abs(wrap_pi(theta - az[k])) <= out.window_half_angle[k]) {
        window_sum[k] += term;
        in_window = true;
        break;
      }
    if (!in_window) rest += term;
    ++out.evaluations;
  }
  out.total = {pairwise_sum(tx), pairwise_sum(ty)};
  out.windows = window_sum;
  out.rest = rest;
  return out;
}

ConvergenceStudy convergence_study(const PlanarSampler& sampler,
                                   const Potential& pot,
                                   const AngleSchedule& schedule,
                                   std::span<const double> interface_azimuths,
                                   std::span<const double> radii,
                                   double resolution, double delta,
                                   int workers) {
  if (radii.size() < 2)
    throw std::invalid_argument("convergence_study: need at least 2 radii");

  ConvergenceStudy study;
  for (double R : radii) {
    const SurgeryPlan plan =
        make_surgery_plan(R, schedule, interface_azimuths, delta, resolution);
    const FluxDecomposition d = flux_sphere_3d(sampler, pot, plan, workers);
    ConvergenceRow row;
    row.R = R;
    row.strip_half_width = plan.strip_half_width();
    row.cap_abs = d.cap_abs;
    row.cap_bound = d.cap_bound;
    for (const SliceContribution& s : d.slices) {
      row.offstrip_magnitude.push_back(s.offstrip.norm());
      row.strip.push_back(s.strip);
      row.slice_total.push_back(s.total());
    }
    row.total_magnitude = d.total.norm();
    study.rows.push_back(row);
    study.decompositions.push_back(d);
  }

  std::vector<double> log_r, log_cap, widths, log_off;
  for (const ConvergenceRow& row : study.rows) {
    log_r.push_back(std::log(row.R));
    log_cap.push_back(std::log(std::max(row.cap_bound, 1e-300)));
    widths.push_back(row.strip_half_width);
    double mean_off = 0.0;
    for (double v : row.offstrip_magnitude) mean_off += v;
    mean_off /= static_cast<double>(row.offstrip_magnitude.size());
    log_off.push_back(std::log(std::max(mean_off, 1e-300)));
  }
  study.cap_exponent = linear_fit(log_r, log_cap).slope;
  study.offstrip_rate = linear_fit(widths, log_off).slope;

  study.slice_differences_shrink = true;
  const std::size_t nslices = study.rows.front().slice_total.size();
  for (std::size_t s = 0; s < nslices; ++s) {
    double prev_diff = -1.0;
    for (std::size_t r = 0; r + 1 < study.rows.size(); ++r) {
      const double diff =
          (study.rows[r + 1].slice_total[s] - study.rows[r].slice_total[s]).norm();
      if (prev_diff >= 0.0 && diff > prev_diff) study.slice_differences_shrink = false;
      prev_diff = diff;
    }
  }
  return study;
}

}  // namespace triodlab
