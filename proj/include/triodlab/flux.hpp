#pragma once

#include <span>
#include <vector>

#include "triodlab/sampler.hpp"
#include "triodlab/stress.hpp"

namespace triodlab {

/// Thrown when a cap/strip angle schedule violates the strict
/// compatibility inequality sqrt(2) sin(psi1) < sin(psi2).
class ScheduleViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the strip graph parametrization leaves its valid region.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cap/strip angle schedule psi_k(R) = c_k R^{-p_k}. The reference
/// schedule (c = 1, p1 = 4/5, p2 = 3/4) only satisfies the strict strip
/// inequality for large R; the default desk-scale schedule shrinks c1.
struct AngleSchedule {
  double c1 = 0.3;
  double c2 = 1.0;
  double p1 = 0.8;
  double p2 = 0.75;

  double psi1(double radius) const { return c1 * std::pow(radius, -p1); }
  double psi2(double radius) const { return c2 * std::pow(radius, -p2); }

  static AngleSchedule reference() { return {1.0, 1.0, 0.8, 0.75}; }
  static AngleSchedule desk_scale() { return {0.3, 1.0, 0.8, 0.75}; }
};

struct Slice {
  double azimuth = 0.0;  // interface meridian
  double lo = 0.0;       // sector bounds as offsets are handled internally;
  double hi = 0.0;       // lo < azimuth < hi up to wrapping
};

/// Geometry of one sphere integration: radius, cap polar angle psi2,
/// strip azimuthal half-angle psi1, and the azimuthal slices (one per
/// interface, tiling the sphere outside the caps).
struct SurgeryPlan {
  double R = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
  double resolution = 16.0;  // quadrature samples per unit arc length
  std::vector<Slice> slices;

  Vec3 center() const { return {0.0, 0.0, 2.0 * R}; }
  double strip_half_width() const { return R * std::sin(psi1); }
};

/// Validates every plan invariant. delta == 0 places the slice
/// boundaries at the azimuthal midpoints between consecutive interfaces
/// (always an exact tiling); a positive uniform delta must itself tile,
/// otherwise the overlap/gap is an error.
SurgeryPlan make_surgery_plan(double R, const AngleSchedule& schedule,
                              std::span<const double> interface_azimuths,
                              double delta = 0.0, double resolution = 16.0);

struct SliceContribution {
  Vec3 strip{};
  Vec3 offstrip{};
  std::array<double, 3> strip_I{};  // max over strip lines of the I_j integrals
  Vec3 total() const { return strip + offstrip; }
};

struct FluxDecomposition {
  SurgeryPlan plan;
  Vec3 cap{};
  double cap_abs = 0.0;                // (1/R) integral of |T nu| over the caps
  double cap_area_renormalized = 0.0;  // (1/R) integral of dS over the caps
  double cap_sup_tensor = 0.0;         // sup |T|_F on the caps
  double cap_bound = 0.0;              // cap_sup_tensor * 4 pi R (1 - cos psi2)
  double frobenius_bound_violation = 0.0;  // max |T|_F minus pointwise bound
  std::vector<SliceContribution> slices;
  Vec3 total{};  // cap + sum of slice parts; a regrouping of one quadrature
  long evaluations = 0;
};

/// (1/R) integral of T nu over the sphere of the plan, split into caps,
/// per-slice strips (graph parametrization with the surface element
/// (R/y2) dy3 dy1) and per-slice off-strip remainders; the I_j
/// dominated-convergence diagnostics come from the same strip grid.
FluxDecomposition flux_sphere_3d(const PlanarSampler& sampler,
                                 const Potential& pot, const SurgeryPlan& plan,
                                 int workers = 1);

struct CircleFlux {
  Vec2 total{};
  std::vector<Vec2> windows;  // one per interface azimuth
  Vec2 rest{};
  std::vector<double> window_half_angle;
  long evaluations = 0;
};

/// Planar flux integral over the circle |x| = R, with per-interface
/// angular windows sized to capture the full connection profile. Window
/// contributions approach -sigma_ij nu_ij; the total approaches zero.
CircleFlux flux_circle_2d(const PlanarSampler& sampler, const Potential& pot,
                          double radius, int quadrature_points,
                          std::span<const double> interface_azimuths,
                          double capture_width = 10.0);

struct ConvergenceRow {
  double R = 0.0;
  double strip_half_width = 0.0;  // R sin psi1
  double cap_abs = 0.0;
  double cap_bound = 0.0;
  std::vector<double> offstrip_magnitude;  // per slice
  std::vector<Vec3> strip;                 // per slice
  std::vector<Vec3> slice_total;           // strip + offstrip per slice
  double total_magnitude = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  std::vector<FluxDecomposition> decompositions;  // one per radius
  double cap_exponent = 0.0;   // log-log slope of cap_bound against R
  double offstrip_rate = 0.0;  // slope of log offstrip against R sin psi1
  bool slice_differences_shrink = true;
};

ConvergenceStudy convergence_study(const PlanarSampler& sampler,
                                   const Potential& pot,
                                   const AngleSchedule& schedule,
                                   std::span<const double> interface_azimuths,
                                   std::span<const double> radii,
                                   double resolution = 16.0, double delta = 0.0,
                                   int workers = 1);

}  // namespace triodlab
