#pragma once

#include <functional>
#include <span>
#include <vector>

#include "triodlab/grid_field.hpp"

namespace triodlab {

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;  // of the log-linear fit
  int samples = 0;
  int bins_used = 0;
  std::vector<int> skipped_bins;
  bool degenerate = false;  // deviations at machine zero, fit skipped
};

/// Exponential-decay audit in the region interiors: log |u - a_i| and
/// log |grad u| fitted against the distance to the region boundary.
struct Hypothesis1Report {
  DecayFit value_fit;
  DecayFit gradient_fit;
  double max_value_deviation = 0.0;  // sup |u - a_i| over the sampled points
};

Hypothesis1Report check_hypothesis1(const FarField& field, const PhaseMap& pm,
                                    double d_min = 2.0, double d_max = 8.0,
                                    int bins = 12, int min_bin_samples = 5);

/// Generic core of the decay audit: the caller supplies the region label
/// and the distance to that region's boundary per node.
using RegionFn = std::function<int(double, double)>;
using BoundaryDistanceFn = std::function<double(double, double, int)>;

Hypothesis1Report check_decay(const GridField& grid, const RegionFn& region_of,
                              const BoundaryDistanceFn& boundary_distance,
                              double d_min, double d_max, int bins,
                              int min_bin_samples);

struct ProfileDeviation {
  double distance = 0.0;          // along the interface ray from the junction
  double sup_value_dev = 0.0;     // sup |u - U(eta)| over the probe line
  double sup_normal_deriv_dev = 0.0;   // sup |d_eta u - U'(eta)|
  double sup_tangential_deriv = 0.0;   // sup |d_along u|
  bool truncated = false;         // probe line clipped at the grid edge
};

/// Convergence of transverse profiles toward the interface connection:
/// probes perpendicular lines at increasing distances along one ray.
struct Hypothesis2Report {
  int ray_index = 0;
  double probe_half_length = 0.0;
  std::vector<ProfileDeviation> rows;

  /// True when every reported deviation sequence is non-increasing
  /// starting from the given row.
  bool monotone_from(std::size_t onset) const;
};

Hypothesis2Report check_hypothesis2(const FarField& field, int ray_index,
                                    std::span<const double> distances,
                                    double probe_half_length);

/// Generic core: probes any sampler against an arbitrary transverse
/// profile along the ray with the given direction/normal frame.
using ProfileFn = std::function<Vec3(double)>;

Hypothesis2Report check_profile_convergence(
    const PlanarSampler& sampler, Vec2 direction, Vec2 normal,
    const ProfileFn& profile, const ProfileFn& profile_derivative,
    double safe_extent, double step, std::span<const double> distances,
    double probe_half_length);

}  // namespace triodlab
