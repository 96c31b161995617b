#pragma once

#include <array>
#include <memory>
#include <span>

#include "triodlab/connection.hpp"
#include "triodlab/potential.hpp"
#include "triodlab/vec.hpp"

namespace triodlab {

/// One interface ray of the junction: a half-line from the origin with
/// the regions on its two sides and the oriented connection profile
/// across it. The profile argument is the signed perpendicular distance
/// to the ray's line, positive on the counterclockwise side.
struct InterfaceRay {
  double azimuth = 0.0;  // radians
  int region_cw = 0;     // well index on the clockwise side (eta < 0)
  int region_ccw = 0;    // well index on the counterclockwise side (eta > 0)
  std::shared_ptr<const ConnectionPath> profile;
  bool profile_reversed = false;  // true when profile runs ccw -> cw

  Vec2 direction() const { return {std::cos(azimuth), std::sin(azimuth)}; }
  Vec2 normal() const { return {-std::sin(azimuth), std::cos(azimuth)}; }

  double signed_distance(double x1, double x2) const {
    return x1 * normal().x + x2 * normal().y;
  }

  Vec3 profile_value(double eta) const {
    return sample_path(*profile, profile_reversed ? -eta : eta);
  }

  Vec3 profile_derivative(double eta) const {
    const Vec3 d = sample_path_derivative(*profile, profile_reversed ? -eta : eta);
    return profile_reversed ? -d : d;
  }

  /// Distance from a point to the ray (half-line).
  double distance_to_ray(double x1, double x2) const {
    const Vec2 d = direction();
    const double t = x1 * d.x + x2 * d.y;
    if (t <= 0.0) return std::hypot(x1, x2);
    return std::abs(signed_distance(x1, x2));
  }
};

/// The sharp-triod field ansatz: inside each sector the well value plus
/// the connection-profile corrections of the two bounding rays, with a
/// short radial blend toward the well centroid at the junction core.
/// Far from the core this equals the asymptotic structure the far-field
/// evaluation assumes: the profile inside each interface tube, the pure
/// well value elsewhere.
class TriodAnsatz {
 public:
  /// paths[k] is the connection for the interface at azimuths[k]; its
  /// endpoint labels identify the pair. Azimuths need not be sorted but
  /// must be pairwise >= 10 degrees apart and label-consistent (each
  /// sector between adjacent rays is bounded by profiles sharing the
  /// sector's well).
  TriodAnsatz(std::shared_ptr<const Potential> potential,
              std::array<std::shared_ptr<const ConnectionPath>, 3> paths,
              std::array<double, 3> azimuths, double tube_half_width = 10.0,
              double core_blend_radius = 5.0);

  Vec3 value(double x1, double x2) const;

  const std::array<InterfaceRay, 3>& rays() const { return rays_; }
  const Potential& potential() const { return *potential_; }
  std::shared_ptr<const Potential> potential_ptr() const { return potential_; }
  double tube_half_width() const { return tube_half_width_; }
  double core_blend_radius() const { return core_blend_radius_; }

  /// Well index of the sector containing the direction theta.
  int sector_region(double theta) const;

  /// Index into rays() of the interface separating wells i and j.
  int ray_index_for_pair(int i, int j) const;

 private:
  std::shared_ptr<const Potential> potential_;
  std::array<InterfaceRay, 3> rays_;  // sorted by azimuth
  Vec3 core_value_;
  double tube_half_width_;
  double core_blend_radius_;
};

}  // namespace triodlab
