#include "triodlab/triod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "triodlab/numerics.hpp"

namespace triodlab {

namespace {

double wrap_2pi(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace

TriodAnsatz::TriodAnsatz(
    std::shared_ptr<const Potential> potential,
    std::array<std::shared_ptr<const ConnectionPath>, 3> paths,
    std::array<double, 3> azimuths, double tube_half_width,
    double core_blend_radius)
    : potential_(std::move(potential)),
      tube_half_width_(tube_half_width),
      core_blend_radius_(core_blend_radius) {
  if (!potential_) throw std::invalid_argument("TriodAnsatz: null potential");
  for (const auto& p : paths)
    if (!p) throw std::invalid_argument("TriodAnsatz: null connection path");

  std::array<int, 3> order = {0, 1, 2};
  std::array<double, 3> wrapped;
  for (int k = 0; k < 3; ++k) wrapped[k] = wrap_2pi(azimuths[k]);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return wrapped[a] < wrapped[b]; });

  const double min_separation = 10.0 * std::numbers::pi / 180.0;
  for (int k = 0; k < 3; ++k) {
    const double a = wrapped[order[k]];
    const double b = wrapped[order[(k + 1) % 3]];
    const double gap = wrap_2pi(b - a);
    if (gap < min_separation) {
      std::ostringstream msg;
      msg << "TriodAnsatz: interface rays closer than 10 degrees apart (gap "
          << gap * 180.0 / std::numbers::pi << " deg)";
      throw std::invalid_argument(msg.str());
    }
  }

  // The region of the sector after ray k (counterclockwise) is the well
  // its profile shares with the next ray's profile.
  auto pair_of = [&](int k) {
    const auto& p = *paths[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    return std::array<int, 2>{p.endpoint_i, p.endpoint_j};
  };
  auto shared_label = [](std::array<int, 2> a, std::array<int, 2> b) {
    for (int x : a)
      for (int y : b)
        if (x == y) return x;
    return -1;
  };

  for (int k = 0; k < 3; ++k) {
    const auto cur = pair_of(k);
    const auto nxt = pair_of((k + 1) % 3);
    const int ccw = shared_label(cur, nxt);
    if (ccw < 0)
      throw std::invalid_argument(
          "TriodAnsatz: adjacent interface profiles share no well label");
    const int cw = (cur[0] == ccw) ? cur[1] : cur[0];
    if (cw == ccw)
      throw std::invalid_argument("TriodAnsatz: degenerate interface pair");

    InterfaceRay& ray = rays_[static_cast<std::size_t>(k)];
    ray.azimuth = wrapped[order[static_cast<std::size_t>(k)]];
    ray.region_cw = cw;
    ray.region_ccw = ccw;
    ray.profile = paths[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    // Solved path runs endpoint_i (eta=-L) -> endpoint_j (+L); the ray
    // wants cw at eta=-inf.
    ray.profile_reversed = (ray.profile->endpoint_i != cw);
  }

  // Consistency: the three sector labels must be distinct.
  if (rays_[0].region_ccw == rays_[1].region_ccw ||
      rays_[1].region_ccw == rays_[2].region_ccw ||
      rays_[0].region_ccw == rays_[2].region_ccw)
    throw std::invalid_argument("TriodAnsatz: sector labels are not distinct");

  Vec3 centroid{};
  for (const Vec3& a : potential_->minima()) centroid += a;
  core_value_ = centroid * (1.0 / static_cast<double>(potential_->minima().size()));
}

int TriodAnsatz::sector_region(double theta) const {
  const double t = wrap_2pi(theta);
  for (int k = 0; k < 3; ++k) {
    const double a = rays_[static_cast<std::size_t>(k)].azimuth;
    const double b = rays_[static_cast<std::size_t>((k + 1) % 3)].azimuth;
    const double span = wrap_2pi(b - a);
    if (wrap_2pi(t - a) < span) return rays_[static_cast<std::size_t>(k)].region_ccw;
  }
  return rays_[0].region_ccw;  // theta == a ray azimuth exactly
}

int TriodAnsatz::ray_index_for_pair(int i, int j) const {
  for (int k = 0; k < 3; ++k) {
    const auto& r = rays_[static_cast<std::size_t>(k)];
    if ((r.region_cw == i && r.region_ccw == j) ||
        (r.region_cw == j && r.region_ccw == i))
      return k;
  }
  throw std::invalid_argument("TriodAnsatz: no interface for requested pair");
}

Vec3 TriodAnsatz::value(double x1, double x2) const {
  const double theta = std::atan2(x2, x1);
  const double rho = std::hypot(x1, x2);

  // Locate the sector and its two bounding rays.
  int k_cw = 0;
  for (int k = 0; k < 3; ++k) {
    const double a = rays_[static_cast<std::size_t>(k)].azimuth;
    const double b = rays_[static_cast<std::size_t>((k + 1) % 3)].azimuth;
    if (wrap_2pi(theta - a) < wrap_2pi(b - a)) {
      k_cw = k;
      break;
    }
  }
  const InterfaceRay& lower = rays_[static_cast<std::size_t>(k_cw)];
  const InterfaceRay& upper = rays_[static_cast<std::size_t>((k_cw + 1) % 3)];
  const int region = lower.region_ccw;
  const Vec3 a = potential_->minima()[static_cast<std::size_t>(region)];

  // Well value plus the two profile corrections; each correction decays
  // exponentially away from its ray.
  Vec3 u = a;
  u += lower.profile_value(lower.signed_distance(x1, x2)) - a;
  u += upper.profile_value(upper.signed_distance(x1, x2)) - a;

  if (rho < core_blend_radius_) {
    const double mu = smoothstep(rho / core_blend_radius_);
    u = u * mu + core_value_ * (1.0 - mu);
  }
  return u;
}

}  // namespace triodlab
