#pragma once

// Shared builders for the test suites. Heavier artifacts (relaxed
// fields) are built once and cached behind function-local statics.

#include <array>
#include <cmath>
#include <memory>
#include <numbers>

#include "triodlab/field_checks.hpp"
#include "triodlab/flux.hpp"
#include "triodlab/grid_field.hpp"
#include "triodlab/potential.hpp"
#include "triodlab/sampler.hpp"

namespace triodlab::testing {

inline constexpr double kSigmaQuartic = 0.9428090415820634;  // 2 sqrt(2) / 3

inline std::shared_ptr<const Potential> equilateral_potential() {
  static auto pot = std::make_shared<TripleWellPotential>(
      TripleWellPotential::equilateral());
  return pot;
}

inline std::shared_ptr<const Potential> quartic_potential() {
  static auto pot = std::make_shared<QuarticDoubleWell>();
  return pot;
}

/// Applies the order-3 rotation of order-parameter space to a solved
/// path, relabeling its endpoints; with the equilateral wells this maps
/// the (i, j) connection onto (i+1, j+1) exactly.
inline ConnectionPath rotate_path(const ConnectionPath& path, int shift) {
  const Mat3 q = Mat3::rotation_z(2.0 * std::numbers::pi / 3.0 *
                                  static_cast<double>(shift));
  ConnectionPath out = path;
  for (Vec3& v : out.values) v = q.matvec(v);
  out.endpoint_i = (path.endpoint_i + shift) % 3;
  out.endpoint_j = (path.endpoint_j + shift) % 3;
  return out;
}

/// Exactly 120-degree-coherent profiles for the three interfaces,
/// derived from a single solve.
inline std::array<std::shared_ptr<const ConnectionPath>, 3>
symmetric_paths_rotated(int samples = 401) {
  ConnectionParams params;
  params.samples = samples;
  const auto base = solve_connection(equilateral_potential(), 0, 1, params);
  return {std::make_shared<ConnectionPath>(base),
          std::make_shared<ConnectionPath>(rotate_path(base, 1)),
          std::make_shared<ConnectionPath>(rotate_path(base, 2))};
}

inline std::array<double, 3> symmetric_azimuths() {
  const double deg = std::numbers::pi / 180.0;
  return {90.0 * deg, 210.0 * deg, 330.0 * deg};
}

/// Relaxed symmetric triod on a small grid (h = 0.2, extent 12.8).
inline const FarField& symmetric_farfield_small() {
  static FarField field = [] {
    FarField f = init_triod(equilateral_potential(), symmetric_paths_rotated(),
                            symmetric_azimuths(), GridParams{0.2, 12.8});
    RelaxParams rp;
    rp.max_steps = 6000;
    rp.tolerance = 4e-3;
    relax(f, rp);
    return f;
  }();
  return field;
}

/// Smooth, exactly 120-degree-equivariant three-phase model field: a
/// log-sum-exp blend of the wells driven by linear score functions.
/// Not a solution of the system; used for frame-covariance checks where
/// exact symmetry matters more than the equation.
inline AnalyticSampler equivariant_model_sampler() {
  return AnalyticSampler([](double x, double y) {
    const auto minima = equilateral_potential()->minima();
    double score[3], wsum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double az = (90.0 + 120.0 * k) * std::numbers::pi / 180.0;
      score[k] = x * std::cos(az) + y * std::sin(az);
    }
    const double top = std::max({score[0], score[1], score[2]});
    Vec3 u{};
    for (int k = 0; k < 3; ++k) {
      const double w = std::exp(score[k] - top);
      u += minima[static_cast<std::size_t>(k)] * w;
      wsum += w;
    }
    return u * (1.0 / wsum);
  });
}

/// Extruded analytic tanh profile of the quartic well; the interface is
/// the line x1 = 0 and eta = x1.
inline AnalyticSampler tanh_profile_sampler() {
  const double s = 1.0 / std::sqrt(2.0);
  return AnalyticSampler(
      [s](double x1, double) {
        return Vec3{std::tanh(x1 * s), 0.0, 0.0};
      },
      [s](double x1, double) -> std::array<Vec3, 2> {
        const double c = std::cosh(x1 * s);
        return {Vec3{s / (c * c), 0.0, 0.0}, Vec3{}};
      });
}

}  // namespace triodlab::testing
