#pragma once

#include <span>

#include "triodlab/grid_field.hpp"
#include "triodlab/sampler.hpp"

namespace triodlab {

/// T_ij = u_,i . u_,j - delta_ij (1/2 |grad u|^2 + W(u)) for the
/// extruded planar field (u_,3 = 0). Symmetric by construction.
Mat3 stress_tensor(const PlanarSampler& sampler, const Potential& pot,
                   double x1, double x2);

/// Same tensor assembled from a single value/gradient triple.
Mat3 stress_tensor_from(const Vec3& du1, const Vec3& du2, double w);

struct DivergenceReport {
  double sup_divergence = 0.0;    // sup |div_h T|
  double sup_identity_gap = 0.0;  // sup |div_h T - (grad u)^T (lap_h u - grad W)|
  int nodes = 0;
};

/// Central-difference divergence of the nodal stress field against the
/// equation's right-hand side, over the interior (two-node margin so the
/// nested stencils fit).
DivergenceReport divergence_residual(const GridField& field);

/// Per-point check on a sampler grid: returns the two sup norms using
/// step h stencils centered at the given points.
DivergenceReport divergence_residual_sampled(const PlanarSampler& sampler,
                                             const Potential& pot,
                                             std::span<const Vec2> points,
                                             double h);

/// Tensorial transformation audit: Q T(x) Q^T against the tensor
/// computed natively in the rotated frame (rotated sampler, rotated
/// differentiation directions). Q must be orthogonal to 1e-12 and keep
/// the extrusion axis (Q e3 = +-e3); returns the max componentwise
/// deviation over the sample points.
double rotate_check(const PlanarSampler& sampler, const Potential& pot,
                    const Mat3& q, std::span<const Vec2> points);

/// Crude pointwise bound used by the flux cap estimate:
/// |T|_F <= 2 (1/2 |grad u|^2 + W) + |grad u|^2.
double frobenius_bound(const Vec3& du1, const Vec3& du2, double w);

}  // namespace triodlab
