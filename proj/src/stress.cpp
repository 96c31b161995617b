#include "triodlab/stress.hpp"

#include <cmath>
#include <stdexcept>

namespace triodlab {

Mat3 stress_tensor_from(const Vec3& du1, const Vec3& du2, double w) {
  const double g11 = du1.dot(du1);
  const double g12 = du1.dot(du2);
  const double g22 = du2.dot(du2);
  const double e = 0.5 * (g11 + g22) + w;
  Mat3 t;
  t(0, 0) = g11 - e;
  t(0, 1) = g12;
  t(1, 0) = g12;
  t(1, 1) = g22 - e;
  t(2, 2) = -e;  // u_,3 = 0 under extrusion
  return t;
}

Mat3 stress_tensor(const PlanarSampler& sampler, const Potential& pot,
                   double x1, double x2) {
  const auto du = sampler.gradient(x1, x2);
  return stress_tensor_from(du[0], du[1], pot.value(sampler.value(x1, x2)));
}

DivergenceReport divergence_residual(const GridField& field) {
  DivergenceReport report;
  const int n = field.n;
  if (n < 5) throw std::invalid_argument("divergence_residual: grid too small");
  const double h = field.h;
  const Potential& pot = *field.potential;

  // Nodal tensors from central differences of u.
  auto tensor_at = [&](int ix, int iy) {
    const Vec3 du1 = (field.at(ix + 1, iy) - field.at(ix - 1, iy)) * (0.5 / h);
    const Vec3 du2 = (field.at(ix, iy + 1) - field.at(ix, iy - 1)) * (0.5 / h);
    return stress_tensor_from(du1, du2, pot.value(field.at(ix, iy)));
  };

  for (int iy = 2; iy + 2 < n; ++iy)
    for (int ix = 2; ix + 2 < n; ++ix) {
      const Mat3 te = tensor_at(ix + 1, iy), tw = tensor_at(ix - 1, iy);
      const Mat3 tn = tensor_at(ix, iy + 1), ts = tensor_at(ix, iy - 1);
      // (div T)_i = d T_i1 / dx1 + d T_i2 / dx2 (extruded: d/dx3 = 0).
      Vec3 div;
      div.x = (te(0, 0) - tw(0, 0) + tn(0, 1) - ts(0, 1)) * (0.5 / h);
      div.y = (te(1, 0) - tw(1, 0) + tn(1, 1) - ts(1, 1)) * (0.5 / h);
      div.z = (te(2, 0) - tw(2, 0) + tn(2, 1) - ts(2, 1)) * (0.5 / h);

      const Vec3& c = field.at(ix, iy);
      const Vec3 lap = (field.at(ix + 1, iy) + field.at(ix - 1, iy) +
                        field.at(ix, iy + 1) + field.at(ix, iy - 1) - c * 4.0) *
                       (1.0 / (h * h));
      const Vec3 r = lap - pot.gradient(c);
      const Vec3 du1 = (field.at(ix + 1, iy) - field.at(ix - 1, iy)) * (0.5 / h);
      const Vec3 du2 = (field.at(ix, iy + 1) - field.at(ix, iy - 1)) * (0.5 / h);
      const Vec3 rhs{du1.dot(r), du2.dot(r), 0.0};

      report.sup_divergence = std::max(report.sup_divergence, div.max_abs());
      report.sup_identity_gap =
          std::max(report.sup_identity_gap, (div - rhs).max_abs());
      ++report.nodes;
    }
  return report;
}

DivergenceReport divergence_residual_sampled(const PlanarSampler& sampler,
                                             const Potential& pot,
                                             std::span<const Vec2> points,
                                             double h) {
  DivergenceReport report;
  auto tensor_at = [&](double x, double y) {
    const Vec3 du1 = (sampler.value(x + h, y) - sampler.value(x - h, y)) * (0.5 / h);
    const Vec3 du2 = (sampler.value(x, y + h) - sampler.value(x, y - h)) * (0.5 / h);
    return stress_tensor_from(du1, du2, pot.value(sampler.value(x, y)));
  };

  for (const Vec2& p : points) {
    const Mat3 te = tensor_at(p.x + h, p.y), tw = tensor_at(p.x - h, p.y);
    const Mat3 tn = tensor_at(p.x, p.y + h), ts = tensor_at(p.x, p.y - h);
    Vec3 div;
    div.x = (te(0, 0) - tw(0, 0) + tn(0, 1) - ts(0, 1)) * (0.5 / h);
    div.y = (te(1, 0) - tw(1, 0) + tn(1, 1) - ts(1, 1)) * (0.5 / h);
    div.z = (te(2, 0) - tw(2, 0) + tn(2, 1) - ts(2, 1)) * (0.5 / h);

    const Vec3 c = sampler.value(p.x, p.y);
    const Vec3 lap = (sampler.value(p.x + h, p.y) + sampler.value(p.x - h, p.y) +
                      sampler.value(p.x, p.y + h) + sampler.value(p.x, p.y - h) -
                      c * 4.0) *
                     (1.0 / (h * h));
    const Vec3 r = lap - pot.gradient(c);
    const Vec3 du1 = (sampler.value(p.x + h, p.y) - sampler.value(p.x - h, p.y)) * (0.5 / h);
    const Vec3 du2 = (sampler.value(p.x, p.y + h) - sampler.value(p.x, p.y - h)) * (0.5 / h);
    const Vec3 rhs{du1.dot(r), du2.dot(r), 0.0};

    report.sup_divergence = std::max(report.sup_divergence, div.max_abs());
    report.sup_identity_gap =
        std::max(report.sup_identity_gap, (div - rhs).max_abs());
    ++report.nodes;
  }
  return report;
}

double rotate_check(const PlanarSampler& sampler, const Potential& pot,
                    const Mat3& q, std::span<const Vec2> points) {
  const Mat3 gram = q.transpose().matmul(q) - Mat3::identity();
  if (gram.max_abs() > 1e-12)
    throw std::invalid_argument("rotate_check: Q is not orthogonal");
  if (std::abs(std::abs(q(2, 2)) - 1.0) > 1e-12 ||
      std::abs(q(0, 2)) > 1e-12 || std::abs(q(1, 2)) > 1e-12 ||
      std::abs(q(2, 0)) > 1e-12 || std::abs(q(2, 1)) > 1e-12)
    throw std::invalid_argument(
        "rotate_check: Q must preserve the extrusion axis for planar fields");

  // Rotated sampler: u'(y) = u(Q^T y) restricted to the plane.
  const Mat3 qt = q.transpose();
  AnalyticSampler rotated(
      [&sampler, qt](double y1, double y2) {
        const Vec3 x = qt.matvec({y1, y2, 0.0});
        return sampler.value(x.x, x.y);
      });

  // Both frames differentiate by the same central-difference rule so the
  // identity Q = I closes exactly.
  const double step = sampler.gradient_step();
  double worst = 0.0;
  for (const Vec2& p : points) {
    const Vec3 du1 =
        (sampler.value(p.x + step, p.y) - sampler.value(p.x - step, p.y)) *
        (0.5 / step);
    const Vec3 du2 =
        (sampler.value(p.x, p.y + step) - sampler.value(p.x, p.y - step)) *
        (0.5 / step);
    const Mat3 native =
        stress_tensor_from(du1, du2, pot.value(sampler.value(p.x, p.y)));
    const Mat3 transformed = q.matmul(native).matmul(qt);

    const Vec3 y = q.matvec({p.x, p.y, 0.0});
    const Vec3 dv1 =
        (rotated.value(y.x + step, y.y) - rotated.value(y.x - step, y.y)) *
        (0.5 / step);
    const Vec3 dv2 =
        (rotated.value(y.x, y.y + step) - rotated.value(y.x, y.y - step)) *
        (0.5 / step);
    const Mat3 in_rotated_frame =
        stress_tensor_from(dv1, dv2, pot.value(rotated.value(y.x, y.y)));

    worst = std::max(worst, (transformed - in_rotated_frame).max_abs());
  }
  return worst;
}

double frobenius_bound(const Vec3& du1, const Vec3& du2, double w) {
  const double grad2 = du1.norm2() + du2.norm2();
  return 2.0 * (0.5 * grad2 + w) + grad2;
}

}  // namespace triodlab
