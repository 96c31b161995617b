#include "triodlab/field_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "triodlab/numerics.hpp"

namespace triodlab {

namespace {

DecayFit fit_binned(const std::vector<double>& d, const std::vector<double>& v,
                    double d_min, double d_max, int bins, int min_bin_samples) {
  DecayFit fit;
  fit.samples = static_cast<int>(d.size());
  std::vector<double> bin_x, bin_y;
  const double width = (d_max - d_min) / static_cast<double>(bins);
  for (int b = 0; b < bins; ++b) {
    const double lo = d_min + width * b, hi = lo + width;
    double sum = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < d.size(); ++k)
      if (d[k] >= lo && d[k] < hi) {
        sum += v[k];
        ++count;
      }
    if (count < min_bin_samples) {
      fit.skipped_bins.push_back(b);
      continue;
    }
    bin_x.push_back(lo + 0.5 * width);
    bin_y.push_back(sum / count);
  }
  fit.bins_used = static_cast<int>(bin_x.size());
  if (fit.bins_used >= 2) {
    const LineFit lf = linear_fit(bin_x, bin_y);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
  }
  return fit;
}

}  // namespace

Hypothesis1Report check_decay(const GridField& g, const RegionFn& region_of,
                              const BoundaryDistanceFn& boundary_distance,
                              double d_min, double d_max, int bins,
                              int min_bin_samples) {
  const auto minima = g.potential->minima();
  std::vector<double> dist_u, log_u, dist_g, log_g;
  double max_dev = 0.0;

  for (int iy = 1; iy + 1 < g.n; ++iy)
    for (int ix = 1; ix + 1 < g.n; ++ix) {
      const double x = g.coord(ix), y = g.coord(iy);
      const int region = region_of(x, y);
      const double d = boundary_distance(x, y, region);
      if (d < d_min || d >= d_max) continue;

      const Vec3 dev = g.at(ix, iy) - minima[static_cast<std::size_t>(region)];
      max_dev = std::max(max_dev, dev.norm());
      if (dev.norm() > 0.0) {
        dist_u.push_back(d);
        log_u.push_back(std::log(dev.norm()));
      }
      const Vec3 gx = (g.at(ix + 1, iy) - g.at(ix - 1, iy)) * (0.5 / g.h);
      const Vec3 gy = (g.at(ix, iy + 1) - g.at(ix, iy - 1)) * (0.5 / g.h);
      const double grad_norm = std::sqrt(gx.norm2() + gy.norm2());
      if (grad_norm > 0.0) {
        dist_g.push_back(d);
        log_g.push_back(std::log(grad_norm));
      }
    }

  Hypothesis1Report report;
  report.max_value_deviation = max_dev;
  if (max_dev < 1e-12) {
    report.value_fit.degenerate = true;
    report.gradient_fit.degenerate = true;
    return report;
  }
  report.value_fit =
      fit_binned(dist_u, log_u, d_min, d_max, bins, min_bin_samples);
  report.gradient_fit =
      fit_binned(dist_g, log_g, d_min, d_max, bins, min_bin_samples);
  return report;
}

Hypothesis1Report check_hypothesis1(const FarField& field, const PhaseMap& pm,
                                    double d_min, double d_max, int bins,
                                    int min_bin_samples) {
  const GridField& g = field.grid();
  const auto& rays = field.ansatz().rays();
  auto region_of = [&](double x, double y) {
    const int ix = static_cast<int>(std::lround((x + g.extent) / g.h));
    const int iy = static_cast<int>(std::lround((y + g.extent) / g.h));
    return pm.label(ix, iy);
  };
  auto boundary_distance = [&](double x, double y, int region) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& ray : rays)
      if (ray.region_cw == region || ray.region_ccw == region)
        d = std::min(d, ray.distance_to_ray(x, y));
    return d;
  };
  return check_decay(g, region_of, boundary_distance, d_min, d_max, bins,
                     min_bin_samples);
}

bool Hypothesis2Report::monotone_from(std::size_t onset) const {
  for (std::size_t k = onset; k + 1 < rows.size(); ++k) {
    if (rows[k + 1].sup_value_dev > rows[k].sup_value_dev) return false;
    if (rows[k + 1].sup_normal_deriv_dev > rows[k].sup_normal_deriv_dev)
      return false;
    if (rows[k + 1].sup_tangential_deriv > rows[k].sup_tangential_deriv)
      return false;
  }
  return true;
}

Hypothesis2Report check_profile_convergence(
    const PlanarSampler& sampler, Vec2 dir, Vec2 nor, const ProfileFn& profile,
    const ProfileFn& profile_derivative, double safe_extent, double step,
    std::span<const double> distances, double probe_half_length) {
  Hypothesis2Report report;
  report.probe_half_length = probe_half_length;

  for (double d : distances) {
    ProfileDeviation row;
    row.distance = d;
    const int m = static_cast<int>(std::floor(probe_half_length / step));
    for (int k = -m; k <= m; ++k) {
      const double eta = step * static_cast<double>(k);
      const double px = d * dir.x + eta * nor.x;
      const double py = d * dir.y + eta * nor.y;
      if (std::max(std::abs(px), std::abs(py)) + 2.0 * step > safe_extent) {
        row.truncated = true;
        continue;
      }
      const Vec3 u = sampler.value(px, py);
      row.sup_value_dev = std::max(row.sup_value_dev, (u - profile(eta)).norm());

      const Vec3 du_eta = (sampler.value(px + step * nor.x, py + step * nor.y) -
                           sampler.value(px - step * nor.x, py - step * nor.y)) *
                          (0.5 / step);
      row.sup_normal_deriv_dev = std::max(
          row.sup_normal_deriv_dev, (du_eta - profile_derivative(eta)).norm());

      const Vec3 du_along = (sampler.value(px + step * dir.x, py + step * dir.y) -
                             sampler.value(px - step * dir.x, py - step * dir.y)) *
                            (0.5 / step);
      row.sup_tangential_deriv =
          std::max(row.sup_tangential_deriv, du_along.norm());
    }
    report.rows.push_back(row);
  }
  return report;
}

Hypothesis2Report check_hypothesis2(const FarField& field, int ray_index,
                                    std::span<const double> distances,
                                    double probe_half_length) {
  const auto& ray = field.ansatz().rays()[static_cast<std::size_t>(ray_index)];
  Hypothesis2Report report = check_profile_convergence(
      field, ray.direction(), ray.normal(),
      [&ray](double eta) { return ray.profile_value(eta); },
      [&ray](double eta) { return ray.profile_derivative(eta); },
      field.grid().extent, field.grid().h, distances, probe_half_length);
  report.ray_index = ray_index;
  return report;
}

}  // namespace triodlab
