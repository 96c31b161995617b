#include "triodlab/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "triodlab/numerics.hpp"

namespace triodlab {

Vec3 GridField::bilinear(double x1, double x2) const {
  const double gx = std::clamp((x1 + extent) / h, 0.0, static_cast<double>(n - 1));
  const double gy = std::clamp((x2 + extent) / h, 0.0, static_cast<double>(n - 1));
  int ix = std::min(static_cast<int>(gx), n - 2);
  int iy = std::min(static_cast<int>(gy), n - 2);
  if (n == 1) return values[0];
  const double tx = gx - static_cast<double>(ix);
  const double ty = gy - static_cast<double>(iy);
  const Vec3& v00 = at(ix, iy);
  const Vec3& v10 = at(ix + 1, iy);
  const Vec3& v01 = at(ix, iy + 1);
  const Vec3& v11 = at(ix + 1, iy + 1);
  return v00 * ((1 - tx) * (1 - ty)) + v10 * (tx * (1 - ty)) +
         v01 * ((1 - tx) * ty) + v11 * (tx * ty);
}

double GridField::compute_residual() const {
  const double inv_h2 = 1.0 / (h * h);
  double sup = 0.0;
  for (int iy = 1; iy + 1 < n; ++iy)
    for (int ix = 1; ix + 1 < n; ++ix) {
      const Vec3& c = at(ix, iy);
      const Vec3 lap = (at(ix + 1, iy) + at(ix - 1, iy) + at(ix, iy + 1) +
                        at(ix, iy - 1) - c * 4.0) *
                       inv_h2;
      const double r = (lap - potential->gradient(c)).max_abs();
      if (std::isnan(r)) return r;  // a NaN must not vanish under max()
      sup = std::max(sup, r);
    }
  return sup;
}

double GridField::discrete_energy() const {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      double t = h * h * potential->value(at(ix, iy));
      if (ix + 1 < n) t += 0.5 * (at(ix + 1, iy) - at(ix, iy)).norm2();
      if (iy + 1 < n) t += 0.5 * (at(ix, iy + 1) - at(ix, iy)).norm2();
      terms.push_back(t);
    }
  return pairwise_sum(terms);
}

double GridField::sup_norm() const {
  double sup = 0.0;
  for (const Vec3& v : values) {
    const double r = v.norm();
    if (std::isnan(r)) return r;
    sup = std::max(sup, r);
  }
  return sup;
}

FarField::FarField(GridField grid, TriodAnsatz ansatz)
    : grid_(std::move(grid)), ansatz_(std::move(ansatz)) {
  // Probe the seam between interpolation and the ansatz along rays
  // crossing the grid boundary.
  const double eps = 1e-9;
  const double X = grid_.extent;
  double worst = 0.0;
  for (int k = 0; k < 256; ++k) {
    const double theta =
        2.0 * std::numbers::pi * static_cast<double>(k) / 256.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double scale = X / std::max(std::abs(c), std::abs(s));
    const double r_in = scale - eps;
    const double r_out = scale + eps;
    const Vec3 inside = grid_.bilinear(r_in * c, r_in * s);
    const Vec3 outside = ansatz_.value(r_out * c, r_out * s);
    worst = std::max(worst, (inside - outside).max_abs());
  }
  blending_tolerance_ = worst;
}

Vec3 FarField::value(double x1, double x2) const {
  const double X = grid_.extent;
  if (std::abs(x1) <= X && std::abs(x2) <= X) return grid_.bilinear(x1, x2);
  return ansatz_.value(x1, x2);
}

FarField init_triod(std::shared_ptr<const Potential> potential,
                    std::array<std::shared_ptr<const ConnectionPath>, 3> paths,
                    std::array<double, 3> azimuths, const GridParams& grid,
                    double tube_half_width, double core_blend_radius) {
  if (grid.spacing <= 0.0 || grid.extent <= 0.0)
    throw std::invalid_argument("init_triod: nonpositive grid parameter");
  TriodAnsatz ansatz(potential, paths, azimuths, tube_half_width,
                     core_blend_radius);
  GridField field;
  field.h = grid.spacing;
  field.extent = grid.extent;
  field.n = static_cast<int>(std::lround(2.0 * grid.extent / grid.spacing)) + 1;
  // Snap the extent so the nodes land exactly on [-X, X].
  field.extent = 0.5 * field.h * static_cast<double>(field.n - 1);
  field.potential = potential;
  field.values.resize(static_cast<std::size_t>(field.n) *
                      static_cast<std::size_t>(field.n));
  for (int iy = 0; iy < field.n; ++iy)
    for (int ix = 0; ix < field.n; ++ix)
      field.at(ix, iy) = ansatz.value(field.coord(ix), field.coord(iy));
  field.residual_norm = field.compute_residual();
  return FarField(std::move(field), std::move(ansatz));
}

namespace {

void sweep_rows(const GridField& f, std::vector<Vec3>& out, double tau,
                int row_begin, int row_end) {
  const double inv_h2 = 1.0 / (f.h * f.h);
  const Potential& pot = *f.potential;
  for (int iy = row_begin; iy < row_end; ++iy)
    for (int ix = 1; ix + 1 < f.n; ++ix) {
      const Vec3& c = f.at(ix, iy);
      const Vec3 lap = (f.at(ix + 1, iy) + f.at(ix - 1, iy) +
                        f.at(ix, iy + 1) + f.at(ix, iy - 1) - c * 4.0) *
                       inv_h2;
      out[f.index(ix, iy)] = c + (lap - pot.gradient(c)) * tau;
    }
}

}  // namespace

RelaxReport relax(FarField& field, const RelaxParams& params) {
  GridField& f = field.grid();
  if (params.max_steps < 0 || params.tolerance <= 0.0)
    throw std::invalid_argument("relax: bad parameters");

  RelaxReport report;

  double tau = params.time_step;
  if (tau <= 0.0) {
    // Stability guard: sample the Hessian bound over a node subset.
    std::vector<Vec3> sample;
    for (std::size_t k = 0; k < f.values.size(); k += 17)
      sample.push_back(f.values[k]);
    for (const Vec3& a : f.potential->minima()) sample.push_back(a);
    const double lam = max_hessian_norm(*f.potential, sample);
    tau = f.h * f.h / (4.0 + f.h * f.h * (lam + 1.0));
  }
  report.time_step = tau;

  const double initial_sup = std::max(1.0, f.sup_norm());
  const int check = std::max(1, params.check_interval);
  const int workers = std::max(1, params.workers);

  std::vector<Vec3> next(f.values);
  double residual = f.compute_residual();
  report.energy_history.push_back(f.discrete_energy());

  int step = 0;
  while ((std::isnan(residual) || residual > params.tolerance) &&
         step < params.max_steps) {
    const int burst = std::min(check, params.max_steps - step);
    for (int s = 0; s < burst; ++s) {
      if (workers == 1) {
        sweep_rows(f, next, tau, 1, f.n - 1);
      } else {
        std::vector<std::thread> pool;
        const int rows = f.n - 2;
        const int chunk = (rows + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
          const int lo = 1 + w * chunk;
          const int hi = std::min(f.n - 1, lo + chunk);
          if (lo >= hi) break;
          pool.emplace_back(sweep_rows, std::cref(f), std::ref(next), tau, lo, hi);
        }
        for (auto& t : pool) t.join();
      }
      // Jacobi swap; boundary rows were never written, copy them over.
      for (int ix = 0; ix < f.n; ++ix) {
        next[f.index(ix, 0)] = f.at(ix, 0);
        next[f.index(ix, f.n - 1)] = f.at(ix, f.n - 1);
      }
      for (int iy = 0; iy < f.n; ++iy) {
        next[f.index(0, iy)] = f.at(0, iy);
        next[f.index(f.n - 1, iy)] = f.at(f.n - 1, iy);
      }
      f.values.swap(next);
      ++step;
    }
    residual = f.compute_residual();
    report.energy_history.push_back(f.discrete_energy());
    if (!std::isfinite(f.sup_norm()) || f.sup_norm() > 10.0 * initial_sup) {
      std::ostringstream msg;
      msg << "relax: field diverged (sup " << f.sup_norm() << " exceeds 10x "
          << initial_sup << ") at step " << step;
      throw InstabilityError(msg.str());
    }
  }

  f.residual_norm = residual;
  report.steps = step;
  report.residual = residual;
  report.converged = residual <= params.tolerance;
  if (!report.converged) {
    std::ostringstream msg;
    msg << "relax: step budget " << params.max_steps
        << " exhausted at residual " << residual << " (tolerance "
        << params.tolerance << ")";
    throw ConvergenceError(msg.str(), residual);
  }
  return report;
}

bool PhaseMap::has_all_regions(int nwells) const {
  std::vector<bool> seen(static_cast<std::size_t>(nwells), false);
  for (int l : labels)
    if (l >= 0 && l < nwells) seen[static_cast<std::size_t>(l)] = true;
  for (bool s : seen)
    if (!s) return false;
  return true;
}

PhaseMap compute_phase_map(const GridField& field) {
  PhaseMap pm;
  pm.n = field.n;
  pm.labels.resize(field.values.size());
  const auto minima = field.potential->minima();

  auto nearest = [&](const Vec3& u) {
    int best = 0;
    double best_d = (u - minima[0]).norm2();
    for (int j = 1; j < static_cast<int>(minima.size()); ++j) {
      const double d = (u - minima[static_cast<std::size_t>(j)]).norm2();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  };

  for (std::size_t k = 0; k < field.values.size(); ++k)
    pm.labels[k] = nearest(field.values[k]);

  // Interface points: zero crossings of |u-a_p|^2 - |u-a_q|^2 along grid
  // edges whose endpoint labels differ.
  auto emit = [&](int p, int q, double xa, double ya, const Vec3& ua,
                  double xb, double yb, const Vec3& ub) {
    const Vec3 ap = minima[static_cast<std::size_t>(p)];
    const Vec3 aq = minima[static_cast<std::size_t>(q)];
    const double fa = (ua - ap).norm2() - (ua - aq).norm2();
    const double fb = (ub - ap).norm2() - (ub - aq).norm2();
    double t = 0.5;
    if (fa != fb) t = std::clamp(fa / (fa - fb), 0.0, 1.0);
    const auto key = std::minmax(p, q);
    pm.interface_points[{key.first, key.second}].push_back(
        {xa + t * (xb - xa), ya + t * (yb - ya)});
  };

  for (int iy = 0; iy < field.n; ++iy)
    for (int ix = 0; ix < field.n; ++ix) {
      const int l0 = pm.label(ix, iy);
      if (ix + 1 < field.n) {
        const int l1 = pm.label(ix + 1, iy);
        if (l0 != l1)
          emit(l0, l1, field.coord(ix), field.coord(iy), field.at(ix, iy),
               field.coord(ix + 1), field.coord(iy), field.at(ix + 1, iy));
      }
      if (iy + 1 < field.n) {
        const int l1 = pm.label(ix, iy + 1);
        if (l0 != l1)
          emit(l0, l1, field.coord(ix), field.coord(iy), field.at(ix, iy),
               field.coord(ix), field.coord(iy + 1), field.at(ix, iy + 1));
      }
    }
  return pm;
}

}  // namespace triodlab
