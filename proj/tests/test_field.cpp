#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "triodlab/field_checks.hpp"
#include "triodlab/grid_field.hpp"

using namespace triodlab;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

GridField grid_from(std::shared_ptr<const Potential> pot, double h,
                    double extent,
                    const std::function<Vec3(double, double)>& f) {
  GridField g;
  g.h = h;
  g.extent = extent;
  g.n = static_cast<int>(std::lround(2.0 * extent / h)) + 1;
  g.potential = std::move(pot);
  g.values.resize(static_cast<std::size_t>(g.n) * static_cast<std::size_t>(g.n));
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      g.at(ix, iy) = f(g.coord(ix), g.coord(iy));
  g.residual_norm = g.compute_residual();
  return g;
}

}  // namespace

TEST_CASE("triod ansatz hits the wells deep inside each region") {
  TriodAnsatz ansatz(testing::equilateral_potential(),
                     testing::symmetric_paths_rotated(),
                     testing::symmetric_azimuths());
  // Sector bisector at 150 degrees; distance to both rays exceeds 10.
  const double r = 12.0;
  const Vec3 u = ansatz.value(r * std::cos(150.0 * kDeg), r * std::sin(150.0 * kDeg));
  const int region = ansatz.sector_region(150.0 * kDeg);
  CHECK((u - testing::equilateral_potential()->minima()[region]).norm() <= 1e-4);
}

TEST_CASE("triod ansatz equals the profile midpoint on a ray") {
  TriodAnsatz ansatz(testing::equilateral_potential(),
                     testing::symmetric_paths_rotated(),
                     testing::symmetric_azimuths());
  const auto& ray = ansatz.rays()[0];
  const Vec3 u =
      ansatz.value(12.0 * std::cos(ray.azimuth), 12.0 * std::sin(ray.azimuth));
  CHECK((u - ray.profile_value(0.0)).norm() <= 1e-4);
}

TEST_CASE("triod ansatz is equivariant under the 120-degree rotation") {
  TriodAnsatz ansatz(testing::equilateral_potential(),
                     testing::symmetric_paths_rotated(),
                     testing::symmetric_azimuths());
  const double c = std::cos(120.0 * kDeg), s = std::sin(120.0 * kDeg);
  const Mat3 q_range = Mat3::rotation_z(120.0 * kDeg);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(-12.0, 12.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double x = coord(rng), y = coord(rng);
    const Vec3 lhs = ansatz.value(c * x - s * y, s * x + c * y);
    const Vec3 rhs = q_range.matvec(ansatz.value(x, y));
    worst = std::max(worst, (lhs - rhs).max_abs());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("rays closer than 10 degrees are rejected") {
  CHECK_THROWS_AS(
      TriodAnsatz(testing::equilateral_potential(),
                  testing::symmetric_paths_rotated(),
                  {90.0 * kDeg, 95.0 * kDeg, 210.0 * kDeg}),
      std::invalid_argument);
}

TEST_CASE("far field evaluation reproduces stored nodes exactly") {
  const FarField& field = testing::symmetric_farfield_small();
  const GridField& g = field.grid();
  CHECK((field.value(g.coord(31), g.coord(47)) - g.at(31, 47)).norm() == 0.0);
}

TEST_CASE("far field far from every interface is the region's well") {
  const FarField& field = testing::symmetric_farfield_small();
  // Radius 50 along the bisector at 150 degrees, far outside the grid.
  const Vec3 u = field.value(50.0 * std::cos(150.0 * kDeg),
                             50.0 * std::sin(150.0 * kDeg));
  const int region = field.ansatz().sector_region(150.0 * kDeg);
  CHECK((u - field.grid().potential->minima()[region]).norm() <= 1e-9);
}

TEST_CASE("far field outside the grid follows the interface profile") {
  const FarField& field = testing::symmetric_farfield_small();
  const auto& ray = field.ansatz().rays()[0];
  const Vec2 d = ray.direction(), n = ray.normal();
  for (double s : {-2.0, -0.5, 0.0, 1.0, 2.0}) {
    const double px = 22.0 * d.x + s * n.x, py = 22.0 * d.y + s * n.y;
    CHECK((field.value(px, py) - ray.profile_value(s)).norm() <= 1e-9);
  }
}

TEST_CASE("far field is continuous across the grid boundary") {
  const FarField& field = testing::symmetric_farfield_small();
  CHECK(field.blending_tolerance() < 1e-2);
  const double X = field.grid().extent, eps = 1e-9;
  double worst = 0.0;
  for (int k = 0; k < 256; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / 256.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double scale = X / std::max(std::abs(c), std::abs(s));
    const Vec3 inside = field.value((scale - eps) * c, (scale - eps) * s);
    const Vec3 outside = field.value((scale + eps) * c, (scale + eps) * s);
    worst = std::max(worst, (inside - outside).max_abs());
  }
  CHECK(worst <= field.blending_tolerance() + 1e-12);
}

TEST_CASE("a well-constant field is a fixed point of relaxation") {
  FarField field = testing::symmetric_farfield_small();  // copy
  const Vec3 a = field.grid().potential->minima()[0];
  for (Vec3& v : field.grid().values) v = a;
  RelaxParams rp;
  const RelaxReport report = relax(field, rp);
  CHECK(report.steps == 0);
  CHECK(report.residual == 0.0);
  for (const Vec3& v : field.grid().values) CHECK((v - a).norm() == 0.0);
}

TEST_CASE("extruded analytic profile has O(h^2) discrete residual") {
  auto tanh_field = [](double x1, double) {
    return Vec3{std::tanh(x1 / std::sqrt(2.0)), 0.0, 0.0};
  };
  const GridField coarse = grid_from(testing::quartic_potential(), 0.2, 6.0, tanh_field);
  const GridField fine = grid_from(testing::quartic_potential(), 0.1, 6.0, tanh_field);
  const double ratio = coarse.residual_norm / fine.residual_norm;
  CHECK(ratio >= 3.2);
  CHECK(ratio <= 4.8);
}

TEST_CASE("relaxation decreases the discrete energy") {
  FarField field = init_triod(testing::equilateral_potential(),
                              testing::symmetric_paths_rotated(),
                              testing::symmetric_azimuths(), GridParams{0.25, 9.0});
  RelaxParams rp;
  rp.max_steps = 1500;
  rp.tolerance = 8e-3;
  rp.check_interval = 50;
  const RelaxReport report = relax(field, rp);
  CHECK(report.converged);
  for (std::size_t k = 0; k + 1 < report.energy_history.size(); ++k)
    CHECK(report.energy_history[k + 1] <= report.energy_history[k] + 1e-10);
}

TEST_CASE("worker count does not change the relaxed field") {
  auto run = [](int workers) {
    FarField field = init_triod(testing::equilateral_potential(),
                                testing::symmetric_paths_rotated(),
                                testing::symmetric_azimuths(), GridParams{0.4, 8.0});
    RelaxParams rp;
    rp.max_steps = 200;
    rp.tolerance = 1e-10;
    rp.workers = workers;
    try {
      relax(field, rp);
    } catch (const ConvergenceError&) {
      // budget run; the iterate is what matters here
    }
    return field.grid().values;
  };
  const auto a = run(1), b = run(3);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() == 0.0);
}

TEST_CASE("an oversized time step triggers the instability error") {
  FarField field = init_triod(testing::equilateral_potential(),
                              testing::symmetric_paths_rotated(),
                              testing::symmetric_azimuths(), GridParams{0.4, 8.0});
  RelaxParams rp;
  rp.time_step = 10.0;
  rp.check_interval = 20;
  CHECK_THROWS_AS(relax(field, rp), InstabilityError);
}

TEST_CASE("an exhausted step budget raises a convergence error") {
  FarField field = init_triod(testing::equilateral_potential(),
                              testing::symmetric_paths_rotated(),
                              testing::symmetric_azimuths(), GridParams{0.4, 8.0});
  RelaxParams rp;
  rp.max_steps = 5;
  rp.tolerance = 1e-12;
  try {
    relax(field, rp);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 1e-12);
  }
}

TEST_CASE("the relaxed symmetric field commutes with the 120-degree action") {
  const FarField& field = testing::symmetric_farfield_small();
  const GridField& g = field.grid();
  const double c = std::cos(120.0 * kDeg), s = std::sin(120.0 * kDeg);
  const Mat3 q_range = Mat3::rotation_z(120.0 * kDeg);
  double worst = 0.0;
  for (int iy = 1; iy + 1 < g.n; iy += 3)
    for (int ix = 1; ix + 1 < g.n; ix += 3) {
      const double x = g.coord(ix), y = g.coord(iy);
      const double rx = c * x - s * y, ry = s * x + c * y;
      if (std::max(std::abs(rx), std::abs(ry)) > g.extent) continue;
      const Vec3 lhs = g.bilinear(rx, ry);
      const Vec3 rhs = q_range.matvec(g.at(ix, iy));
      worst = std::max(worst, (lhs - rhs).max_abs());
    }
  CHECK(worst <= 10.0 * g.h * g.h);
}

TEST_CASE("phase map labels every region and finds all three interfaces") {
  const FarField& field = testing::symmetric_farfield_small();
  const PhaseMap pm = compute_phase_map(field.grid());
  CHECK(pm.has_all_regions(3));
  CHECK(pm.interface_points.size() == 3);
  for (const auto& [pair, pts] : pm.interface_points) CHECK(pts.size() >= 10);
}

TEST_CASE("decay audit recovers the tanh rate on the extruded profile") {
  const GridField g =
      grid_from(testing::quartic_potential(), 0.1, 10.0, [](double x1, double) {
        return Vec3{std::tanh(x1 / std::sqrt(2.0)), 0.0, 0.0};
      });
  auto region_of = [](double x, double) { return x >= 0.0 ? 1 : 0; };
  auto dist = [](double x, double, int) { return std::abs(x); };
  const Hypothesis1Report report = check_decay(g, region_of, dist, 2.0, 8.0, 12, 5);
  CHECK_FALSE(report.value_fit.degenerate);
  // 1 - tanh(d / sqrt 2) ~ 2 exp(-sqrt(2) d).
  CHECK(report.value_fit.slope ==
        doctest::Approx(-std::sqrt(2.0)).epsilon(0.10));
  CHECK(report.gradient_fit.slope < -0.5);
}

TEST_CASE("decay audit reports a degenerate pass on a constant field") {
  const auto pot = testing::equilateral_potential();
  const Vec3 a = pot->minima()[0];
  const GridField g =
      grid_from(pot, 0.25, 5.0, [a](double, double) { return a; });
  auto region_of = [](double, double) { return 0; };
  auto dist = [](double, double, int) { return 4.0; };
  const Hypothesis1Report report = check_decay(g, region_of, dist, 2.0, 8.0, 12, 5);
  CHECK(report.value_fit.degenerate);
  CHECK(report.max_value_deviation < 1e-12);
}

TEST_CASE("relaxed field decay slope is at most -1/2") {
  const FarField& field = testing::symmetric_farfield_small();
  const PhaseMap pm = compute_phase_map(field.grid());
  const Hypothesis1Report report = check_hypothesis1(field, pm, 2.0, 8.0);
  CHECK(report.value_fit.slope <= -0.5);
  CHECK(report.gradient_fit.slope <= -0.5);
}

TEST_CASE("profile deviations decrease along the interface") {
  const FarField& field = testing::symmetric_farfield_small();
  const std::array<double, 3> distances = {5.0, 7.5, 10.0};
  const Hypothesis2Report report =
      check_hypothesis2(field, 0, distances, 4.0);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.monotone_from(0));
}

TEST_CASE("profile deviations stay at discretization level on an extrusion") {
  // An exactly extruded profile shows no junction influence at any
  // distance along the interface.
  const auto sampler = testing::tanh_profile_sampler();
  ConnectionParams params;
  params.samples = 801;
  const auto path = solve_connection(testing::quartic_potential(), 0, 1, params);
  const std::array<double, 3> distances = {5.0, 10.0, 15.0};
  const Hypothesis2Report report = check_profile_convergence(
      sampler, {0.0, 1.0}, {1.0, 0.0},
      [&](double eta) { return sample_path(path, eta); },
      [&](double eta) { return sample_path_derivative(path, eta); }, 1e9, 0.1,
      distances, 4.0);
  for (const auto& row : report.rows) {
    CHECK(row.sup_value_dev <= 2e-3);
    CHECK(row.sup_tangential_deriv <= 1e-12);
  }
}
