#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "triodlab/connection.hpp"

using namespace triodlab;

namespace {

ConnectionPath solve_quartic(int samples, double tolerance = 1e-6) {
  ConnectionParams params;
  params.samples = samples;
  params.tolerance = tolerance;
  return solve_connection(testing::quartic_potential(), 0, 1, params);
}

}  // namespace

TEST_CASE("trivial mode returns the constant path with zero action") {
  ConnectionParams params;
  params.samples = 11;
  const auto path =
      solve_connection(testing::equilateral_potential(), 1, 1, params, true);
  CHECK(path.action == 0.0);
  CHECK(path.equipartition_residual == 0.0);
  for (const Vec3& v : path.values)
    CHECK((v - testing::equilateral_potential()->minima()[1]).norm() == 0.0);
}

TEST_CASE("i == j without the trivial mode is an invalid argument") {
  ConnectionParams params;
  CHECK_THROWS_AS(solve_connection(testing::equilateral_potential(), 2, 2, params),
                  std::invalid_argument);
}

TEST_CASE("quartic double well reproduces the tanh connection") {
  const ConnectionPath path = solve_quartic(801);

  double sup_err = 0.0;
  for (std::size_t k = 0; k < path.eta.size(); ++k) {
    const Vec3 exact{std::tanh(path.eta[k] / std::sqrt(2.0)), 0.0, 0.0};
    sup_err = std::max(sup_err, (path.values[k] - exact).norm());
  }
  CHECK(sup_err <= 1e-3);
  CHECK(path.action == doctest::Approx(testing::kSigmaQuartic).epsilon(1.1e-3));
  CHECK(path.equipartition_residual <= 1e-3);
  CHECK(path.el_residual <= 1e-6);
  CHECK(path.w_near_end < 1e-10);
}

TEST_CASE("descent action history is non-increasing") {
  const ConnectionPath path = solve_quartic(401);
  for (std::size_t k = 0; k + 1 < path.action_history.size(); ++k)
    CHECK(path.action_history[k + 1] <= path.action_history[k] + 1e-12);
}

TEST_CASE("action of a reversed path is unchanged") {
  ConnectionPath path = solve_quartic(401);
  ConnectionPath reversed = path;
  std::reverse(reversed.values.begin(), reversed.values.end());
  std::swap(reversed.endpoint_i, reversed.endpoint_j);
  CHECK(std::abs(action(path) - action(reversed)) <= 1e-12);
}

TEST_CASE("action requires at least 3 samples") {
  ConnectionPath path = solve_quartic(101);
  path.values.resize(2);
  path.eta.resize(2);
  CHECK_THROWS_AS(action(path), std::invalid_argument);
}

TEST_CASE("equipartition holds along the analytic profile") {
  // 1/2 |U'|^2 = W exactly for the tanh connection; the sampled residual
  // is pure discretization error.
  ConnectionPath path = solve_quartic(801);
  for (std::size_t k = 0; k < path.eta.size(); ++k)
    path.values[k] = Vec3{std::tanh(path.eta[k] / std::sqrt(2.0)), 0.0, 0.0};
  CHECK(equipartition_residual(path) <= 1e-3);
}

TEST_CASE("a perturbed path has a large equipartition residual") {
  ConnectionPath path = solve_quartic(401);
  path.values[path.values.size() / 2].y += 0.1;
  CHECK(equipartition_residual(path) > 1e-2);
}

TEST_CASE("action and kinetic integral agree to the equipartition bound") {
  const ConnectionPath path = solve_quartic(801);
  const double two_l = path.eta.back() - path.eta.front();
  CHECK(std::abs(path.action - kinetic_integral(path)) <=
        two_l * path.equipartition_residual + 1e-9);
}

TEST_CASE("refinement converges at second order against the analytic action") {
  double errors[3];
  int idx = 0;
  for (int n : {201, 401, 801})
    errors[idx++] = std::abs(solve_quartic(n).action - testing::kSigmaQuartic);
  const double order1 = std::log2(errors[0] / errors[1]);
  const double order2 = std::log2(errors[1] / errors[2]);
  CHECK(order1 >= 1.8);
  CHECK(order2 >= 1.8);
}

TEST_CASE("symmetric potential gives equal actions for all pairs") {
  ConnectionParams params;
  params.samples = 401;
  const auto pot = testing::equilateral_potential();
  const double s01 = solve_connection(pot, 0, 1, params).action;
  const double s12 = solve_connection(pot, 1, 2, params).action;
  const double s20 = solve_connection(pot, 2, 0, params).action;
  CHECK(std::abs(s01 - s12) / s01 <= 1e-6);
  CHECK(std::abs(s01 - s20) / s01 <= 1e-6);
}

TEST_CASE("exhausted iteration budget raises a convergence error") {
  ConnectionParams params;
  params.samples = 201;
  params.tolerance = 1e-14;
  params.max_iterations = 3;
  try {
    solve_connection(testing::quartic_potential(), 0, 1, params);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("interpolated samples reproduce nodes and clamp beyond the ends") {
  const ConnectionPath path = solve_quartic(401);
  const std::size_t k = 200;
  CHECK((sample_path(path, path.eta[k]) - path.values[k]).norm() <= 1e-10);
  CHECK((sample_path(path, -1e9) - path.values.front()).norm() == 0.0);
  CHECK((sample_path(path, 1e9) - path.values.back()).norm() == 0.0);
  // The interpolant's node tangent is the central difference.
  const double h = path.spacing();
  const Vec3 cd = (path.values[k + 1] - path.values[k - 1]) * (0.5 / h);
  CHECK((sample_path_derivative(path, path.eta[k]) - cd).norm() <= 1e-8);
}
