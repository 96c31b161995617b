#include "triodlab/connection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "triodlab/numerics.hpp"

namespace triodlab {

namespace {

/// Central-difference derivative along the path, second-order one-sided
/// at the two ends.
Vec3 path_derivative(const std::vector<Vec3>& u, std::size_t k, double h) {
  const std::size_t n = u.size();
  if (k == 0) return (u[0] * -3.0 + u[1] * 4.0 - u[2]) * (1.0 / (2.0 * h));
  if (k + 1 == n)
    return (u[n - 1] * 3.0 - u[n - 2] * 4.0 + u[n - 3]) * (1.0 / (2.0 * h));
  return (u[k + 1] - u[k - 1]) * (1.0 / (2.0 * h));
}

/// Discrete action: midpoint kinetic term plus trapezoidal potential
/// term. Its gradient with respect to an interior node is exactly
/// -h * (discrete Euler-Lagrange residual), which is what the descent
/// and the convergence test both use.
double discrete_action(const std::vector<Vec3>& u, const Potential& pot,
                       double h) {
  std::vector<double> terms;
  terms.reserve(2 * u.size());
  for (std::size_t k = 0; k + 1 < u.size(); ++k)
    terms.push_back(0.5 * (u[k + 1] - u[k]).norm2() / h);
  for (std::size_t k = 0; k < u.size(); ++k)
    terms.push_back(trapezoid_weight(k, u.size(), h) * pot.value(u[k]));
  return pairwise_sum(terms);
}

/// Gradient of discrete_action at the interior nodes (endpoints pinned).
/// Returns the sup norm of the Euler-Lagrange residual as a byproduct.
double action_gradient(const std::vector<Vec3>& u, const Potential& pot,
                       double h, std::vector<Vec3>& grad) {
  const std::size_t n = u.size();
  grad.assign(n, Vec3{});
  double el_sup = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec3 lap = (u[k + 1] - u[k] * 2.0 + u[k - 1]) * (1.0 / (h * h));
    const Vec3 residual = lap - pot.gradient(u[k]);
    el_sup = std::max(el_sup, residual.max_abs());
    grad[k] = residual * (-h);
  }
  return el_sup;
}

}  // namespace

ConnectionPath solve_connection(std::shared_ptr<const Potential> potential,
                                int i, int j, const ConnectionParams& params,
                                bool allow_trivial) {
  if (!potential) throw std::invalid_argument("solve_connection: null potential");
  const auto minima = potential->minima();
  const int nwells = static_cast<int>(minima.size());
  if (i < 0 || i >= nwells || j < 0 || j >= nwells)
    throw std::invalid_argument("solve_connection: well index out of range");
  if (i == j && !allow_trivial)
    throw std::invalid_argument(
        "solve_connection: i == j requires the trivial mode");
  if (params.samples < 3)
    throw std::invalid_argument("solve_connection: need at least 3 samples");
  if (params.half_length <= 0.0 || params.tolerance <= 0.0)
    throw std::invalid_argument("solve_connection: nonpositive parameter");

  ConnectionPath path;
  path.potential = potential;
  path.endpoint_i = i;
  path.endpoint_j = j;

  const std::size_t n = static_cast<std::size_t>(params.samples);
  const double L = params.half_length;
  const double h = 2.0 * L / static_cast<double>(n - 1);
  path.eta.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    path.eta[k] = -L + h * static_cast<double>(k);

  const Vec3 a = minima[static_cast<std::size_t>(i)];
  const Vec3 b = minima[static_cast<std::size_t>(j)];

  // Straight-segment seed.
  std::vector<Vec3>& u = path.values;
  u.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n - 1);
    u[k] = a * (1.0 - t) + b * t;
  }

  if (i == j) {
    path.action = 0.0;
    path.equipartition_residual = 0.0;
    path.el_residual = 0.0;
    path.action_history = {0.0};
    return path;
  }

  const Potential& pot = *potential;

  // Safe initial step from the stiffness of the discretized operator.
  const double hess_bound = std::max(1.0, max_hessian_norm(pot, u));
  const double safe_step = 1.0 / (4.0 / (h * h) + hess_bound);

  std::vector<Vec3> grad, trial, prev_u, prev_grad;
  double S = discrete_action(u, pot, h);
  path.action_history.push_back(S);
  double el = action_gradient(u, pot, h, grad);

  double step = safe_step;
  bool have_prev = false;
  int iter = 0;
  for (; iter < params.max_iterations && el > params.tolerance; ++iter) {
    // Barzilai-Borwein trial step, clamped; plain safe step first time.
    if (have_prev) {
      double sy = 0.0, ss = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec3 s = u[k] - prev_u[k];
        const Vec3 y = grad[k] - prev_grad[k];
        sy += s.dot(y);
        ss += s.dot(s);
      }
      step = (sy > 1e-300) ? ss / sy : safe_step;
      step = std::clamp(step, safe_step, 1e4 * safe_step);
    }

    double g2 = 0.0;
    for (const Vec3& g : grad) g2 += g.norm2();

    // Backtrack until the action decreases (Armijo).
    double alpha = step;
    double S_trial = 0.0;
    trial.resize(u.size());
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u;
      for (std::size_t k = 1; k + 1 < u.size(); ++k)
        trial[k] = u[k] - grad[k] * alpha;
      S_trial = discrete_action(trial, pot, h);
      if (S_trial <= S - 1e-4 * alpha * g2) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stalled at machine precision

    prev_u = u;
    prev_grad = grad;
    have_prev = true;
    u.swap(trial);
    S = S_trial;
    path.action_history.push_back(S);
    el = action_gradient(u, pot, h, grad);
  }

  if (el > params.tolerance) {
    std::ostringstream msg;
    msg << "solve_connection: descent did not reach tolerance "
        << params.tolerance << " within " << params.max_iterations
        << " iterations (last residual " << el << ")";
    throw ConvergenceError(msg.str(), el);
  }

  path.el_residual = el;
  path.action = action(path);
  path.equipartition_residual = equipartition_residual(path);
  path.w_near_end =
      std::max(pot.value(u[1]), pot.value(u[u.size() - 2]));
  return path;
}

double action(const ConnectionPath& path) {
  if (path.values.size() < 3)
    throw std::invalid_argument("action: need at least 3 samples");
  if (!path.potential) throw std::invalid_argument("action: path has no potential");
  const double h = path.spacing();
  const auto& u = path.values;
  std::vector<double> terms(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec3 du = path_derivative(u, k, h);
    terms[k] = trapezoid_weight(k, u.size(), h) *
               (0.5 * du.norm2() + path.potential->value(u[k]));
  }
  return pairwise_sum(terms);
}

double equipartition_residual(const ConnectionPath& path) {
  if (path.values.size() < 3)
    throw std::invalid_argument("equipartition_residual: need >= 3 samples");
  const double h = path.spacing();
  const auto& u = path.values;
  double sup = 0.0;
  for (std::size_t k = 1; k + 1 < u.size(); ++k) {
    const Vec3 du = (u[k + 1] - u[k - 1]) * (1.0 / (2.0 * h));
    sup = std::max(sup, std::abs(0.5 * du.norm2() -
                                 path.potential->value(u[k])));
  }
  return sup;
}

double kinetic_integral(const ConnectionPath& path) {
  if (path.values.size() < 3)
    throw std::invalid_argument("kinetic_integral: need >= 3 samples");
  const double h = path.spacing();
  const auto& u = path.values;
  std::vector<double> terms(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec3 du = path_derivative(u, k, h);
    terms[k] = trapezoid_weight(k, u.size(), h) * du.norm2();
  }
  return pairwise_sum(terms);
}

namespace {

/// Catmull-Rom segment evaluation with one-sided ghost nodes.
Vec3 path_node(const ConnectionPath& p, long k) {
  const long n = static_cast<long>(p.values.size());
  if (k < 0) return p.values.front();
  if (k >= n) return p.values.back();
  return p.values[static_cast<std::size_t>(k)];
}

}  // namespace

Vec3 sample_path(const ConnectionPath& path, double eta) {
  const double L = path.half_length();
  if (eta <= -L) return path.values.front();
  if (eta >= L) return path.values.back();
  const double h = path.spacing();
  const double s = (eta + L) / h;
  const long k = static_cast<long>(std::floor(s));
  const double t = s - static_cast<double>(k);
  const Vec3 p0 = path_node(path, k - 1), p1 = path_node(path, k),
             p2 = path_node(path, k + 1), p3 = path_node(path, k + 2);
  const double t2 = t * t, t3 = t2 * t;
  return p0 * (-0.5 * t3 + t2 - 0.5 * t) + p1 * (1.5 * t3 - 2.5 * t2 + 1.0) +
         p2 * (-1.5 * t3 + 2.0 * t2 + 0.5 * t) + p3 * (0.5 * t3 - 0.5 * t2);
}

Vec3 sample_path_derivative(const ConnectionPath& path, double eta) {
  const double L = path.half_length();
  if (eta <= -L || eta >= L) return Vec3{};
  const double h = path.spacing();
  const double s = (eta + L) / h;
  const long k = static_cast<long>(std::floor(s));
  const double t = s - static_cast<double>(k);
  const Vec3 p0 = path_node(path, k - 1), p1 = path_node(path, k),
             p2 = path_node(path, k + 1), p3 = path_node(path, k + 2);
  const double t2 = t * t;
  const Vec3 d = p0 * (-1.5 * t2 + 2.0 * t - 0.5) + p1 * (4.5 * t2 - 5.0 * t) +
                 p2 * (-4.5 * t2 + 4.0 * t + 0.5) + p3 * (1.5 * t2 - t);
  return d * (1.0 / h);
}

}  // namespace triodlab
