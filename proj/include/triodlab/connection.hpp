#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "triodlab/potential.hpp"
#include "triodlab/vec.hpp"

namespace triodlab {

/// Thrown when an iterative solve exhausts its budget; carries the last
/// residual so callers can report it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct ConnectionParams {
  double half_length = 12.0;   // eta in [-L, L]
  int samples = 801;           // uniform nodes, endpoints included
  double tolerance = 1e-6;     // sup-norm Euler-Lagrange residual
  int max_iterations = 200000;
};

/// A discretized heteroclinic profile U(eta) between two wells, with
/// its action and convergence diagnostics.
struct ConnectionPath {
  std::vector<double> eta;   // uniform grid on [-L, L]
  std::vector<Vec3> values;  // U(eta_k)
  int endpoint_i = 0;        // well index at eta = -L
  int endpoint_j = 0;        // well index at eta = +L
  double action = 0.0;
  double equipartition_residual = 0.0;
  double el_residual = 0.0;              // sup |U'' - grad W(U)| discrete
  double w_near_end = 0.0;               // max W at the samples next to the ends
  std::vector<double> action_history;    // discrete action per accepted step
  std::shared_ptr<const Potential> potential;

  double spacing() const {
    return eta.size() > 1 ? eta[1] - eta[0] : 0.0;
  }
  double half_length() const { return eta.empty() ? 0.0 : -eta.front(); }
};

/// Minimizes the discretized action with endpoints pinned at the wells,
/// starting from the straight segment. Damped gradient descent; the
/// trial step is adapted and then backtracked until the action
/// decreases, so the recorded action history is non-increasing.
///
/// i == j is rejected unless allow_trivial is set, in which case the
/// constant path at well i (sigma = 0) is returned.
ConnectionPath solve_connection(std::shared_ptr<const Potential> potential,
                                int i, int j, const ConnectionParams& params,
                                bool allow_trivial = false);

/// Trapezoidal quadrature of 1/2 |U'|^2 + W(U) with central-difference
/// derivatives (second-order one-sided at the ends). Needs >= 3 samples.
double action(const ConnectionPath& path);

/// sup over interior samples of |1/2 |U'|^2 - W(U)|, central differences.
double equipartition_residual(const ConnectionPath& path);

/// Trapezoidal quadrature of |U'|^2 on the same stencil as action().
double kinetic_integral(const ConnectionPath& path);

/// C1 interpolation of the profile (Catmull-Rom on the uniform grid),
/// clamped to the endpoint wells outside [-L, L].
Vec3 sample_path(const ConnectionPath& path, double eta);

/// Derivative of the interpolant used by sample_path.
Vec3 sample_path_derivative(const ConnectionPath& path, double eta);

}  // namespace triodlab
