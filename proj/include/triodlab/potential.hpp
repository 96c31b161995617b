#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "triodlab/vec.hpp"

namespace triodlab {

/// A smooth nonnegative potential on order-parameter space R^3 whose
/// global minima sit at W = 0. Implementations provide closed-form
/// gradient and Hessian.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual double value(const Vec3& u) const = 0;
  virtual Vec3 gradient(const Vec3& u) const = 0;
  virtual Mat3 hessian(const Vec3& u) const = 0;
  virtual std::span<const Vec3> minima() const = 0;
  virtual std::string family() const = 0;
};

/// W(u) = prod_i |u - a_i|^2 over three wells. Smooth, coercive of
/// degree six, nondegenerate minima for non-collinear well positions.
class TripleWellPotential final : public Potential {
 public:
  TripleWellPotential(const Vec3& a1, const Vec3& a2, const Vec3& a3);

  /// Wells at the vertices of a unit-side equilateral triangle in the
  /// plane {u3 = 0}, centroid at the origin.
  static TripleWellPotential equilateral();

  double value(const Vec3& u) const override;
  Vec3 gradient(const Vec3& u) const override;
  Mat3 hessian(const Vec3& u) const override;
  std::span<const Vec3> minima() const override { return wells_; }
  std::string family() const override { return "triple-well-product"; }

 private:
  std::vector<Vec3> wells_;
};

/// W(u) = 1/4 (1 - u1^2)^2 + u2^2 + u3^2, wells at (+-1, 0, 0).
/// The two-well analytic benchmark: its connection is
/// U(eta) = (tanh(eta/sqrt 2), 0, 0) with action 2*sqrt(2)/3.
class QuarticDoubleWell final : public Potential {
 public:
  QuarticDoubleWell();

  double value(const Vec3& u) const override;
  Vec3 gradient(const Vec3& u) const override;
  Mat3 hessian(const Vec3& u) const override;
  std::span<const Vec3> minima() const override { return wells_; }
  std::string family() const override { return "quartic-double-well"; }

 private:
  std::vector<Vec3> wells_;
};

// Checked evaluation entry points. Non-finite input is an
// invalid-argument error; the raw virtuals assume finite input.
double eval_w(const Potential& pot, const Vec3& u);
Vec3 grad_w(const Potential& pot, const Vec3& u);
Mat3 hess_w(const Potential& pot, const Vec3& u);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // the quantity the check gates on
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  double coercivity_lower_bound = 0.0;  // sampled min of W on the probe sphere

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Numerical audit of the structural assumptions: zeros exactly at the
/// wells, positive-definite Hessians there, nonnegativity on a random
/// cloud, a sampled coercivity probe on a large sphere about the well
/// centroid, and agreement of the analytic derivatives with central
/// differences. Failures are reported, not thrown.
ValidationReport validate(const Potential& pot, unsigned seed = 20260809,
                          int cloud_size = 1000);

/// Spectral-norm bound for the Hessian sampled over a point set;
/// used for explicit time-step guards.
double max_hessian_norm(const Potential& pot, std::span<const Vec3> points);

std::shared_ptr<const Potential> make_potential(const std::string& family,
                                                std::span<const Vec3> minima);

}  // namespace triodlab
