#pragma once

#include <array>
#include <functional>
#include <memory>

#include "triodlab/connection.hpp"
#include "triodlab/vec.hpp"

namespace triodlab {

/// A planar order-parameter field u: R^2 -> R^3. Three-dimensional
/// quantities treat it as extruded along x3 (u_,3 = 0).
class PlanarSampler {
 public:
  virtual ~PlanarSampler() = default;

  virtual Vec3 value(double x1, double x2) const = 0;

  /// (d u / d x1, d u / d x2); central differences by default.
  virtual std::array<Vec3, 2> gradient(double x1, double x2) const {
    const double s = gradient_step();
    const double inv = 1.0 / (2.0 * s);
    return {(value(x1 + s, x2) - value(x1 - s, x2)) * inv,
            (value(x1, x2 + s) - value(x1, x2 - s)) * inv};
  }

  virtual double gradient_step() const { return 1e-4; }
};

/// Wraps closures; pass an exact gradient when one is available.
class AnalyticSampler final : public PlanarSampler {
 public:
  using ValueFn = std::function<Vec3(double, double)>;
  using GradientFn = std::function<std::array<Vec3, 2>(double, double)>;

  explicit AnalyticSampler(ValueFn value, GradientFn gradient = nullptr)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}

  Vec3 value(double x1, double x2) const override { return value_(x1, x2); }

  std::array<Vec3, 2> gradient(double x1, double x2) const override {
    if (gradient_) return gradient_(x1, x2);
    return PlanarSampler::gradient(x1, x2);
  }

 private:
  ValueFn value_;
  GradientFn gradient_;
};

/// u(x) = P(eta) for a straight interface line through the origin at the
/// given azimuth; eta is the signed distance, positive on the
/// counterclockwise side of the interface direction.
class ExtrudedProfileSampler final : public PlanarSampler {
 public:
  ExtrudedProfileSampler(std::shared_ptr<const ConnectionPath> path,
                         double azimuth)
      : path_(std::move(path)),
        nx_(-std::sin(azimuth)),
        ny_(std::cos(azimuth)) {}

  double signed_distance(double x1, double x2) const {
    return x1 * nx_ + x2 * ny_;
  }

  Vec3 value(double x1, double x2) const override {
    return sample_path(*path_, signed_distance(x1, x2));
  }

  std::array<Vec3, 2> gradient(double x1, double x2) const override {
    const Vec3 d = sample_path_derivative(*path_, signed_distance(x1, x2));
    return {d * nx_, d * ny_};
  }

  const ConnectionPath& path() const { return *path_; }

 private:
  std::shared_ptr<const ConnectionPath> path_;
  double nx_, ny_;
};

}  // namespace triodlab
