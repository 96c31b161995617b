#include "triodlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace triodlab {

namespace {

void require_finite(const Vec3& u, const char* who) {
  if (!u.finite()) {
    std::ostringstream msg;
    msg << who << ": non-finite order-parameter input";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
  Mat3 w = a;
  // Cyclic Jacobi; 3x3 converges in a handful of sweeps.
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) off += w(i, j) * w(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(w(p, q)) < 1e-300) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3 r = Mat3::identity();
        r(p, p) = c;
        r(q, q) = c;
        r(p, q) = s;
        r(q, p) = -s;
        w = r.transpose().matmul(w).matmul(r);
      }
  }
  std::array<double, 3> ev = {w(0, 0), w(1, 1), w(2, 2)};
  std::sort(ev.begin(), ev.end());
  return ev;
}

TripleWellPotential::TripleWellPotential(const Vec3& a1, const Vec3& a2,
                                         const Vec3& a3)
    : wells_{a1, a2, a3} {}

TripleWellPotential TripleWellPotential::equilateral() {
  // Circumradius 1/sqrt(3) gives unit side length; centroid at origin so
  // the order-3 rotation of the u1-u2 plane permutes the wells.
  const double r = 1.0 / std::sqrt(3.0);
  auto vertex = [r](double deg) {
    const double t = deg * std::acos(-1.0) / 180.0;
    return Vec3{r * std::cos(t), r * std::sin(t), 0.0};
  };
  return TripleWellPotential(vertex(90.0), vertex(210.0), vertex(330.0));
}

double TripleWellPotential::value(const Vec3& u) const {
  double w = 1.0;
  for (const Vec3& a : wells_) w *= (u - a).norm2();
  return w;
}

Vec3 TripleWellPotential::gradient(const Vec3& u) const {
  const Vec3 d0 = u - wells_[0], d1 = u - wells_[1], d2 = u - wells_[2];
  const double f0 = d0.norm2(), f1 = d1.norm2(), f2 = d2.norm2();
  return 2.0 * (d0 * (f1 * f2) + d1 * (f0 * f2) + d2 * (f0 * f1));
}

Mat3 TripleWellPotential::hessian(const Vec3& u) const {
  const Vec3 d[3] = {u - wells_[0], u - wells_[1], u - wells_[2]};
  const double f[3] = {d[0].norm2(), d[1].norm2(), d[2].norm2()};
  Mat3 h;
  double diag = 0.0;
  for (int i = 0; i < 3; ++i) {
    diag += 2.0 * f[(i + 1) % 3] * f[(i + 2) % 3];
    for (int k = 0; k < 3; ++k) {
      if (k == i) continue;
      const int l = 3 - i - k;  // the remaining index
      h += Mat3::outer(d[i], d[k]) * (4.0 * f[l]);
    }
  }
  h += Mat3::identity() * diag;
  return h;
}

QuarticDoubleWell::QuarticDoubleWell()
    : wells_{Vec3{-1.0, 0.0, 0.0}, Vec3{1.0, 0.0, 0.0}} {}

double QuarticDoubleWell::value(const Vec3& u) const {
  const double q = 1.0 - u.x * u.x;
  return 0.25 * q * q + u.y * u.y + u.z * u.z;
}

Vec3 QuarticDoubleWell::gradient(const Vec3& u) const {
  return {-u.x * (1.0 - u.x * u.x), 2.0 * u.y, 2.0 * u.z};
}

Mat3 QuarticDoubleWell::hessian(const Vec3& u) const {
  Mat3 h;
  h(0, 0) = 3.0 * u.x * u.x - 1.0;
  h(1, 1) = 2.0;
  h(2, 2) = 2.0;
  return h;
}

double eval_w(const Potential& pot, const Vec3& u) {
  require_finite(u, "eval_w");
  return pot.value(u);
}

Vec3 grad_w(const Potential& pot, const Vec3& u) {
  require_finite(u, "grad_w");
  return pot.gradient(u);
}

Mat3 hess_w(const Potential& pot, const Vec3& u) {
  require_finite(u, "hess_w");
  return pot.hessian(u);
}

namespace {

Vec3 fd_gradient(const Potential& pot, const Vec3& u, double step) {
  auto diff = [&](Vec3 e) {
    return (pot.value(u + e * step) - pot.value(u - e * step)) / (2.0 * step);
  };
  return {diff({1, 0, 0}), diff({0, 1, 0}), diff({0, 0, 1})};
}

Mat3 fd_hessian(const Potential& pot, const Vec3& u, double step) {
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Mat3 h;
  for (int j = 0; j < 3; ++j) {
    const Vec3 gp = pot.gradient(u + axes[j] * step);
    const Vec3 gm = pot.gradient(u - axes[j] * step);
    const Vec3 col = (gp - gm) * (1.0 / (2.0 * step));
    h(0, j) = col.x;
    h(1, j) = col.y;
    h(2, j) = col.z;
  }
  return h;
}

}  // namespace

ValidationReport validate(const Potential& pot, unsigned seed, int cloud_size) {
  ValidationReport report;
  const auto minima = pot.minima();

  {
    ValidationCheck c{.name = "zero-at-minima"};
    double worst = 0.0;
    for (const Vec3& a : minima) worst = std::max(worst, std::abs(pot.value(a)));
    c.measured = worst;
    c.pass = worst <= 1e-12;
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{.name = "nondegenerate-minima"};
    double lowest = std::numeric_limits<double>::infinity();
    for (const Vec3& a : minima) {
      const auto ev = symmetric_eigenvalues(pot.hessian(a));
      lowest = std::min(lowest, ev[0]);
    }
    c.measured = lowest;
    c.pass = lowest > 1e-10;
    if (!c.pass) c.detail = "Hessian eigenvalue <= 0 at some minimum";
    report.checks.push_back(c);
  }

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::vector<Vec3> cloud(static_cast<std::size_t>(cloud_size));
  for (auto& u : cloud) u = {coord(rng), coord(rng), coord(rng)};

  {
    ValidationCheck c{.name = "nonnegative-on-cloud"};
    double lowest = std::numeric_limits<double>::infinity();
    for (const Vec3& u : cloud) lowest = std::min(lowest, pot.value(u));
    c.measured = lowest;
    c.pass = lowest >= -1e-12;
    report.checks.push_back(c);
  }

  {
    // Coercivity probe: W on a sphere well outside the well cluster.
    Vec3 centroid{};
    for (const Vec3& a : minima) centroid += a;
    centroid = centroid * (1.0 / static_cast<double>(minima.size()));
    double spread = 1.0;
    for (const Vec3& a : minima) spread = std::max(spread, (a - centroid).norm());
    const double rho = 20.0 * spread;
    double lowest = std::numeric_limits<double>::infinity();
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int k = 0; k < 512; ++k) {
      Vec3 dir{unit(rng), unit(rng), unit(rng)};
      if (dir.norm() < 1e-6) continue;
      lowest = std::min(lowest, pot.value(centroid + dir * (rho / dir.norm())));
    }
    ValidationCheck c{.name = "coercivity-probe"};
    c.measured = lowest;
    c.pass = lowest > 0.0;
    report.coercivity_lower_bound = lowest;
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{.name = "gradient-matches-differences"};
    const double step = 1e-5;
    double worst = 0.0;
    for (const Vec3& u : cloud) {
      const Vec3 g = pot.gradient(u);
      const Vec3 fd = fd_gradient(pot, u, step);
      const double scale = std::max(1.0, g.norm());
      worst = std::max(worst, (g - fd).norm() / scale);
    }
    c.measured = worst;
    c.pass = worst <= 1e-5;
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{.name = "hessian-matches-differences"};
    const double step = 1e-5;
    double worst = 0.0;
    for (const Vec3& u : cloud) {
      const Mat3 h = pot.hessian(u);
      const Mat3 fd = fd_hessian(pot, u, step);
      const double scale = std::max(1.0, h.frobenius_norm());
      worst = std::max(worst, (h - fd).frobenius_norm() / scale);
    }
    c.measured = worst;
    c.pass = worst <= 1e-5;
    report.checks.push_back(c);
  }

  return report;
}

double max_hessian_norm(const Potential& pot, std::span<const Vec3> points) {
  double bound = 0.0;
  for (const Vec3& u : points) {
    const auto ev = symmetric_eigenvalues(pot.hessian(u));
    bound = std::max(bound, std::max(std::abs(ev[0]), std::abs(ev[2])));
  }
  return bound;
}

std::shared_ptr<const Potential> make_potential(const std::string& family,
                                                std::span<const Vec3> minima) {
  if (family == "triple-well-product") {
    if (minima.size() != 3)
      throw std::invalid_argument("triple-well-product needs exactly 3 minima");
    return std::make_shared<TripleWellPotential>(minima[0], minima[1], minima[2]);
  }
  if (family == "quartic-double-well") {
    if (!minima.empty())
      throw std::invalid_argument("quartic-double-well has fixed minima");
    return std::make_shared<QuarticDoubleWell>();
  }
  throw std::invalid_argument("unknown potential family: " + family);
}

}  // namespace triodlab
