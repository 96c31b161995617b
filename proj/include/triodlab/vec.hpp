#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace triodlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  double max_abs() const {
    return std::max(std::abs(x), std::max(std::abs(y), std::abs(z)));
  }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Dense 3x3 matrix, row major.
struct Mat3 {
  std::array<double, 9> m{};

  double& operator()(int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }
  double operator()(int i, int j) const { return m[static_cast<std::size_t>(3 * i + j)]; }

  static Mat3 identity() {
    Mat3 r;
    r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
    return r;
  }

  static Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    const double av[3] = {a.x, a.y, a.z};
    const double bv[3] = {b.x, b.y, b.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = av[i] * bv[j];
    return r;
  }

  /// Rotation about the third axis by angle (radians).
  static Mat3 rotation_z(double angle) {
    Mat3 r = identity();
    const double c = std::cos(angle), s = std::sin(angle);
    r(0, 0) = c;
    r(0, 1) = -s;
    r(1, 0) = s;
    r(1, 1) = c;
    return r;
  }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (std::size_t k = 0; k < 9; ++k) r.m[k] = m[k] + o.m[k];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (std::size_t k = 0; k < 9; ++k) r.m[k] = m[k] - o.m[k];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (std::size_t k = 0; k < 9; ++k) r.m[k] = m[k] * s;
    return r;
  }
  Mat3& operator+=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) m[k] += o.m[k];
    return *this;
  }

  Mat3 matmul(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Vec3 matvec(const Vec3& v) const {
    return {(*this)(0, 0) * v.x + (*this)(0, 1) * v.y + (*this)(0, 2) * v.z,
            (*this)(1, 0) * v.x + (*this)(1, 1) * v.y + (*this)(1, 2) * v.z,
            (*this)(2, 0) * v.x + (*this)(2, 1) * v.y + (*this)(2, 2) * v.z};
  }

  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  double trace() const { return (*this)(0, 0) + (*this)(1, 1) + (*this)(2, 2); }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double r = 0.0;
    for (double v : m) r = std::max(r, std::abs(v));
    return r;
  }

  double asymmetry() const {
    double r = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        r = std::max(r, std::abs((*this)(i, j) - (*this)(j, i)));
    return r;
  }
};

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi sweeps,
/// returned in ascending order.
std::array<double, 3> symmetric_eigenvalues(const Mat3& a);

}  // namespace triodlab
