#pragma once

// Random generators for property tests and reference implementations that do
// not share code with the library under test.

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "attnav/human_operator.hpp"
#include "attnav/so3.hpp"

namespace oracle {

using attnav::Matrix3;
using attnav::Rotation;
using attnav::Vector3;

inline constexpr double kPi = std::numbers::pi;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vector3 vector(double scale = 1.0) { return scale * Vector3(normal(), normal(), normal()); }

  Vector3 unit() {
    Vector3 v;
    do v = vector(); while (v.norm() < 1e-6);
    return v.normalized();
  }

  /// Rotation vector with angle uniform in [lo, hi].
  Vector3 rotation_vector(double lo = 0.0, double hi = kPi) { return unit() * uniform(lo, hi); }

  /// Haar-random rotation from a normalized Gaussian quaternion.
  Matrix3 rotation_matrix() {
    Eigen::Quaterniond q(normal(), normal(), normal(), normal());
    q.normalize();
    return q.toRotationMatrix();
  }
  Rotation rotation() { return Rotation::project(rotation_matrix()); }

  Eigen::VectorXd vector_x(int n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Rotation by |v| about v/|v|, through Eigen's own axis-angle code.
inline Matrix3 rodrigues(const Vector3& v) {
  const double angle = v.norm();
  if (angle == 0.0) return Matrix3::Identity();
  return Eigen::AngleAxisd(angle, v / angle).toRotationMatrix();
}

inline Matrix3 cross_matrix(const Vector3& v) {
  Matrix3 m;
  // Column j is v x e_j.
  for (int j = 0; j < 3; ++j) m.col(j) = v.cross(Vector3::Unit(j));
  return m;
}

/// Smallest eigenvalue from the general self-adjoint solver.
inline double min_eigenvalue(const Matrix3& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix3>(m).eigenvalues().minCoeff();
}

/// Frequency response of (b1 s + b0) / (s^2 + a1 s + a0) evaluated directly.
inline std::complex<double> entry_response(const attnav::SecondOrderEntry& e, double w) {
  const std::complex<double> s(0.0, w);
  return (e.b1 * s + e.b0) / (s * s + e.a1 * s + e.a0);
}

/// Unit-step response of (b1 s + b0) / (s^2 + a1 s + a0) by partial
/// fractions (distinct real or complex poles).
inline double entry_step(const attnav::SecondOrderEntry& e, double t) {
  using C = std::complex<double>;
  const C disc = std::sqrt(C(e.a1 * e.a1 - 4.0 * e.a0, 0.0));
  const C p1 = (-e.a1 + disc) / 2.0;
  const C p2 = (-e.a1 - disc) / 2.0;
  // Y(s) = (b1 s + b0) / (s (s - p1)(s - p2))
  const C r0 = e.b0 / (p1 * p2);
  const C r1 = (e.b1 * p1 + e.b0) / (p1 * (p1 - p2));
  const C r2 = (e.b1 * p2 + e.b0) / (p2 * (p2 - p1));
  return (r0 + r1 * std::exp(p1 * t) + r2 * std::exp(p2 * t)).real();
}

/// Numerical derivative of a vector-valued function by central differences.
template <class F>
Eigen::MatrixXd central_jacobian(F f, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  }
  return w;
}

}  // namespace oracle
