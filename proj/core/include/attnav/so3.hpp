#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <functional>

namespace attnav {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Unit-norm direction in R^3 (|v| = 1 within 1e-9).
class UnitVector3 {
 public:
  /// Normalizes `v`; throws InvalidArgument if |v| is not finite or ~0.
  static UnitVector3 normalize(const Vector3& v);
  /// Wraps an already-unit vector; throws InvalidArgument if |v| != 1 within 1e-9.
  static UnitVector3 from_unit(const Vector3& v);

  static UnitVector3 e1() { return UnitVector3(Vector3::UnitX()); }
  static UnitVector3 e2() { return UnitVector3(Vector3::UnitY()); }
  static UnitVector3 e3() { return UnitVector3(Vector3::UnitZ()); }

  const Vector3& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  operator const Vector3&() const { return v_; }  // NOLINT(google-explicit-constructor)

 private:
  explicit UnitVector3(const Vector3& v) : v_(v) {}
  Vector3 v_;
};

/// Element of SO(3). Construction from a raw matrix validates
/// orthonormality and det = +1 within 1e-9.
class Rotation {
 public:
  Rotation() : m_(Matrix3::Identity()) {}
  explicit Rotation(const Matrix3& m);

  static Rotation identity() { return Rotation(); }
  /// Projects a near-rotation back onto SO(3) with one Newton step of the
  /// polar decomposition; no validation is performed on the input.
  static Rotation project(const Matrix3& near_rotation);
  /// Skips validation. Only for matrices known to be rotations to machine precision.
  static Rotation unchecked(const Matrix3& m) { return Rotation(m, Unchecked{}); }

  const Matrix3& matrix() const { return m_; }
  operator const Matrix3&() const { return m_; }  // NOLINT(google-explicit-constructor)

  Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation operator*(const Rotation& o) const { return Rotation::project(m_ * o.m_); }
  Vector3 operator*(const Vector3& v) const { return m_ * v; }

  /// z-axis of the frame, R e_3.
  UnitVector3 z_axis() const;

  /// ||R^T R - I||_F.
  double orthonormality_error() const;

  bool operator==(const Rotation& o) const { return m_ == o.m_; }

 private:
  struct Unchecked {};
  Rotation(const Matrix3& m, Unchecked) : m_(m) {}
  Matrix3 m_;
};

struct AxisAngle {
  UnitVector3 axis = UnitVector3::e3();
  double angle = 0.0;  // rad, in [0, pi]
};

inline constexpr double kSmallAngle = 1e-8;

Matrix3 hat(const Vector3& v);
/// Throws NotSkewSymmetric if ||m + m^T||_F > 1e-6.
Vector3 vee(const Matrix3& m);
inline Matrix3 sk(const Matrix3& m) { return 0.5 * (m - m.transpose()); }
inline Matrix3 sym(const Matrix3& m) { return 0.5 * (m + m.transpose()); }

Rotation exp_so3(const Vector3& v);
/// Principal logarithm, |result| in [0, pi]. At exactly pi the axis sign is
/// chosen so its first nonzero component is positive.
Vector3 log_so3(const Rotation& r);
AxisAngle axis_angle(const Rotation& r);

/// phi(R) = tr(I - R) / 2.
double phi(const Rotation& r);
/// phi(R) = ||I - R||_F^2 / 4; agrees with phi() on SO(3).
double phi_frobenius(const Rotation& r);

/// Smallest eigenvalue of a symmetric 3x3 matrix (closed-form trigonometric
/// solution). Throws NotSymmetric.
double lambda_min_sym3(const Matrix3& m);

/// Lie-Euler body-frame step R exp(w dt), re-projected onto SO(3).
Rotation step_rotation(const Rotation& r, const Vector3& omega_body, double dt);
/// Spatial-frame step exp(w dt) R, re-projected onto SO(3).
Rotation step_rotation_spatial(const Rotation& r, const Vector3& omega_spatial, double dt);

/// dexp^{-1}_theta(v) = v - [theta, v]/2 + [theta, [theta, v]]/12, truncated
/// after the third term (enough for fourth-order Munthe-Kaas schemes).
/// Spatial flows R = exp(theta) R0 use it as is; body flows R = R0 exp(theta)
/// use dexp_inv(-theta, v).
Vector3 dexp_inv(const Vector3& theta, const Vector3& v);

using BodyVelocityField = std::function<Vector3(const Rotation&)>;

/// One RKMK4 step of R' = R hat(f(R)).
Rotation step_rotation_rkmk4(const Rotation& r, const BodyVelocityField& field, double dt);

}  // namespace attnav
