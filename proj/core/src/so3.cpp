#include "attnav/so3.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "attnav/error.hpp"

namespace attnav {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotSkewSymmetric: return "NotSkewSymmetric";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DegenerateAverage: return "DegenerateAverage";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::UnstableModel: return "UnstableModel";
    case Errc::PoleOnAxis: return "PoleOnAxis";
    case Errc::EmptyAfterTrim: return "EmptyAfterTrim";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::DegenerateReference: return "DegenerateReference";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ParseError: return "ParseError";
    case Errc::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kRotationTol = 1e-9;

}  // namespace

UnitVector3 UnitVector3::normalize(const Vector3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-300) {
    throw Error(Errc::InvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  return UnitVector3(v / n);
}

UnitVector3 UnitVector3::from_unit(const Vector3& v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTol) {
    throw Error(Errc::InvalidArgument, "vector is not unit-norm");
  }
  return UnitVector3(v);
}

Rotation::Rotation(const Matrix3& m) : m_(m) {
  if (!m.allFinite()) throw Error(Errc::InvalidArgument, "rotation has non-finite entries");
  const double ortho = (m.transpose() * m - Matrix3::Identity()).norm();
  const double det = m.determinant();
  if (ortho > kRotationTol || std::abs(det - 1.0) > kRotationTol) {
    std::ostringstream os;
    os << "matrix is not in SO(3) (|RtR - I| = " << ortho << ", det = " << det << ")";
    throw Error(Errc::InvalidArgument, os.str());
  }
}

Rotation Rotation::project(const Matrix3& r) {
  return Rotation(0.5 * r * (3.0 * Matrix3::Identity() - r.transpose() * r), Unchecked{});
}

UnitVector3 Rotation::z_axis() const { return UnitVector3::normalize(m_.col(2)); }

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Matrix3::Identity()).norm();
}

Matrix3 hat(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Vector3 vee(const Matrix3& m) {
  if ((m + m.transpose()).norm() > 1e-6) {
    throw Error(Errc::NotSkewSymmetric, "vee() of a matrix that is not skew-symmetric");
  }
  return Vector3(m(2, 1), m(0, 2), m(1, 0));
}

Rotation exp_so3(const Vector3& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;
  double b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Matrix3 w = hat(v);
  return Rotation::unchecked(Matrix3::Identity() + a * w + b * w * w);
}

namespace {

// Flip so the first component with |x| > 1e-12 is positive.
Vector3 canonical_sign(const Vector3& axis) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis[i]) > 1e-12) return axis[i] > 0.0 ? axis : Vector3(-axis);
  }
  return axis;
}

}  // namespace

Vector3 log_so3(const Rotation& r) {
  const Matrix3& m = r.matrix();
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const Vector3 s_vec(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
                      0.5 * (m(1, 0) - m(0, 1)));
  const double s = s_vec.norm();
  const double theta = std::atan2(s, c);

  if (theta < kSmallAngle) {
    return s_vec * (1.0 + s * s / 6.0);
  }
  if (c > -0.99) {
    return s_vec * (theta / s);
  }

  // Near pi: sin(theta) carries no usable axis information, so read xi xi^T
  // off the symmetric part, sym(R) = cos(theta) I + (1 - cos(theta)) xi xi^T.
  const Matrix3 outer = (sym(m) - c * Matrix3::Identity()) / (1.0 - c);
  int j = 0;
  outer.diagonal().maxCoeff(&j);
  Vector3 axis = outer.col(j) / std::sqrt(std::max(outer(j, j), 1e-300));
  axis.normalize();
  const double along = axis.dot(s_vec);
  if (std::abs(along) > 1e-14) {
    if (along < 0.0) axis = -axis;
  } else {
    axis = canonical_sign(axis);
  }
  return theta * axis;
}

AxisAngle axis_angle(const Rotation& r) {
  const Vector3 v = log_so3(r);
  const double angle = v.norm();
  if (angle == 0.0) return AxisAngle{UnitVector3::e3(), 0.0};
  return AxisAngle{UnitVector3::normalize(v), angle};
}

double phi(const Rotation& r) { return 0.5 * (3.0 - r.matrix().trace()); }

double phi_frobenius(const Rotation& r) {
  return 0.25 * (Matrix3::Identity() - r.matrix()).squaredNorm();
}

namespace {

// Unit null vector of a rank-2 symmetric matrix: the largest cross product
// of two of its rows.
Vector3 null_vector(const Matrix3& c) {
  const Vector3 r0 = c.row(0), r1 = c.row(1), r2 = c.row(2);
  const Vector3 candidates[3] = {r0.cross(r1), r0.cross(r2), r1.cross(r2)};
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (candidates[i].squaredNorm() > candidates[best].squaredNorm()) best = i;
  }
  return candidates[best].normalized();
}

}  // namespace

double lambda_min_sym3(const Matrix3& m) {
  if ((m - m.transpose()).norm() > 1e-9 * std::max(1.0, m.norm())) {
    throw Error(Errc::NotSymmetric, "lambda_min_sym3() of a non-symmetric matrix");
  }
  const Matrix3 a = sym(m);
  const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  if (off == 0.0) return a.diagonal().minCoeff();

  const double q = a.trace() / 3.0;
  const double d0 = a(0, 0) - q;
  const double d1 = a(1, 1) - q;
  const double d2 = a(2, 2) - q;
  const double p = std::sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off) / 6.0);
  if (p == 0.0) return q;
  const Matrix3 b = (a - q * Matrix3::Identity()) / p;
  const double half_det = std::clamp(0.5 * b.determinant(), -1.0, 1.0);
  const double angle = std::acos(half_det) / 3.0;
  constexpr double kThird = 2.0 * std::numbers::pi / 3.0;
  // Eigenvalues q + 2p cos(angle + 2 pi k / 3): k = 1 smallest, k = 0 largest.
  const double lo = q + 2.0 * p * std::cos(angle + kThird);
  const double hi = q + 2.0 * p * std::cos(angle);
  const double mid = 3.0 * q - lo - hi;

  // The trigonometric root loses half the digits at a double eigenvalue.
  // Recover full accuracy from the eigenvector of whichever extreme
  // eigenvalue is better separated, which is well conditioned.
  if (mid - lo >= hi - mid) {
    const Vector3 v = null_vector(a - lo * Matrix3::Identity());
    return v.dot(a * v);
  }
  const Vector3 v = null_vector(a - hi * Matrix3::Identity());
  const Vector3 u = (std::abs(v.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY()).cross(v).normalized();
  const Vector3 w = v.cross(u);
  const double auu = u.dot(a * u);
  const double aww = w.dot(a * w);
  const double auw = u.dot(a * w);
  return 0.5 * (auu + aww) - std::hypot(0.5 * (auu - aww), auw);
}

Rotation step_rotation(const Rotation& r, const Vector3& omega_body, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "step_rotation requires dt > 0");
  return Rotation::project(r.matrix() * exp_so3(omega_body * dt).matrix());
}

Rotation step_rotation_spatial(const Rotation& r, const Vector3& omega_spatial, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "step_rotation requires dt > 0");
  return Rotation::project(exp_so3(omega_spatial * dt).matrix() * r.matrix());
}

Vector3 dexp_inv(const Vector3& theta, const Vector3& v) {
  const Vector3 tv = theta.cross(v);
  return v - 0.5 * tv + theta.cross(tv) / 12.0;
}

Rotation step_rotation_rkmk4(const Rotation& r, const BodyVelocityField& field, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "step_rotation requires dt > 0");
  const Matrix3& r0 = r.matrix();
  auto at = [&](const Vector3& theta) {
    return Rotation::unchecked(r0 * exp_so3(theta).matrix());
  };
  const Vector3 k1 = field(r);
  const Vector3 t2 = 0.5 * dt * k1;
  const Vector3 k2 = dexp_inv(-t2, field(at(t2)));
  const Vector3 t3 = 0.5 * dt * k2;
  const Vector3 k3 = dexp_inv(-t3, field(at(t3)));
  const Vector3 t4 = dt * k3;
  const Vector3 k4 = dexp_inv(-t4, field(at(t4)));
  const Vector3 theta = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return Rotation::project(r0 * exp_so3(theta).matrix());
}

}  // namespace attnav
