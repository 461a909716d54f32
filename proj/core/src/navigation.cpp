#include "attnav/navigation.hpp"

#include <cmath>
#include <numbers>

#include "attnav/error.hpp"

namespace attnav {

SyncGains::SyncGains(double k_s) : k_s_(k_s) {
  if (!(k_s > 0.0) || !std::isfinite(k_s)) {
    throw Error(Errc::InvalidArgument, "sync gain k_s must be positive");
  }
}

Rotation align_z_axis(const UnitVector3& target, const Rotation& base) {
  const Vector3 from = base.matrix().col(2);
  const Vector3& to = target.vec();
  const double cos_angle = from.dot(to);
  if (cos_angle < -1.0 + 1e-9) {
    const Vector3 axis = base.matrix().col(0);
    return Rotation::project(exp_so3(std::numbers::pi * axis).matrix() * base.matrix());
  }
  const Vector3 cross = from.cross(to);
  const double sin_angle = cross.norm();
  if (sin_angle == 0.0) return base;
  const double angle = std::atan2(sin_angle, cos_angle);
  return Rotation::project(exp_so3(cross * (angle / sin_angle)).matrix() * base.matrix());
}

Vector3 human_filter_command(const QuasiAverageState& qa, const LeaderState& leader,
                             const SyncGains& gains) {
  const Matrix3& rbar = qa.rotation.matrix();
  return gains.k_s() * rbar * vee(sk(rbar.transpose() * leader.rotation.matrix()));
}

Vector3 leader_velocity(const LeaderState& leader, const QuasiAverageState& qa,
                        const Vector3& omega_h_spatial, const SyncGains& gains) {
  const Matrix3& rl = leader.rotation.matrix();
  return gains.k_s() * vee(sk(rl.transpose() * qa.rotation.matrix())) +
         rl.transpose() * omega_h_spatial;
}

NavigationStep step_navigation(const QuasiAverageState& qa, const LeaderState& leader,
                               const ReferenceState& /*reference*/, const SyncGains& gains,
                               const Vector3& omega_h_spatial, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "step_navigation requires dt > 0");
  const Vector3 omega_tilde = human_filter_command(qa, leader, gains);
  const Vector3 omega_l = leader_velocity(leader, qa, omega_h_spatial, gains);
  return NavigationStep{
      QuasiAverageState{step_rotation_spatial(qa.rotation, omega_tilde, dt)},
      LeaderState{step_rotation(leader.rotation, omega_l, dt)},
      omega_tilde,
  };
}

RelativeRotations relative_rotations(const QuasiAverageState& qa, const LeaderState& leader,
                                     const ReferenceState& reference) {
  const Rotation rt = reference.rotation.transpose();
  return RelativeRotations{rt * leader.rotation, rt * qa.rotation};
}

}  // namespace attnav
