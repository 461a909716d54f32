#pragma once

#include "attnav/so3.hpp"

namespace attnav {

/// Virtual leader R_l, steered by the human; d_l = R_l e_3.
struct LeaderState {
  Rotation rotation;
  UnitVector3 direction() const { return rotation.z_axis(); }
};

/// Quasi-average rotation R̄; integrated from its own ODE so that R̄ e_3
/// tracks d̄ without being reset from the bodies.
struct QuasiAverageState {
  Rotation rotation;
};

/// Quasi-reference R_r (constant within a trial); d_r = R_r e_3.
struct ReferenceState {
  Rotation rotation;
  UnitVector3 direction() const { return rotation.z_axis(); }
};

/// Coupling strength k_s > 0 between R̄ and R_l.
class SyncGains {
 public:
  explicit SyncGains(double k_s);
  double k_s() const { return k_s_; }

 private:
  double k_s_;
};

/// Rotation with z-axis equal to `target` reached by the minimal geodesic
/// from `base` (rotating base e_3 onto target about base e_3 x target). For
/// an antipodal target the rotation is by pi about base e_1.
Rotation align_z_axis(const UnitVector3& target, const Rotation& base = Rotation::identity());

/// ω̃_h^s = k_s R̄ sk(R̄^T R_l)^∨ (spatial).
Vector3 human_filter_command(const QuasiAverageState& qa, const LeaderState& leader,
                             const SyncGains& gains);

/// ω_l = k_s sk(R_l^T R̄)^∨ + R_l^T ω_h^s (body).
Vector3 leader_velocity(const LeaderState& leader, const QuasiAverageState& qa,
                        const Vector3& omega_h_spatial, const SyncGains& gains);

struct NavigationStep {
  QuasiAverageState qa;
  LeaderState leader;
  Vector3 omega_h_tilde;
};

/// Computes ω̃_h^s from the current snapshot, then advances R̄ in the
/// spatial frame and R_l in the body frame (Lie-Euler).
NavigationStep step_navigation(const QuasiAverageState& qa, const LeaderState& leader,
                               const ReferenceState& reference, const SyncGains& gains,
                               const Vector3& omega_h_spatial, double dt);

struct RelativeRotations {
  Rotation leader_to_reference;   // R_rl = R_r^T R_l
  Rotation average_to_reference;  // R̄_r = R_r^T R̄
};

RelativeRotations relative_rotations(const QuasiAverageState& qa, const LeaderState& leader,
                                     const ReferenceState& reference);

}  // namespace attnav
