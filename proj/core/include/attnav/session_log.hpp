#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "attnav/scenario.hpp"
#include "attnav/trajectory.hpp"

namespace attnav {

/// One logged tick of a human-in-the-loop session.
struct SessionSample {
  double t = 0.0;
  Vector2 error_e = Vector2::Zero();
  Vector2 u_h = Vector2::Zero();
  Vector3 omega_s = Vector3::Zero();
  Matrix3 rl = Matrix3::Identity();
  Matrix3 rbar = Matrix3::Identity();
  Matrix3 rr = Matrix3::Identity();
  Vector3 d_r = Vector3::UnitZ();
  int trial_id = 0;
  bool start_pressed = true;
  /// Set on the first tick after the real-time loop had to drop wall time.
  bool gap = false;
};

struct SessionLog {
  double rate_hz = kDefaultRateHz;
  std::vector<SessionSample> samples;

  double dt() const { return 1.0 / rate_hz; }
  /// Uniform time base at rate_hz (within 1e-6 dt) and valid rotations.
  /// Throws InvalidArgument.
  void validate() const;
};

/// CSV: an optional "# attnav-session v=1 rate_hz=..." line, then the header
///   t,e1,e2,u1,u2,ws_x,ws_y,ws_z,Rl_00..Rl_22,Rbar_00..,Rr_00..,dr_x,dr_y,dr_z,
///   trial,start_pressed,gap
/// Without the metadata line the rate is taken from the first time step.
void write_session_csv(const SessionLog& log, std::ostream& out);
void write_session_csv(const SessionLog& log, const std::filesystem::path& path);
SessionLog read_session_csv(std::istream& in);
SessionLog read_session_csv(const std::filesystem::path& path);

/// Session view of a simulated trajectory (start_pressed true throughout).
/// The final observe-only row is included.
SessionLog session_from_trajectory(const TrajectoryRecord& record);

/// Scenario that replays `log` on top of `base` (same bodies, seed and
/// gains): a scripted operator playing the logged ω_h^s tick by tick and a
/// reference schedule carrying the logged R_r at every trial change. The
/// duration covers the logged ticks.
ScenarioConfig replay_scenario(const SessionLog& log, const ScenarioConfig& base);

}  // namespace attnav
