#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "attnav/human_operator.hpp"
#include "attnav/so3.hpp"

namespace attnav {

/// Everything observed at one tick: the state at t and the commands
/// computed from it.
struct TrajectoryRow {
  double t = 0.0;
  int trial_id = 0;
  std::vector<Matrix3> bodies;
  Matrix3 rbar = Matrix3::Identity();
  Matrix3 rl = Matrix3::Identity();
  Matrix3 rr = Matrix3::Identity();
  Vector3 d_bar = Vector3::UnitZ();
  Vector3 d_l = Vector3::UnitZ();
  Vector3 d_r = Vector3::UnitZ();
  Vector3 omega_tilde = Vector3::Zero();  // ω̃_h^s
  Vector3 omega_s = Vector3::Zero();      // ω_h^s
  Vector3 omega_b = Vector3::Zero();      // ω_h^b
  Vector2 error_e = Vector2::Zero();
  double omega_a_norm = 0.0;
  double s_r = 0.0;
  double s_rl = 0.0;
  double i_h = 0.0;
  double s_h = 0.0;
  double v = 0.0;
  double bound = 0.0;
  double h = 0.0;
  bool on_boundary = false;
  double sym_min_eig = 0.0;
  bool positive_definite = false;
};

struct TrajectoryRecord {
  int n = 0;
  double dt = 0.0;
  double k_s = 0.0;
  double beta = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<TrajectoryRow> rows;
};

/// CSV with a leading "# attnav-trajectory" metadata line, a header row and
/// one row per tick; doubles are written with 17 significant digits so
/// reading back is exact.
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out);
void write_trajectory_csv(const TrajectoryRecord& record, const std::filesystem::path& path);
TrajectoryRecord read_trajectory_csv(std::istream& in);
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);

}  // namespace attnav
