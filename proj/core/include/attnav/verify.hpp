#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attnav/trajectory.hpp"

namespace attnav {

struct VerifyOptions {
  double orthonormality_tol = 1e-9;
  double z_axis_tol = 1e-4;
  double invariance_tol = 1e-9;
  /// Allowed per-step increase of V is v_abs_slack + v_slack_rate * dt.
  double v_abs_slack = 1e-6;
  double v_slack_rate = 1e-4;
  double saturation_limit = kOmegaMax;
  double stealth_tol = 1e-5;
  /// Objective check: each trial must bring |d̄ - d_r| below objective_tol
  /// within objective_horizon_s of its start. Off unless requested.
  bool check_objective = false;
  double objective_tol = 1e-3;
  double objective_horizon_s = 30.0;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;      // worst observed value of the checked quantity
  double threshold = 0.0;  // value it was compared against
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  int trials = 0;
  int trials_excluded = 0;  // invariance / V checks skipped: assumption not met

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Runs every check on `record`. With `paired`, also compares the d̄
/// series of the two runs (stealthiness).
VerifyReport verify_invariants(const TrajectoryRecord& record,
                               const TrajectoryRecord* paired = nullptr,
                               const VerifyOptions& options = {});

}  // namespace attnav
