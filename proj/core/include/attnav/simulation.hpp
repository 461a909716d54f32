#pragma once

#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "attnav/analysis.hpp"
#include "attnav/navigation.hpp"
#include "attnav/network.hpp"
#include "attnav/scenario.hpp"
#include "attnav/trajectory.hpp"

namespace attnav {

/// Operator whose spatial command is written from outside between ticks
/// (the teleop session). The command is passed through the usual
/// saturation pipeline.
class LiveOperator final : public HumanOperator {
 public:
  void set_command(const Vector3& omega_spatial) { command_ = omega_spatial; }
  const Vector3& command() const { return command_; }
  OperatorSignals act(const OperatorContext& ctx) override;

 private:
  Vector3 command_ = Vector3::Zero();
};

/// Builds the operator described by the scenario (Live yields a LiveOperator
/// holding zero).
std::unique_ptr<HumanOperator> make_operator(const ScenarioConfig& cfg);

/// Initial bodies, quasi-average and leader for a scenario. Consumes the
/// scenario RNG when the initial mode is random.
struct InitialState {
  std::vector<Rotation> bodies;
  Rotation rbar;
  Rotation rl;
};
InitialState make_initial_state(const ScenarioConfig& cfg, std::mt19937_64& rng);

/// The coupled loop of bodies, quasi-average, leader, reference and operator.
///
/// A tick at t = k dt:
///   1. starts a new trial if a reference change is due;
///   2. updates the energy ledger and monitors at the current state;
///   3. asks the operator for ω_h^s;
///   4. forms ω̃_h^s, the leader velocity and the projected autonomous input;
///   5. records the row;
///   6. advances bodies, R̄ and R_l together over [t, t + dt] with ω_h^s held.
class ClosedLoop {
 public:
  explicit ClosedLoop(ScenarioConfig cfg, std::unique_ptr<HumanOperator> op = nullptr);

  /// Runs steps 1-6 and returns the recorded row.
  TrajectoryRow step();
  /// Runs steps 2-5 without advancing (the last row of a record); no new
  /// trial is started.
  TrajectoryRow observe();

  /// Replaces the reference at the start of the next tick with one whose
  /// z-axis is `d_r` (a new trial).
  void request_reference(const UnitVector3& d_r);

  const ScenarioConfig& config() const { return cfg_; }
  long tick_index() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * cfg_.dt; }
  int trial_id() const { return trial_id_; }
  const NetworkState& network() const { return net_; }
  const QuasiAverageState& quasi_average() const { return qa_; }
  const LeaderState& leader() const { return leader_; }
  const ReferenceState& reference() const { return ref_; }
  const EnergyLedger& ledger() const { return ledger_; }
  EnergyLedger& ledger() { return ledger_; }
  HumanOperator& human() { return *op_; }

 private:
  struct Commands {
    OperatorSignals signals;
    Vector3 omega_tilde;
    VectorX omega_a;
  };

  TrajectoryRow tick(bool advance);
  void maybe_switch_reference();
  void start_trial(const Rotation& r_r);
  Commands commands();
  void advance_lie_euler(const Commands& c);
  void advance_rkmk4(const Commands& c);
  VectorX autonomous_input(const NetworkState& net) const;

  ScenarioConfig cfg_;
  SyncGains gains_;
  std::unique_ptr<HumanOperator> op_;
  std::mt19937_64 rng_;
  std::optional<Graph> graph_;
  InitialState init_;
  NetworkState net_;
  QuasiAverageState qa_;
  LeaderState leader_;
  ReferenceState ref_;
  EnergyLedger ledger_;
  long tick_ = 0;
  int trial_id_ = -1;
  std::size_t next_schedule_ = 0;
  std::optional<UnitVector3> requested_;
  Vector3 last_omega_b_ = Vector3::Zero();
};

/// Runs ticks 0..N-1 with steps and a final observe-only row at N dt.
/// DegenerateAverage ends the run early with `aborted` set; other errors
/// propagate. Without a configured β, the post-hoc estimate is used and S_h,
/// V are rewritten.
TrajectoryRecord run_scenario(const ScenarioConfig& cfg);
TrajectoryRecord run_scenario(const ScenarioConfig& cfg, std::unique_ptr<HumanOperator> op);

}  // namespace attnav
