#pragma once

#include <string>
#include <vector>

#include "attnav/human_operator.hpp"
#include "attnav/navigation.hpp"

namespace attnav {

/// ν(ω) = λ_min(H(jω) + H(jω)^H) / 2 via the closed-form 2x2 Hermitian
/// eigenvalue. Throws PoleOnAxis; InvalidArgument for ω < 0.
double passivity_index(const TransferMatrix2x2& model, double omega);

struct PassivityReport {
  std::vector<double> omega;  // rad/s, strictly increasing
  std::vector<double> nu;
  bool is_passive = true;
  double worst_frequency = 0.0;
  double worst_value = 0.0;
  double beta_estimate = 0.0;
};

inline constexpr double kPassivityTol = 1e-9;

/// Log-spaced sweep; is_passive = all ν >= -1e-9. A single point is allowed
/// when omega_min == omega_max.
PassivityReport passivity_sweep(const TransferMatrix2x2& model, double omega_min,
                                double omega_max, int points);

std::string passivity_report_csv(const PassivityReport& report);
std::string passivity_summary_json(const PassivityReport& report);

/// One row per tick. I_h is the human supply ∫ {sk(R_l^T R_r)^∨}^T ω_h^b dt,
/// so passivity reads I_h(τ) >= -β and the human storage is S_h = β + I_h.
struct EnergyRecord {
  double t = 0.0;
  double s_r = 0.0;
  double s_rl = 0.0;
  double i_h = 0.0;
  double s_h = 0.0;
  double v = 0.0;
  double bound = 0.0;  // right-hand side of the V' inequality (<= 0 under the assumptions)
};

class EnergyLedger {
 public:
  explicit EnergyLedger(double beta = 0.0) : beta_(beta) {}

  /// Appends the record for the current state. `omega_h_body` is the command
  /// that was applied over the step that ended at this tick (ignored for the
  /// first record); the supply integral is advanced by the trapezoidal rule
  /// on {sk(R_l^T R_r)^∨}^T ω_h^b over that step. When the reference changed
  /// at this tick, pass the one that was active during the step as
  /// `step_reference`.
  void tick(double t, const QuasiAverageState& qa, const LeaderState& leader,
            const ReferenceState& reference, const Vector3& omega_h_body, const SyncGains& gains,
            double dt, const ReferenceState* step_reference = nullptr);

  const std::vector<EnergyRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  double beta() const { return beta_; }
  /// Re-bases S_h and V on a new β (e.g. the post-hoc estimate).
  void set_beta(double beta);

 private:
  double beta_;
  std::vector<EnergyRecord> records_;
  Vector3 last_supply_vector_ = Vector3::Zero();
};

/// Free-function form of EnergyLedger::tick.
EnergyLedger energy_tick(EnergyLedger ledger, const QuasiAverageState& qa, const LeaderState& leader,
                         const ReferenceState& reference, const Vector3& omega_h_body,
                         const SyncGains& gains, double dt, double t);

/// -½ k_s {λ_min(R̄_r + R̄_r^T) + λ_min(R_rl + R_rl^T)} φ(R_l^T R̄).
double dissipation_bound(const QuasiAverageState& qa, const LeaderState& leader,
                         const ReferenceState& reference, const SyncGains& gains);

struct InvarianceRecord {
  double h_value = 0.0;  // tr(R̄_r) - 1
  bool on_boundary = false;
};
InvarianceRecord invariance_monitor(const QuasiAverageState& qa, const ReferenceState& reference);

struct AssumptionRecord {
  double sym_rrl_min_eig = 0.0;  // λ_min(R_rl + R_rl^T)
  bool positive_definite = false;
};
AssumptionRecord assumption_monitor(const LeaderState& leader, const ReferenceState& reference);

/// β = max(0, sup_τ -I_h(τ)). Throws InvalidArgument on an empty ledger.
double estimate_beta(const std::vector<EnergyRecord>& records);
double estimate_beta(const EnergyLedger& ledger);

}  // namespace attnav
