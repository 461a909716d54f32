#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "attnav/navigation.hpp"
#include "attnav/so3.hpp"

namespace attnav {

using Vector2 = Eigen::Vector2d;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kOmegaMax = 1.0;     // rad/s, saturation of |ω_h^s|
inline constexpr double kOmegaGain = 0.8;    // k_ω of the controller-attitude mapping
inline constexpr double kDefaultRateHz = 120.0;

/// (b1 s + b0) / (s^2 + a1 s + a0)
struct SecondOrderEntry {
  double b1 = 0.0;
  double b0 = 0.0;
  double a1 = 1.0;
  double a0 = 1.0;

  bool hurwitz() const { return a1 > 0.0 && a0 > 0.0; }
  /// Throws PoleOnAxis if |den(jω)| < 1e-12.
  std::complex<double> response(double omega) const;
};

/// 2x2 operator model: second-order diagonal entries, constant off-diagonals.
struct TransferMatrix2x2 {
  std::array<SecondOrderEntry, 2> diag{};
  std::array<double, 2> offdiag{0.0, 0.0};  // h12, h21

  bool hurwitz() const { return diag[0].hurwitz() && diag[1].hurwitz(); }
  /// H(jω). Throws PoleOnAxis.
  Matrix2c response(double omega) const;
  /// H(0); nonsingular DC gain is what makes "ω_h = 0 only if e = 0" hold for LTI models.
  Eigen::Matrix2d dc_gain() const;

  static TransferMatrix2x2 diagonal(const SecondOrderEntry& entry) {
    return TransferMatrix2x2{{entry, entry}, {0.0, 0.0}};
  }
};

struct StateSpace {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  Eigen::Matrix<double, 2, 4> c = Eigen::Matrix<double, 2, 4>::Zero();
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();

  Matrix2c response(double omega) const;
};

struct DiscreteStateSpace {
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  Eigen::Matrix<double, 2, 4> c = Eigen::Matrix<double, 2, 4>::Zero();
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  double dt = 0.0;
};

/// Controllable canonical form per diagonal entry; x = [x1, x1', x2, x2'].
StateSpace realize(const TransferMatrix2x2& h);
/// Exact for piecewise-constant input (matrix exponential of the augmented system).
DiscreteStateSpace discretize_zoh(const StateSpace& ss, double dt);

/// Zero-initial-state response of `h` to a sampled input (rows = samples,
/// columns = 2 channels), input held constant between samples.
Eigen::MatrixX2d simulate_zoh(const TransferMatrix2x2& h, const Eigen::MatrixX2d& input, double dt);

/// LTI operator with internal state, discretized at a fixed rate.
class OperatorModel {
 public:
  /// Throws UnstableModel if the structure is not Hurwitz.
  OperatorModel(const TransferMatrix2x2& structure, double rate_hz);

  const TransferMatrix2x2& structure() const { return structure_; }
  const StateSpace& realization() const { return continuous_; }
  const DiscreteStateSpace& discrete() const { return discrete_; }
  double rate_hz() const { return rate_hz_; }
  double dt() const { return discrete_.dt; }
  const Eigen::Vector4d& state() const { return x_; }

  /// u = C x + D e, then x <- A_d x + B_d e.
  Vector2 step(const Vector2& error);
  void reset() { x_.setZero(); }

 private:
  TransferMatrix2x2 structure_;
  double rate_hz_;
  StateSpace continuous_;
  DiscreteStateSpace discrete_;
  Eigen::Vector4d x_ = Eigen::Vector4d::Zero();
};

struct OperatorSignals {
  Vector2 error_e = Vector2::Zero();
  Vector2 u_h = Vector2::Zero();
  Vector3 omega_h_body = Vector3::Zero();
  Vector3 omega_h_spatial = Vector3::Zero();
};

/// Clamps |v| to `limit`, preserving direction. Vectors already within
/// limit (1 + 1e-12) are returned bit-for-bit, so re-saturating a saturated
/// command is the identity.
Vector3 saturate(const Vector3& v, double limit = kOmegaMax);

/// First two components of sk(R_l^T R_r)^∨.
Vector2 compute_error(const LeaderState& leader, const ReferenceState& reference);

/// Advances the model one tick and maps its output to a saturated spatial
/// command with (ω_h^b)_3 = 0. Throws RateMismatch if dt differs from the
/// model's discretization step.
OperatorSignals synthetic_operator_step(OperatorModel& model, const Vector2& error_e,
                                        const LeaderState& leader, double dt);

/// Built-in strictly positive-real operator, diag((2s + 3)/(s^2 + 3s + 4)).
TransferMatrix2x2 passive_reference_model();

/// ω_h^s = k_ω log(R_t R_0^T)^∨, saturated at kOmegaMax.
Vector3 teleop_command_map(const Rotation& r_t, const Rotation& r_0, double k_omega = kOmegaGain);

/// What every operator sees at a tick: the leader and reference, never the
/// raw network.
struct OperatorContext {
  long tick = 0;
  double t = 0.0;
  double dt = 0.0;
  const LeaderState* leader = nullptr;
  const ReferenceState* reference = nullptr;
};

class HumanOperator {
 public:
  virtual ~HumanOperator() = default;
  virtual OperatorSignals act(const OperatorContext& ctx) = 0;
  /// Called when the reference changes (start of a new trial).
  virtual void on_trial_start(int /*trial_id*/) {}
};

class ZeroOperator final : public HumanOperator {
 public:
  OperatorSignals act(const OperatorContext& ctx) override;
};

class SyntheticOperator final : public HumanOperator {
 public:
  explicit SyntheticOperator(OperatorModel model) : model_(std::move(model)) {}
  OperatorSignals act(const OperatorContext& ctx) override;
  /// Each trial starts from rest (zero internal state).
  void on_trial_start(int /*trial_id*/) override { model_.reset(); }
  const OperatorModel& model() const { return model_; }

 private:
  OperatorModel model_;
};

struct ScheduleEntry {
  double t0 = 0.0;
  double t1 = 0.0;
  Vector3 omega_spatial = Vector3::Zero();
};

/// Plays back spatial commands on [t0, t1) intervals; zero elsewhere.
/// Tick k (t = k dt) is inside [t0, t1) when t0 - dt/2 <= t < t1 - dt/2.
class ScriptedOperator final : public HumanOperator {
 public:
  /// Throws InvalidArgument for overlapping or reversed intervals.
  explicit ScriptedOperator(std::vector<ScheduleEntry> schedule);
  OperatorSignals act(const OperatorContext& ctx) override;
  Vector3 command_at(double t, double dt) const;
  const std::vector<ScheduleEntry>& schedule() const { return schedule_; }

 private:
  std::vector<ScheduleEntry> schedule_;
};

/// Common tail of every operator: saturate, body-frame components, u_h.
OperatorSignals signals_from_spatial(const Vector3& omega_spatial, const Vector2& error_e,
                                     const LeaderState& leader);

// Operator model files:
// {"rate_hz": 120, "diag": [{"num": [b1, b0], "den": [a1, a0]}, ...], "offdiag": [h12, h21]}
struct OperatorModelFile {
  TransferMatrix2x2 model;
  double rate_hz = kDefaultRateHz;
};
OperatorModelFile parse_operator_model(const std::string& json_text);
std::string operator_model_to_json(const TransferMatrix2x2& model, double rate_hz);
OperatorModelFile load_operator_model(const std::filesystem::path& path);

}  // namespace attnav
