#include "attnav/human_operator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "attnav/error.hpp"

namespace attnav {

using json = nlohmann::json;
using cd = std::complex<double>;

cd SecondOrderEntry::response(double omega) const {
  const cd s(0.0, omega);
  const cd den = s * s + a1 * s + a0;
  if (std::abs(den) < 1e-12) {
    throw Error(Errc::PoleOnAxis, "transfer function has a pole on the imaginary axis");
  }
  return (b1 * s + b0) / den;
}

Matrix2c TransferMatrix2x2::response(double omega) const {
  Matrix2c h;
  h(0, 0) = diag[0].response(omega);
  h(1, 1) = diag[1].response(omega);
  h(0, 1) = offdiag[0];
  h(1, 0) = offdiag[1];
  return h;
}

Eigen::Matrix2d TransferMatrix2x2::dc_gain() const { return response(0.0).real(); }

Matrix2c StateSpace::response(double omega) const {
  const Eigen::Matrix4cd resolvent = cd(0.0, omega) * Eigen::Matrix4cd::Identity() - a.cast<cd>();
  return c.cast<cd>() * resolvent.partialPivLu().solve(b.cast<cd>()) + d.cast<cd>();
}

StateSpace realize(const TransferMatrix2x2& h) {
  StateSpace ss;
  for (int i = 0; i < 2; ++i) {
    const auto& e = h.diag[static_cast<std::size_t>(i)];
    const int k = 2 * i;
    ss.a(k, k + 1) = 1.0;
    ss.a(k + 1, k) = -e.a0;
    ss.a(k + 1, k + 1) = -e.a1;
    ss.b(k + 1, i) = 1.0;
    ss.c(i, k) = e.b0;
    ss.c(i, k + 1) = e.b1;
  }
  ss.d(0, 1) = h.offdiag[0];
  ss.d(1, 0) = h.offdiag[1];
  return ss;
}

DiscreteStateSpace discretize_zoh(const StateSpace& ss, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "discretization step must be positive");
  Eigen::Matrix<double, 6, 6> aug = Eigen::Matrix<double, 6, 6>::Zero();
  aug.topLeftCorner<4, 4>() = ss.a * dt;
  aug.topRightCorner<4, 2>() = ss.b * dt;
  const Eigen::Matrix<double, 6, 6> e = aug.exp();
  DiscreteStateSpace out;
  out.a = e.topLeftCorner<4, 4>();
  out.b = e.topRightCorner<4, 2>();
  out.c = ss.c;
  out.d = ss.d;
  out.dt = dt;
  return out;
}

Eigen::MatrixX2d simulate_zoh(const TransferMatrix2x2& h, const Eigen::MatrixX2d& input, double dt) {
  const DiscreteStateSpace m = discretize_zoh(realize(h), dt);
  const Eigen::Index n = input.rows();
  Eigen::MatrixX2d out(n, 2);
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector2 u = input.row(k).transpose();
    out.row(k) = (m.c * x + m.d * u).transpose();
    x = m.a * x + m.b * u;
  }
  return out;
}

OperatorModel::OperatorModel(const TransferMatrix2x2& structure, double rate_hz)
    : structure_(structure), rate_hz_(rate_hz) {
  if (!structure.hurwitz()) {
    throw Error(Errc::UnstableModel, "operator denominators must satisfy a1 > 0, a0 > 0");
  }
  if (!(rate_hz > 0.0)) throw Error(Errc::InvalidArgument, "operator rate must be positive");
  continuous_ = realize(structure);
  discrete_ = discretize_zoh(continuous_, 1.0 / rate_hz);
}

Vector2 OperatorModel::step(const Vector2& error) {
  const Vector2 u = discrete_.c * x_ + discrete_.d * error;
  x_ = discrete_.a * x_ + discrete_.b * error;
  return u;
}

Vector3 saturate(const Vector3& v, double limit) {
  const double n = v.norm();
  if (n <= limit * (1.0 + 1e-12)) return v;
  return v * (limit / n);
}

Vector2 compute_error(const LeaderState& leader, const ReferenceState& reference) {
  const Vector3 full =
      vee(sk(leader.rotation.matrix().transpose() * reference.rotation.matrix()));
  return full.head<2>();
}

OperatorSignals signals_from_spatial(const Vector3& omega_spatial, const Vector2& error_e,
                                     const LeaderState& leader) {
  OperatorSignals sig;
  sig.error_e = error_e;
  sig.omega_h_spatial = saturate(omega_spatial);
  sig.omega_h_body = leader.rotation.matrix().transpose() * sig.omega_h_spatial;
  sig.u_h = sig.omega_h_body.head<2>();
  return sig;
}

OperatorSignals synthetic_operator_step(OperatorModel& model, const Vector2& error_e,
                                        const LeaderState& leader, double dt) {
  if (std::abs(dt - model.dt()) > 1e-9 * model.dt()) {
    throw Error(Errc::RateMismatch, "tick dt does not match the operator discretization");
  }
  const Vector2 u = model.step(error_e);
  const Vector3 body(u.x(), u.y(), 0.0);
  const Matrix3& rl = leader.rotation.matrix();
  const Vector3 spatial = saturate(rl * body);

  OperatorSignals sig;
  sig.error_e = error_e;
  sig.omega_h_spatial = spatial;
  // Recompute the body command from the saturated spatial one; uniform
  // scaling keeps the third component at zero, which is pinned exactly.
  sig.omega_h_body = rl.transpose() * spatial;
  sig.omega_h_body.z() = 0.0;
  sig.u_h = sig.omega_h_body.head<2>();
  return sig;
}

TransferMatrix2x2 passive_reference_model() {
  return TransferMatrix2x2::diagonal(SecondOrderEntry{2.0, 3.0, 3.0, 4.0});
}

Vector3 teleop_command_map(const Rotation& r_t, const Rotation& r_0, double k_omega) {
  if (!(k_omega > 0.0)) throw Error(Errc::InvalidArgument, "k_omega must be positive");
  // R R^T rounds to a few ulps off identity; an unmoved controller commands nothing.
  if (r_t.matrix() == r_0.matrix()) return Vector3::Zero();
  return saturate(k_omega * log_so3(r_t * r_0.transpose()));
}

OperatorSignals ZeroOperator::act(const OperatorContext& ctx) {
  return signals_from_spatial(Vector3::Zero(), compute_error(*ctx.leader, *ctx.reference),
                              *ctx.leader);
}

OperatorSignals SyntheticOperator::act(const OperatorContext& ctx) {
  return synthetic_operator_step(model_, compute_error(*ctx.leader, *ctx.reference), *ctx.leader,
                                 ctx.dt);
}

ScriptedOperator::ScriptedOperator(std::vector<ScheduleEntry> schedule)
    : schedule_(std::move(schedule)) {
  std::sort(schedule_.begin(), schedule_.end(),
            [](const ScheduleEntry& a, const ScheduleEntry& b) { return a.t0 < b.t0; });
  for (std::size_t i = 0; i < schedule_.size(); ++i) {
    if (!(schedule_[i].t1 > schedule_[i].t0)) {
      throw Error(Errc::InvalidArgument, "schedule interval must have t1 > t0");
    }
    if (i > 0 && schedule_[i].t0 < schedule_[i - 1].t1) {
      throw Error(Errc::InvalidArgument, "schedule intervals overlap");
    }
  }
}

Vector3 ScriptedOperator::command_at(double t, double dt) const {
  const double half = 0.5 * dt;
  // First entry whose end lies after t.
  auto it = std::upper_bound(schedule_.begin(), schedule_.end(), t,
                             [half](double time, const ScheduleEntry& e) { return time < e.t1 - half; });
  if (it != schedule_.end() && t >= it->t0 - half) return it->omega_spatial;
  return Vector3::Zero();
}

OperatorSignals ScriptedOperator::act(const OperatorContext& ctx) {
  return signals_from_spatial(command_at(ctx.t, ctx.dt),
                              compute_error(*ctx.leader, *ctx.reference), *ctx.leader);
}

namespace {

double require_number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(Errc::ParseError, std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace

namespace {

OperatorModelFile parse_operator_model_json(json j);

}  // namespace

OperatorModelFile parse_operator_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  try {
    return parse_operator_model_json(std::move(j));
  } catch (const json::exception& e) {
    // Missing keys and wrong container types surface here.
    throw Error(Errc::ParseError, std::string("malformed operator model: ") + e.what());
  }
}

namespace {

OperatorModelFile parse_operator_model_json(json j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "operator model must be a JSON object");
  // An identification result carries the model under "params".
  if (j.contains("params") && j.contains("fit_id")) {
    const json params = j["params"];
    j = params;
    if (!j.is_object()) throw Error(Errc::ParseError, "params must be a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "rate_hz" && key != "diag" && key != "offdiag" && key != "v") {
      throw Error(Errc::ParseError, "unknown key in operator model: " + key);
    }
  }
  OperatorModelFile out;
  if (j.contains("rate_hz")) out.rate_hz = require_number(j["rate_hz"], "rate_hz");
  const json& diag = j.at("diag");
  if (!diag.is_array() || diag.size() != 2) throw Error(Errc::ParseError, "diag needs 2 entries");
  for (std::size_t i = 0; i < 2; ++i) {
    const json& num = diag[i].at("num");
    const json& den = diag[i].at("den");
    if (!num.is_array() || num.size() != 2 || !den.is_array() || den.size() != 2) {
      throw Error(Errc::ParseError, "diag entries need num:[b1,b0] and den:[a1,a0]");
    }
    out.model.diag[i] = SecondOrderEntry{require_number(num[0], "b1"), require_number(num[1], "b0"),
                                         require_number(den[0], "a1"), require_number(den[1], "a0")};
  }
  if (j.contains("offdiag")) {
    const json& off = j["offdiag"];
    if (!off.is_array() || off.size() != 2) throw Error(Errc::ParseError, "offdiag needs [h12, h21]");
    out.model.offdiag = {require_number(off[0], "h12"), require_number(off[1], "h21")};
  }
  return out;
}

}  // namespace

std::string operator_model_to_json(const TransferMatrix2x2& model, double rate_hz) {
  json j;
  j["rate_hz"] = rate_hz;
  j["diag"] = json::array();
  for (const auto& e : model.diag) {
    j["diag"].push_back({{"num", {e.b1, e.b0}}, {"den", {e.a1, e.a0}}});
  }
  j["offdiag"] = {model.offdiag[0], model.offdiag[1]};
  return j.dump(2);
}

OperatorModelFile load_operator_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IOFailure, "cannot open operator model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_operator_model(ss.str());
}

}  // namespace attnav
