#include "attnav/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "attnav/error.hpp"

namespace attnav {

double passivity_index(const TransferMatrix2x2& model, double omega) {
  if (!(omega >= 0.0)) throw Error(Errc::InvalidArgument, "frequency must be nonnegative");
  const Matrix2c h = model.response(omega);
  const Matrix2c m = h + h.adjoint();
  // Hermitian 2x2: eigenvalues (tr ± sqrt((m11 - m22)^2 + 4|m12|^2)) / 2.
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double disc = std::hypot(a - d, 2.0 * std::abs(m(0, 1)));
  return 0.25 * (a + d - disc);
}

PassivityReport passivity_sweep(const TransferMatrix2x2& model, double omega_min,
                                double omega_max, int points) {
  const bool single = points == 1 && omega_min == omega_max;
  if (!(omega_min > 0.0) || (!single && (!(omega_max > omega_min) || points < 2))) {
    throw Error(Errc::InvalidArgument, "sweep needs 0 < omega_min < omega_max and points >= 2");
  }
  PassivityReport report;
  report.omega.reserve(static_cast<std::size_t>(points));
  report.nu.reserve(static_cast<std::size_t>(points));
  const double lo = std::log(omega_min);
  const double hi = std::log(omega_max);
  for (int i = 0; i < points; ++i) {
    const double w = single ? omega_min : std::exp(lo + (hi - lo) * i / (points - 1));
    report.omega.push_back(w);
    report.nu.push_back(passivity_index(model, w));
  }
  const auto worst = std::min_element(report.nu.begin(), report.nu.end());
  const auto idx = static_cast<std::size_t>(worst - report.nu.begin());
  report.worst_frequency = report.omega[idx];
  report.worst_value = *worst;
  report.is_passive = *worst >= -kPassivityTol;
  return report;
}

std::string passivity_report_csv(const PassivityReport& report) {
  std::ostringstream os;
  os << "omega,nu\n";
  char buf[64];
  for (std::size_t i = 0; i < report.omega.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", report.omega[i], report.nu[i]);
    os << buf;
  }
  return os.str();
}

std::string passivity_summary_json(const PassivityReport& report) {
  nlohmann::json j;
  j["is_passive"] = report.is_passive;
  j["worst_frequency"] = report.worst_frequency;
  j["worst_value"] = report.worst_value;
  j["beta_estimate"] = report.beta_estimate;
  return j.dump(2);
}

double dissipation_bound(const QuasiAverageState& qa, const LeaderState& leader,
                         const ReferenceState& reference, const SyncGains& gains) {
  const RelativeRotations rel = relative_rotations(qa, leader, reference);
  const Matrix3& rbar_r = rel.average_to_reference.matrix();
  const Matrix3& rrl = rel.leader_to_reference.matrix();
  const double lam_avg = lambda_min_sym3(rbar_r + rbar_r.transpose());
  const double lam_leader = lambda_min_sym3(rrl + rrl.transpose());
  const Rotation lead_avg = leader.rotation.transpose() * qa.rotation;
  return -0.5 * gains.k_s() * (lam_avg + lam_leader) * phi(lead_avg);
}

void EnergyLedger::tick(double t, const QuasiAverageState& qa, const LeaderState& leader,
                        const ReferenceState& reference, const Vector3& omega_h_body,
                        const SyncGains& gains, double dt,
                        const ReferenceState* step_reference) {
  const RelativeRotations rel = relative_rotations(qa, leader, reference);
  auto supply = [&](const ReferenceState& ref) {
    return Vector3(vee(sk(leader.rotation.matrix().transpose() * ref.rotation.matrix())));
  };
  const Vector3 supply_vector = supply(reference);
  const Vector3 step_end = step_reference != nullptr ? supply(*step_reference) : supply_vector;

  EnergyRecord rec;
  rec.t = t;
  rec.s_r = phi(rel.average_to_reference);
  rec.s_rl = phi(rel.leader_to_reference);
  if (records_.empty()) {
    rec.i_h = 0.0;
  } else {
    if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "energy tick requires dt > 0");
    rec.i_h = records_.back().i_h +
              0.5 * dt * (last_supply_vector_ + step_end).dot(omega_h_body);
  }
  rec.s_h = beta_ + rec.i_h;
  rec.v = rec.s_r + rec.s_rl + rec.s_h;
  rec.bound = dissipation_bound(qa, leader, reference, gains);
  records_.push_back(rec);
  last_supply_vector_ = supply_vector;
}

void EnergyLedger::set_beta(double beta) {
  beta_ = beta;
  for (auto& r : records_) {
    r.s_h = beta_ + r.i_h;
    r.v = r.s_r + r.s_rl + r.s_h;
  }
}

EnergyLedger energy_tick(EnergyLedger ledger, const QuasiAverageState& qa, const LeaderState& leader,
                         const ReferenceState& reference, const Vector3& omega_h_body,
                         const SyncGains& gains, double dt, double t) {
  ledger.tick(t, qa, leader, reference, omega_h_body, gains, dt);
  return ledger;
}

InvarianceRecord invariance_monitor(const QuasiAverageState& qa, const ReferenceState& reference) {
  const Matrix3 rbar_r = reference.rotation.matrix().transpose() * qa.rotation.matrix();
  InvarianceRecord rec;
  rec.h_value = rbar_r.trace() - 1.0;
  rec.on_boundary = std::abs(rec.h_value) < 1e-6;
  return rec;
}

AssumptionRecord assumption_monitor(const LeaderState& leader, const ReferenceState& reference) {
  const Matrix3 rrl = reference.rotation.matrix().transpose() * leader.rotation.matrix();
  AssumptionRecord rec;
  rec.sym_rrl_min_eig = lambda_min_sym3(rrl + rrl.transpose());
  rec.positive_definite = rec.sym_rrl_min_eig > 1e-9;
  return rec;
}

double estimate_beta(const std::vector<EnergyRecord>& records) {
  if (records.empty()) throw Error(Errc::InvalidArgument, "estimate_beta of an empty ledger");
  double beta = 0.0;
  for (const auto& r : records) beta = std::max(beta, -r.i_h);
  return beta;
}

double estimate_beta(const EnergyLedger& ledger) { return estimate_beta(ledger.records()); }

}  // namespace attnav
