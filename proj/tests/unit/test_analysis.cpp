#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <json.hpp>

#include "attnav/analysis.hpp"
#include "attnav/error.hpp"
#include "attnav/scenario.hpp"
#include "attnav/simulation.hpp"
#include "eigen_expect.hpp"
#include "oracles.hpp"

using namespace attnav;

namespace {

Rotation rot(const Vector3& v) { return Rotation::project(oracle::rodrigues(v)); }

const SecondOrderEntry kFirstOrder{1.0, 1.0, 2.0, 1.0};       // (s + 1) / (s + 1)^2
const SecondOrderEntry kNonMinimum{1.0, -1.0, 2.0, 1.0};      // (s - 1) / (s + 1)^2
const SecondOrderEntry kLightlyDamped{0.0, 1.0, 0.5, 1.0};    // 1 / (s^2 + 0.5 s + 1)

// Smallest eigenvalue of the realified Hermitian part, scaled to ν.
double realified_nu(const TransferMatrix2x2& model, double w) {
  const Matrix2c h = model.response(w);
  const Matrix2c m = 0.5 * (h + h.adjoint());
  Eigen::Matrix4d big;
  big << m.real(), -m.imag(), m.imag(), m.real();
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(big).eigenvalues().minCoeff();
}

TEST(PassivityIndex, FirstOrderLowPass) {
  const auto h = TransferMatrix2x2::diagonal(kFirstOrder);
  for (double w : {0.0, 0.1, 1.0, 3.0, 50.0}) EXPECT_NEAR(passivity_index(h, w), 1.0 / (1.0 + w * w), 1e-14);
}

TEST(PassivityIndex, NonMinimumPhaseIsNotPassiveAtDc) {
  EXPECT_NEAR(passivity_index(TransferMatrix2x2::diagonal(kNonMinimum), 0.0), -1.0, 1e-15);
}

TEST(PassivityIndex, ConstantCrossCoupling) {
  // Zero diagonal dynamics and [[0, 1], [1, 0]] coupling: eigenvalues ±1.
  const TransferMatrix2x2 h{{SecondOrderEntry{0.0, 0.0, 1.0, 1.0}, SecondOrderEntry{0.0, 0.0, 1.0, 1.0}}, {1.0, 1.0}};
  for (double w : {0.0, 1.0, 10.0}) EXPECT_NEAR(passivity_index(h, w), -1.0, 1e-15);
}

TEST(PassivityIndex, Errors) {
  EXPECT_THROW(passivity_index(passive_reference_model(), -1.0), Error);
  try {
    passivity_index(TransferMatrix2x2::diagonal(SecondOrderEntry{1.0, 0.0, 0.0, 4.0}), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PoleOnAxis);
  }
}

TEST(PassivityIndex, PropertyMatchesRealifiedEigensolve) {
  oracle::Gen g(51);
  for (int trial = 0; trial < 200; ++trial) {
    TransferMatrix2x2 h;
    for (auto& e : h.diag) e = SecondOrderEntry{g.uniform(-3, 3), g.uniform(-3, 3), g.uniform(0.1, 5), g.uniform(0.1, 10)};
    h.offdiag = {g.uniform(-2, 2), g.uniform(-2, 2)};
    for (double w : oracle::log_grid(1e-2, 1e2, 20)) {
      const double scale = std::max(1.0, h.response(w).norm());
      EXPECT_NEAR(passivity_index(h, w), realified_nu(h, w), 1e-12 * scale);
    }
  }
}

TEST(PassivitySweep, PassiveReferenceModel) {
  const PassivityReport r = passivity_sweep(passive_reference_model(), 1e-2, 1e2, 400);
  EXPECT_TRUE(r.is_passive);
  ASSERT_EQ(r.omega.size(), 400u);
  EXPECT_DOUBLE_EQ(r.omega.front(), 1e-2);
  EXPECT_NEAR(r.omega.back(), 1e2, 1e-10);
  for (std::size_t i = 1; i < r.omega.size(); ++i) EXPECT_GT(r.omega[i], r.omega[i - 1]);
  EXPECT_GE(r.worst_value, 0.0);
}

TEST(PassivitySweep, BracketsAnalyticCrossing) {
  // Re 1/(1 - w^2 + 0.5 j w) changes sign at w = 1.
  const auto h = TransferMatrix2x2::diagonal(kLightlyDamped);
  const PassivityReport r = passivity_sweep(h, 1e-2, 1e2, 400);
  EXPECT_FALSE(r.is_passive);
  EXPECT_LT(r.worst_value, 0.0);
  const auto first_negative = std::find_if(r.nu.begin(), r.nu.end(), [](double v) { return v < 0.0; });
  ASSERT_NE(first_negative, r.nu.end());
  const auto i = static_cast<std::size_t>(first_negative - r.nu.begin());
  ASSERT_GT(i, 0u);
  EXPECT_LE(r.omega[i - 1], 1.0);
  EXPECT_GE(r.omega[i], 1.0);
  // The reported worst point is the grid minimum of the analytic real part.
  double best = 1e300;
  double best_w = 0.0;
  for (double w : r.omega) {
    const double re = oracle::entry_response(kLightlyDamped, w).real();
    if (re < best) {
      best = re;
      best_w = w;
    }
  }
  EXPECT_EQ(r.worst_frequency, best_w);
  EXPECT_NEAR(r.worst_value, best, 1e-14);
}

TEST(PassivitySweep, SinglePointAndErrors) {
  const PassivityReport r = passivity_sweep(passive_reference_model(), 2.0, 2.0, 1);
  ASSERT_EQ(r.nu.size(), 1u);
  EXPECT_EQ(r.nu[0], passivity_index(passive_reference_model(), 2.0));
  EXPECT_THROW(passivity_sweep(passive_reference_model(), 0.0, 1.0, 10), Error);
  EXPECT_THROW(passivity_sweep(passive_reference_model(), 2.0, 1.0, 10), Error);
  EXPECT_THROW(passivity_sweep(passive_reference_model(), 1.0, 2.0, 1), Error);
}

TEST(PassivitySweep, Serialization) {
  const PassivityReport r = passivity_sweep(TransferMatrix2x2::diagonal(kNonMinimum), 1e-1, 1e1, 5);
  const std::string csv = passivity_report_csv(r);
  EXPECT_EQ(csv.rfind("omega,nu\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  const auto j = nlohmann::json::parse(passivity_summary_json(r));
  EXPECT_EQ(j.at("is_passive").get<bool>(), false);
  EXPECT_EQ(j.at("worst_value").get<double>(), r.worst_value);
  EXPECT_TRUE(j.contains("worst_frequency"));
  EXPECT_TRUE(j.contains("beta_estimate"));
}

TEST(InvarianceMonitor, Examples) {
  EXPECT_NEAR(invariance_monitor({Rotation::identity()}, {Rotation::identity()}).h_value, 2.0, 1e-15);
  const InvarianceRecord quarter = invariance_monitor({rot(Vector3(0, oracle::kPi / 2, 0))}, {Rotation::identity()});
  EXPECT_NEAR(quarter.h_value, 0.0, 1e-12);
  EXPECT_TRUE(quarter.on_boundary);
  const InvarianceRecord third = invariance_monitor({rot(Vector3(2 * oracle::kPi / 3, 0, 0))}, {Rotation::identity()});
  EXPECT_NEAR(third.h_value, -1.0, 1e-12);
  EXPECT_FALSE(third.on_boundary);
}

TEST(AssumptionMonitor, Examples) {
  oracle::Gen g(52);
  const Rotation r = g.rotation();
  const AssumptionRecord same = assumption_monitor({r}, {r});
  EXPECT_NEAR(same.sym_rrl_min_eig, 2.0, 1e-12);
  EXPECT_TRUE(same.positive_definite);
  const Vector3 axis = g.unit();
  const AssumptionRecord quarter = assumption_monitor({Rotation::project(r.matrix() * oracle::rodrigues(axis * oracle::kPi / 2))}, {r});
  EXPECT_NEAR(quarter.sym_rrl_min_eig, 0.0, 1e-12);
  EXPECT_FALSE(quarter.positive_definite);
  const AssumptionRecord eighth = assumption_monitor({Rotation::project(r.matrix() * oracle::rodrigues(axis * oracle::kPi / 4))}, {r});
  EXPECT_NEAR(eighth.sym_rrl_min_eig, std::sqrt(2.0), 1e-12);
  EXPECT_TRUE(eighth.positive_definite);
}

TEST(DissipationBound, MatchesDefinition) {
  oracle::Gen g(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Rotation rbar = g.rotation(), rl = g.rotation(), rr = g.rotation();
    const Matrix3 a = rr.matrix().transpose() * rbar.matrix();
    const Matrix3 b = rr.matrix().transpose() * rl.matrix();
    const double phi_la = 0.5 * (3.0 - (rl.matrix().transpose() * rbar.matrix()).trace());
    const double expected = -0.5 * 2.0 *
                            (oracle::min_eigenvalue(a + a.transpose()) + oracle::min_eigenvalue(b + b.transpose())) * phi_la;
    EXPECT_NEAR(dissipation_bound({rbar}, {rl}, {rr}, SyncGains(2.0)), expected, 1e-12);
  }
}

TEST(EnergyLedger, SynchronizedIsConstant) {
  oracle::Gen g(54);
  const Rotation r = g.rotation();
  const Rotation rr = g.rotation();
  EnergyLedger ledger(0.5);
  for (int k = 0; k < 50; ++k) {
    ledger = energy_tick(ledger, {r}, {r}, {rr}, Vector3::Zero(), SyncGains(1.0), 0.01, 0.01 * k);
  }
  for (const auto& rec : ledger.records()) {
    EXPECT_EQ(rec.v, ledger.records().front().v);
    EXPECT_EQ(rec.s_h, 0.5);
    EXPECT_EQ(rec.bound, 0.0);
    EXPECT_GE(rec.s_r, 0.0);
    EXPECT_LE(rec.s_r, 2.0);
  }
}

TEST(EnergyLedger, TrapezoidSupplyAndRebase) {
  // Leader rotated about x relative to the reference: supply vector
  // sk(R_l^T R_r)^∨ = [-sin θ, 0, 0].
  const double theta = 0.4;
  const LeaderState leader{rot(Vector3(theta, 0, 0))};
  const ReferenceState ref{Rotation::identity()};
  EnergyLedger ledger;
  const Vector3 w(0.5, 0, 0);
  ledger.tick(0.0, {Rotation::identity()}, leader, ref, w, SyncGains(1.0), 0.1);
  ledger.tick(0.1, {Rotation::identity()}, leader, ref, w, SyncGains(1.0), 0.1);
  ledger.tick(0.2, {Rotation::identity()}, leader, ref, w, SyncGains(1.0), 0.1);
  EXPECT_EQ(ledger.records()[0].i_h, 0.0);
  EXPECT_NEAR(ledger.records()[2].i_h, -2 * 0.1 * 0.5 * std::sin(theta), 1e-15);
  EXPECT_NEAR(estimate_beta(ledger), 0.1 * std::sin(theta), 1e-15);
  ledger.set_beta(estimate_beta(ledger));
  EXPECT_NEAR(ledger.records()[2].s_h, 0.0, 1e-15);
  const auto& rec = ledger.records()[1];
  EXPECT_NEAR(rec.v, rec.s_r + rec.s_rl + rec.s_h, 1e-15);
  EXPECT_THROW(ledger.tick(0.3, {Rotation::identity()}, leader, ref, w, SyncGains(1.0), 0.0), Error);
}

std::vector<EnergyRecord> supply_series(std::initializer_list<double> values) {
  std::vector<EnergyRecord> out;
  for (double v : values) {
    EnergyRecord r;
    r.i_h = v;
    out.push_back(r);
  }
  return out;
}

TEST(EstimateBeta, Examples) {
  EXPECT_EQ(estimate_beta(supply_series({0.0, 0.1, 0.5, 0.2})), 0.0);
  EXPECT_EQ(estimate_beta(supply_series({0.0, -0.1, -0.3, 0.4})), 0.3);
  EXPECT_THROW(estimate_beta(std::vector<EnergyRecord>{}), Error);
}

TEST(EstimateBeta, PropertyMonotoneInHorizon) {
  oracle::Gen g(55);
  std::vector<EnergyRecord> recs;
  double prev = 0.0;
  double acc = 0.0;
  for (int k = 0; k < 2000; ++k) {
    acc += g.normal() * 0.01;
    EnergyRecord r;
    r.i_h = acc;
    recs.push_back(r);
    const double beta = estimate_beta(recs);
    ASSERT_GE(beta, prev);
    ASSERT_GE(beta, 0.0);
    prev = beta;
  }
}

ScenarioConfig passive_scenario(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.id = "analysis";
  cfg.n = 4;
  cfg.duration_s = 40.0;
  cfg.k_s = 3.0;
  cfg.seed = seed;
  cfg.initial.mode = InitialConfig::Mode::Random;
  cfg.initial.spread_deg = 30.0;
  cfg.initial.leader_offset_deg = 20.0;
  cfg.reference.mode = ReferenceConfig::Mode::Random;
  cfg.reference.trial_s = 20.0;
  cfg.op.kind = OperatorSpec::Kind::Passive;
  return cfg;
}

TEST(ClosedLoopEnergy, PassiveOperatorHasZeroBeta) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const TrajectoryRecord rec = run_scenario(passive_scenario(seed));
    ASSERT_FALSE(rec.aborted);
    EXPECT_LE(rec.beta, 1e-9) << "seed " << seed;
  }
}

TEST(ClosedLoopEnergy, PassiveOperatorDissipates) {
  const TrajectoryRecord rec = run_scenario(passive_scenario(4));
  double worst_excess = -1e300;
  for (std::size_t k = 1; k < rec.rows.size(); ++k) {
    if (rec.rows[k].trial_id != rec.rows[k - 1].trial_id) continue;
    worst_excess = std::max(worst_excess, (rec.rows[k].v - rec.rows[k - 1].v) -
                                             rec.dt * rec.rows[k - 1].bound);
  }
  EXPECT_LE(worst_excess, 1e-6 + 1e-4 * rec.dt);
  const auto& last = rec.rows.back();
  EXPECT_LT((last.d_bar - last.d_r).norm(), 1e-3);
  EXPECT_LT(phi(Rotation::project(last.rl.transpose() * last.rbar)), 1e-6);
}

TEST(ClosedLoopEnergy, ZeroOperatorKeepsHumanStorage) {
  ScenarioConfig cfg = passive_scenario(5);
  cfg.op.kind = OperatorSpec::Kind::Zero;
  cfg.reference.mode = ReferenceConfig::Mode::Fixed;
  cfg.reference.d_r = Vector3(0.3, 0.1, 1.0).normalized();
  const TrajectoryRecord rec = run_scenario(cfg);
  for (std::size_t k = 1; k < rec.rows.size(); ++k) {
    ASSERT_EQ(rec.rows[k].s_h, rec.beta);
    ASSERT_LE(rec.rows[k].v - rec.rows[k - 1].v, 1e-12);
  }
}

TEST(ClosedLoopEnergy, ForwardInvariance) {
  for (std::uint64_t seed : {6u, 7u, 8u, 9u}) {
    const TrajectoryRecord rec = run_scenario(passive_scenario(seed));
    int trial = -1;
    bool admissible = false;
    double worst = 1e300;
    for (std::size_t k = 0; k < rec.rows.size(); ++k) {
      const auto& row = rec.rows[k];
      if (row.trial_id != trial) {
        trial = row.trial_id;
        admissible = row.h >= 0.0;
      }
      admissible = admissible && row.positive_definite;
      if (admissible) worst = std::min(worst, row.h);
    }
    EXPECT_GE(worst, -1e-9) << "seed " << seed;
  }
}

}  // namespace
