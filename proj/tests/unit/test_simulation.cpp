#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "attnav/error.hpp"
#include "attnav/simulation.hpp"
#include "attnav/trajectory.hpp"
#include "eigen_expect.hpp"
#include "oracles.hpp"

using namespace attnav;

namespace {

ScenarioConfig base(std::uint64_t seed = 1) {
  ScenarioConfig cfg;
  cfg.n = 3;
  cfg.duration_s = 10.0;
  cfg.seed = seed;
  cfg.initial.mode = InitialConfig::Mode::Random;
  cfg.initial.spread_deg = 25.0;
  cfg.initial.leader_offset_deg = 15.0;
  return cfg;
}

bool rows_identical(const TrajectoryRow& a, const TrajectoryRow& b) {
  if (a.bodies.size() != b.bodies.size()) return false;
  for (std::size_t i = 0; i < a.bodies.size(); ++i) {
    if (a.bodies[i] != b.bodies[i]) return false;
  }
  return a.t == b.t && a.trial_id == b.trial_id && a.rbar == b.rbar && a.rl == b.rl && a.rr == b.rr &&
         a.d_bar == b.d_bar && a.omega_s == b.omega_s && a.omega_b == b.omega_b && a.omega_tilde == b.omega_tilde &&
         a.error_e == b.error_e && a.omega_a_norm == b.omega_a_norm && a.i_h == b.i_h && a.v == b.v &&
         a.bound == b.bound && a.h == b.h && a.sym_min_eig == b.sym_min_eig;
}

TEST(Simulation, DefaultInitialStateIsIdentity) {
  ScenarioConfig cfg;
  std::mt19937_64 rng(cfg.seed);
  const InitialState s = make_initial_state(cfg, rng);
  ASSERT_EQ(static_cast<int>(s.bodies.size()), cfg.n);
  EXPECT_EQ(s.rbar.matrix(), Matrix3::Identity());
  EXPECT_EQ(s.rl.matrix(), Matrix3::Identity());
}

TEST(Simulation, StationaryWithZeroOperator) {
  ScenarioConfig cfg;
  cfg.duration_s = 5.0;
  cfg.op.kind = OperatorSpec::Kind::Zero;
  const TrajectoryRecord rec = run_scenario(cfg);
  ASSERT_EQ(rec.rows.size(), static_cast<std::size_t>(cfg.tick_count() + 1));
  for (const auto& row : rec.rows) {
    for (const auto& b : row.bodies) ASSERT_EQ(b, Matrix3::Identity());
    ASSERT_EQ(row.rbar, Matrix3::Identity());
    ASSERT_EQ(row.rl, Matrix3::Identity());
    ASSERT_TRUE(row.omega_tilde.isZero(0.0));
  }
}

TEST(Simulation, DeterministicUnderSeed) {
  ScenarioConfig cfg = base(3);
  cfg.autonomous.kind = AutonomousSpec::Kind::DemoConsensus;
  cfg.integrator = Integrator::Rkmk4;
  const TrajectoryRecord a = run_scenario(cfg);
  const TrajectoryRecord b = run_scenario(cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) ASSERT_TRUE(rows_identical(a.rows[k], b.rows[k])) << k;
  cfg.seed = 4;
  const TrajectoryRecord c = run_scenario(cfg);
  EXPECT_FALSE(rows_identical(a.rows[0], c.rows[0]));
}

TEST(Simulation, UniformTimeBaseAndTrialSwitches) {
  ScenarioConfig cfg = base();
  cfg.duration_s = 40.0;
  cfg.reference.trial_s = 15.0;
  const TrajectoryRecord rec = run_scenario(cfg);
  ASSERT_EQ(rec.rows.size(), 4801u);
  for (std::size_t k = 0; k < rec.rows.size(); ++k) {
    ASSERT_DOUBLE_EQ(rec.rows[k].t, static_cast<double>(k) * cfg.dt);
    const int expected_trial = std::min(static_cast<int>(k) / 1800, 2);
    ASSERT_EQ(rec.rows[k].trial_id, expected_trial) << k;
  }
  // The reference is constant within a trial and changes at each switch.
  EXPECT_EQ(rec.rows[100].rr, rec.rows[1799].rr);
  EXPECT_NE(rec.rows[1799].rr, rec.rows[1800].rr);
}

TEST(Simulation, ReferenceAnglesStayWithinLimit) {
  ScenarioConfig cfg = base(11);
  cfg.duration_s = 120.0;
  cfg.reference.trial_s = 5.0;
  const TrajectoryRecord rec = run_scenario(cfg);
  for (std::size_t k = 1; k < rec.rows.size(); ++k) {
    if (rec.rows[k].trial_id == rec.rows[k - 1].trial_id) continue;
    const double angle = std::acos(std::clamp(rec.rows[k].d_r.dot(rec.rows[k].d_bar), -1.0, 1.0));
    EXPECT_LE(angle, 85.0 * oracle::kPi / 180.0 + 1e-9);
    // R_r is the leader frame rotated minimally onto d_r.
    EXPECT_LE((rec.rows[k].rr.col(2) - rec.rows[k].d_r).norm(), 1e-12);
  }
}

TEST(Simulation, PassiveOperatorConvergesWithin30s) {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    ScenarioConfig cfg = base(seed);
    cfg.duration_s = 30.0;
    cfg.reference.mode = ReferenceConfig::Mode::Fixed;
    std::mt19937_64 rng(seed + 100);
    cfg.reference.d_r = random_reference(rng, UnitVector3::e3(), 60.0).vec();
    const TrajectoryRecord rec = run_scenario(cfg);
    EXPECT_LT((rec.rows.back().d_bar - rec.rows.back().d_r).norm(), 1e-3) << "seed " << seed;
  }
}

TEST(Simulation, QuasiAverageTracksAverageDirection) {
  ScenarioConfig cfg = base(5);
  cfg.duration_s = 30.0;
  const TrajectoryRecord rec = run_scenario(cfg);
  double worst = 0.0;
  for (const auto& row : rec.rows) worst = std::max(worst, (row.rbar.col(2) - row.d_bar).norm());
  EXPECT_LE(worst, 1e-4);
}

TEST(Simulation, RowsAreConsistentSnapshots) {
  const TrajectoryRecord rec = run_scenario(base(6));
  for (std::size_t k = 0; k < rec.rows.size(); k += 97) {
    const auto& row = rec.rows[k];
    Vector3 sum = Vector3::Zero();
    for (const auto& b : row.bodies) sum += b.col(2);
    expect_near(row.d_bar, sum.normalized(), 1e-14);
    expect_near(row.d_l, row.rl.col(2), 1e-15);
    expect_near(row.omega_b, row.rl.transpose() * row.omega_s, 1e-14);
    EXPECT_EQ(row.omega_b.z(), 0.0);
    EXPECT_LE(row.omega_s.norm(), kOmegaMax + 1e-12);
    const Matrix3 m = row.rbar.transpose() * row.rl;
    expect_near(row.omega_tilde, rec.k_s * row.rbar * Vector3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
                                                               0.5 * (m(1, 0) - m(0, 1))),
                1e-13);
    EXPECT_NEAR(row.h, (row.rr.transpose() * row.rbar).trace() - 1.0, 1e-13);
    EXPECT_NEAR(row.v, row.s_r + row.s_rl + row.s_h, 1e-14);
  }
}

TEST(Simulation, StealthyInputDoesNotMoveAverage) {
  ScenarioConfig cfg = base(7);
  cfg.n = 5;
  cfg.integrator = Integrator::Rkmk4;
  cfg.autonomous.kind = AutonomousSpec::Kind::DemoConsensus;
  const TrajectoryRecord with = run_scenario(cfg);
  cfg.autonomous.kind = AutonomousSpec::Kind::None;
  const TrajectoryRecord without = run_scenario(cfg);
  double worst = 0.0;
  double input = 0.0;
  for (std::size_t k = 0; k < with.rows.size(); ++k) {
    worst = std::max(worst, (with.rows[k].d_bar - without.rows[k].d_bar).norm());
    input = std::max(input, with.rows[k].omega_a_norm);
  }
  EXPECT_LE(worst, 1e-5);
  EXPECT_GT(input, 1e-2);
  // The bodies themselves do move differently.
  EXPECT_GT((with.rows.back().bodies[0] - without.rows.back().bodies[0]).norm(), 1e-3);
}

TEST(Simulation, RequestReferenceStartsTrial) {
  ScenarioConfig cfg = base(8);
  cfg.reference.mode = ReferenceConfig::Mode::Fixed;
  ClosedLoop loop(cfg);
  const TrajectoryRow first = loop.step();
  EXPECT_EQ(first.trial_id, 0);
  const UnitVector3 d = UnitVector3::normalize(Vector3(1, 0, 1));
  loop.request_reference(d);
  const TrajectoryRow second = loop.step();
  EXPECT_EQ(second.trial_id, 1);
  expect_near(second.d_r, d.vec(), 1e-15);
  EXPECT_EQ(loop.tick_index(), 2);
  const TrajectoryRow obs = loop.observe();
  EXPECT_EQ(loop.tick_index(), 2);
  EXPECT_DOUBLE_EQ(obs.t, 2 * cfg.dt);
}

TEST(Simulation, LiveOperatorCommandIsSaturated) {
  ScenarioConfig cfg = base(9);
  cfg.op.kind = OperatorSpec::Kind::Live;
  auto op = make_operator(cfg);
  auto* live = dynamic_cast<LiveOperator*>(op.get());
  ASSERT_NE(live, nullptr);
  ClosedLoop loop(cfg, std::move(op));
  live->set_command(Vector3(0, 3, 4));
  const TrajectoryRow row = loop.step();
  expect_near(row.omega_s, Vector3(0, 0.6, 0.8), 1e-15);
}

TEST(Simulation, DegenerateInitialStateIsRejected) {
  ScenarioConfig cfg;
  cfg.n = 2;
  cfg.duration_s = 1.0;
  cfg.op.kind = OperatorSpec::Kind::Zero;
  cfg.reference.mode = ReferenceConfig::Mode::Fixed;
  cfg.initial.bodies = {Rotation::identity(), Rotation::project(oracle::rodrigues(Vector3(oracle::kPi, 0, 0)))};
  try {
    run_scenario(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateAverage);
  }
}

// Raises DegenerateAverage on a chosen tick, standing in for a network whose
// directions cancel mid-run.
class FailingOperator final : public HumanOperator {
 public:
  explicit FailingOperator(long fail_at) : fail_at_(fail_at) {}
  OperatorSignals act(const OperatorContext& ctx) override {
    if (ctx.tick == fail_at_) throw Error(Errc::DegenerateAverage, "directions cancel");
    return signals_from_spatial(Vector3(0, 0, 0.1), Vector2::Zero(), *ctx.leader);
  }

 private:
  long fail_at_;
};

TEST(Simulation, DegenerateAverageMidRunKeepsPartialRecord) {
  ScenarioConfig cfg = base(12);
  cfg.duration_s = 2.0;
  const TrajectoryRecord rec = run_scenario(cfg, std::make_unique<FailingOperator>(50));
  EXPECT_TRUE(rec.aborted);
  EXPECT_NE(rec.abort_reason.find("directions cancel"), std::string::npos);
  EXPECT_EQ(rec.rows.size(), 50u);
  EXPECT_DOUBLE_EQ(rec.rows.back().t, 49 * cfg.dt);
}

TEST(Simulation, InvalidConfigThrows) {
  ScenarioConfig cfg;
  cfg.n = 0;
  EXPECT_THROW(run_scenario(cfg), Error);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  ScenarioConfig cfg = base(10);
  cfg.duration_s = 2.0;
  cfg.autonomous.kind = AutonomousSpec::Kind::DemoConsensus;
  const TrajectoryRecord rec = run_scenario(cfg);
  std::stringstream ss;
  write_trajectory_csv(rec, ss);
  const TrajectoryRecord back = read_trajectory_csv(ss);
  EXPECT_EQ(back.n, rec.n);
  EXPECT_EQ(back.dt, rec.dt);
  EXPECT_EQ(back.k_s, rec.k_s);
  EXPECT_EQ(back.beta, rec.beta);
  ASSERT_EQ(back.rows.size(), rec.rows.size());
  for (std::size_t k = 0; k < rec.rows.size(); ++k) {
    ASSERT_TRUE(rows_identical(back.rows[k], rec.rows[k])) << k;
    ASSERT_EQ(back.rows[k].on_boundary, rec.rows[k].on_boundary);
    ASSERT_EQ(back.rows[k].positive_definite, rec.rows[k].positive_definite);
    ASSERT_EQ(back.rows[k].s_h, rec.rows[k].s_h);
  }
}

TEST(TrajectoryCsv, RejectsGarbage) {
  std::stringstream empty;
  EXPECT_THROW(read_trajectory_csv(empty), Error);
  std::stringstream junk("not,a,trajectory\n1,2,3\n");
  EXPECT_THROW(read_trajectory_csv(junk), Error);
  EXPECT_THROW(read_trajectory_csv(std::filesystem::path("/nonexistent.csv")), Error);
}

}  // namespace
