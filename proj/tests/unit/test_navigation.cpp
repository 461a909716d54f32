#include <gtest/gtest.h>

#include <cmath>

#include "attnav/error.hpp"
#include "attnav/navigation.hpp"
#include "attnav/network.hpp"
#include "eigen_expect.hpp"
#include "oracles.hpp"

using namespace attnav;

namespace {

constexpr double kDt = 1.0 / 120.0;

Rotation rot(const Vector3& v) { return Rotation::project(oracle::rodrigues(v)); }

TEST(AlignZAxis, Identity) {
  expect_near(align_z_axis(UnitVector3::e3()).matrix(), Matrix3::Identity(), 0.0);
}

TEST(AlignZAxis, QuarterTurnOntoE1) {
  const Matrix3 r = align_z_axis(UnitVector3::e1()).matrix();
  expect_near(r.col(2), Vector3::UnitX(), 1e-12);
  expect_near(r, oracle::rodrigues(Vector3(0, oracle::kPi / 2, 0)), 1e-12);
}

TEST(AlignZAxis, AntipodalUsesE1Axis) {
  const UnitVector3 down = UnitVector3::from_unit(Vector3(0, 0, -1));
  expect_near(align_z_axis(down).matrix(), oracle::rodrigues(Vector3(oracle::kPi, 0, 0)), 1e-12);
}

TEST(AlignZAxis, PropertyMinimalGeodesic) {
  oracle::Gen g(21);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector3 t = g.unit();
    if (t.z() < -1.0 + 1e-6) continue;
    const Matrix3 r = align_z_axis(UnitVector3::from_unit(t)).matrix();
    EXPECT_LE((r.col(2) - t).norm(), 1e-12);
    // The minimal rotation has angle acos(e3 . t) and axis orthogonal to both.
    const double angle = std::acos(std::clamp(t.z(), -1.0, 1.0));
    EXPECT_NEAR(std::acos(std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0)), angle, 1e-6);
    const Eigen::AngleAxisd aa(r);
    if (angle > 1e-3) EXPECT_NEAR(aa.axis().z(), 0.0, 1e-9);
  }
}

TEST(AlignZAxis, FromBaseKeepsResultInSO3) {
  oracle::Gen g(22);
  for (int trial = 0; trial < 100; ++trial) {
    const Rotation base = g.rotation();
    const Vector3 t = g.unit();
    const Rotation r = align_z_axis(UnitVector3::from_unit(t), base);
    EXPECT_LE(r.orthonormality_error(), 1e-12);
    EXPECT_LE((r.matrix().col(2) - t).norm(), 1e-12);
  }
}

TEST(SyncGains, RejectsNonPositive) {
  EXPECT_THROW(SyncGains(0.0), Error);
  EXPECT_THROW(SyncGains(-1.0), Error);
  EXPECT_THROW(SyncGains(std::nan("")), Error);
  EXPECT_EQ(SyncGains(2.5).k_s(), 2.5);
}

TEST(HumanFilter, SynchronizedIsZero) {
  oracle::Gen g(23);
  const Rotation r = g.rotation();
  EXPECT_TRUE(human_filter_command({r}, {r}, SyncGains(1.0)).isZero(1e-15));
}

TEST(HumanFilter, YawOffsetGivesSine) {
  for (double theta : {0.1, 0.7, 2.0, 3.0}) {
    const Vector3 w = human_filter_command({Rotation::identity()}, {rot(Vector3(0, 0, theta))}, SyncGains(1.0));
    expect_near(w, Vector3(0, 0, std::sin(theta)), 1e-12);
  }
}

TEST(HumanFilter, SpatialOdeMatchesBodyForm) {
  oracle::Gen g(24);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix3 rbar = g.rotation_matrix();
    const Matrix3 rl = g.rotation_matrix();
    const double ks = g.uniform(0.1, 5.0);
    const Vector3 w = human_filter_command({Rotation::project(rbar)}, {Rotation::project(rl)}, SyncGains(ks));
    // d/dt R̄ = hat(ω̃) R̄ must equal k_s R̄ sk(R̄^T R_l).
    const Matrix3 m = rbar.transpose() * rl;
    const Matrix3 body = ks * rbar * 0.5 * (m - m.transpose());
    expect_near(oracle::cross_matrix(w) * rbar, body, 1e-12);
  }
}

TEST(LeaderVelocity, Examples) {
  oracle::Gen g(25);
  const Rotation r = g.rotation();
  EXPECT_TRUE(leader_velocity({r}, {r}, Vector3::Zero(), SyncGains(1.0)).isZero(1e-15));
  expect_near(leader_velocity({Rotation::identity()}, {Rotation::identity()}, Vector3(1, 2, 3), SyncGains(1.0)),
              Vector3(1, 2, 3), 0.0);
}

TEST(LeaderVelocity, CouplingIsAntisymmetric) {
  oracle::Gen g(26);
  for (int trial = 0; trial < 500; ++trial) {
    const Rotation rbar = g.rotation();
    const Rotation rl = g.rotation();
    const SyncGains k(1.0);
    const Vector3 filter = human_filter_command({rbar}, {rl}, k);
    const Vector3 leader = rl.matrix() * leader_velocity({rl}, {rbar}, Vector3::Zero(), k);
    EXPECT_LE((filter + leader).norm(), 1e-12);
  }
}

TEST(StepNavigation, StationaryWhenSynchronized) {
  oracle::Gen g(27);
  const Rotation r = g.rotation();
  const NavigationStep s = step_navigation({r}, {r}, {Rotation::identity()}, SyncGains(1.0), Vector3::Zero(), kDt);
  expect_near(s.qa.rotation.matrix(), r.matrix(), 1e-15);
  expect_near(s.leader.rotation.matrix(), r.matrix(), 1e-15);
  EXPECT_TRUE(s.omega_h_tilde.isZero(1e-15));
}

TEST(StepNavigation, RejectsNonPositiveDt) {
  EXPECT_THROW(step_navigation({Rotation::identity()}, {Rotation::identity()}, {Rotation::identity()},
                               SyncGains(1.0), Vector3::Zero(), 0.0),
               Error);
}

TEST(StepNavigation, SynchronizesMonotonically) {
  oracle::Gen g(28);
  for (int trial = 0; trial < 5; ++trial) {
    QuasiAverageState qa{g.rotation()};
    LeaderState leader{Rotation::project(qa.rotation.matrix() * oracle::rodrigues(g.rotation_vector(0.3, 2.8)))};
    const SyncGains k(1.0);
    double prev = phi(qa.rotation.transpose() * leader.rotation);
    for (int step = 0; step < 60 * 120; ++step) {
      const NavigationStep s = step_navigation(qa, leader, {Rotation::identity()}, k, Vector3::Zero(), kDt);
      qa = s.qa;
      leader = s.leader;
      const double now = phi(qa.rotation.transpose() * leader.rotation);
      ASSERT_LE(now, prev + 1e-12) << "step " << step;
      prev = now;
    }
    EXPECT_LT(prev, 1e-6);
  }
}

TEST(StepNavigation, QuasiAverageTracksBodiesUnderHumanInput) {
  oracle::Gen g(29);
  std::vector<Rotation> bodies;
  const Matrix3 base = g.rotation_matrix();
  for (int i = 0; i < 4; ++i) bodies.push_back(Rotation::project(base * oracle::rodrigues(g.vector(0.5))));
  NetworkState net(bodies);
  QuasiAverageState qa{align_z_axis(net.average())};
  LeaderState leader{qa.rotation};
  const SyncGains k(1.0);
  double worst = 0.0;
  for (int step = 0; step < 20 * 120; ++step) {
    const Vector3 omega_h = step < 1200 ? Vector3(0, 0, 0.1) : Vector3(0.2, -0.1, 0.05);
    const NavigationStep s = step_navigation(qa, leader, {Rotation::identity()}, k, omega_h, kDt);
    net = step_network(net, assemble_command(net, s.omega_h_tilde, VectorX::Zero(12)), kDt);
    qa = s.qa;
    leader = s.leader;
    worst = std::max(worst, (qa.rotation.matrix().col(2) - net.average().vec()).norm());
  }
  EXPECT_LE(worst, 1e-4);
  // Lag stays bounded while the leader is driven.
  EXPECT_LT(phi(qa.rotation.transpose() * leader.rotation), 0.05);
}

TEST(RelativeRotations, Examples) {
  const RelativeRotations id = relative_rotations({Rotation::identity()}, {Rotation::identity()}, {Rotation::identity()});
  expect_near(id.leader_to_reference.matrix(), Matrix3::Identity(), 0.0);
  expect_near(id.average_to_reference.matrix(), Matrix3::Identity(), 0.0);

  oracle::Gen g(30);
  const Rotation r = g.rotation();
  const RelativeRotations same = relative_rotations({g.rotation()}, {r}, {r});
  expect_near(same.leader_to_reference.matrix(), Matrix3::Identity(), 1e-14);
}

TEST(RelativeRotations, TraceMatchesAngle) {
  oracle::Gen g(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Rotation rbar = g.rotation();
    const Rotation rr = g.rotation();
    const RelativeRotations rel = relative_rotations({rbar}, {g.rotation()}, {rr});
    expect_near(rel.average_to_reference.matrix(), rr.matrix().transpose() * rbar.matrix(), 1e-14);
    const double angle = axis_angle(rel.average_to_reference).angle;
    EXPECT_NEAR(rel.average_to_reference.matrix().trace(), 1.0 + 2.0 * std::cos(angle), 1e-12);
  }
}

}  // namespace
