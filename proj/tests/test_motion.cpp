#include "fusetrack/errors.hpp"
#include "fusetrack/motion.hpp"
#include "fusetrack/simulator.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fusetrack {
namespace {

using testing::min_eigenvalue;
using testing::random_spd;
using testing::random_vec;

TEST(CvTransition, AdvancesPositionByVelocity) {
  EXPECT_TRUE((cv_transition(1.0) * Vec4(0, 0, 1, 2)).isApprox(Vec4(1, 2, 1, 2)));
  const Vec4 lidar_step = cv_transition(0.04) * Vec4(10, 0, -5, 0);
  EXPECT_NEAR(lidar_step(0), 9.8, 1e-14);
  EXPECT_EQ(lidar_step(1), 0.0);
  EXPECT_EQ(lidar_step(2), -5.0);
}

TEST(CvTransition, ApproachesIdentityForTinySteps) {
  EXPECT_LE((cv_transition(1e-12) - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CvTransition, RejectsNonPositiveDelta) {
  EXPECT_THROW(cv_transition(0.0), InvalidInputError);
  EXPECT_THROW(cv_transition(-0.1), InvalidInputError);
  EXPECT_THROW(cv_transition(NAN), InvalidInputError);
}

TEST(FrameStep, DerivesAngleAndDistance) {
  const FrameStep step(0.5, 10.0, 0.2);
  EXPECT_EQ(step.theta(), 0.2 * 0.5);
  EXPECT_EQ(step.distance(), 10.0 * 0.5);
  EXPECT_THROW(FrameStep(0.0, 1.0, 0.0), InvalidInputError);
  EXPECT_THROW(FrameStep(0.1, INFINITY, 0.0), InvalidInputError);
}

TEST(EgoCompensate, StationaryEgoReducesToPrediction) {
  std::mt19937_64 rng(23);
  const StateEstimate s{random_vec(rng), random_spd(rng)};
  const Mat4 q = diag4(0.05, 0.05, 0.1, 0.1);
  const StateEstimate a = ego_compensate(s, FrameStep(0.07, 0.0, 0.0), q);
  const StateEstimate b = kalman_predict(s, cv_transition(0.07), q);
  EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((a.cov - b.cov).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EgoCompensate, StraightLineTranslation) {
  const StateEstimate s{Vec4(20, 0, 0, 0), Mat4::Identity()};
  const StateEstimate out = ego_compensate(s, FrameStep(0.1, 10.0, 0.0), Mat4::Zero());
  EXPECT_TRUE(out.mean.isApprox(Vec4(19, 0, 0, 0), 1e-14));
}

TEST(EgoCompensate, PureRotationAsPrinted) {
  const double delta = 0.1;
  const double omega = std::numbers::pi / 2.0 / delta;
  const StateEstimate s{Vec4(1, 0, 0, 0), Mat4::Identity()};
  const StateEstimate out = ego_compensate(s, FrameStep(delta, 0.0, omega), Mat4::Zero());
  EXPECT_NEAR(out.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(out.mean(1), 1.0, 1e-15);

  // velocities rotate the same way; use a tiny step so the position barely moves
  const StateEstimate moving{Vec4(0, 0, 2, 0), Mat4::Identity()};
  const StateEstimate rotated =
      ego_compensate(moving, FrameStep(1e-9, 0.0, std::numbers::pi / 2.0 / 1e-9), Mat4::Zero());
  EXPECT_NEAR(rotated.mean(2), 0.0, 1e-12);
  EXPECT_NEAR(rotated.mean(3), 2.0, 1e-12);
}

TEST(EgoCompensate, FrameInverseRotatesTheOtherWay) {
  const double delta = 0.1;
  const StateEstimate s{Vec4(1, 0, 0, 0), Mat4::Identity()};
  const StateEstimate out = ego_compensate(s, FrameStep(delta, 0.0, std::numbers::pi / 2.0 / delta),
                                           Mat4::Zero(), RotationConvention::FrameInverse);
  EXPECT_NEAR(out.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(out.mean(1), -1.0, 1e-15);
}

TEST(EgoCompensate, RotationPreservesNorms) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  for (auto convention : {RotationConvention::AsPrinted, RotationConvention::FrameInverse}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vec4 v = random_vec(rng, 10.0);
      const StateEstimate s{Vec4(v(0), v(1), 0, 0), Mat4::Identity()};
      const StateEstimate out =
          ego_compensate(s, FrameStep(0.1, 0.0, angle(rng) / 0.1), Mat4::Zero(), convention);
      EXPECT_NEAR(out.mean.head<2>().norm(), s.mean.head<2>().norm(), 1e-12);
      EXPECT_NEAR(out.mean.tail<2>().norm(), 0.0, 1e-12);
    }
  }
}

TEST(EgoCompensate, CovarianceStaysSymmetricPsd) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const StateEstimate s{random_vec(rng, 20.0), random_spd(rng, 0.0, 3.0)};
    const Mat4 q = random_spd(rng, 0.0, 0.5);
    const FrameStep step(0.01 + std::abs(u(rng)) * 0.2, 30.0 * u(rng), u(rng));
    const StateEstimate out = ego_compensate(s, step, q);
    EXPECT_LE(testing::asymmetry(out.cov), 1e-9);
    EXPECT_GE(min_eigenvalue(out.cov), -1e-9);
  }
}

TEST(EgoCompensate, SuccessiveRotationsCompose) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  for (auto convention : {RotationConvention::AsPrinted, RotationConvention::FrameInverse}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec4 v = random_vec(rng, 5.0);
      const StateEstimate s{Vec4(v(0), v(1), 0, 0), random_spd(rng)};
      const double t1 = angle(rng), t2 = angle(rng);
      const StateEstimate once = ego_compensate(s, FrameStep(1.0, 0.0, t1), Mat4::Zero(), convention);
      const StateEstimate twice =
          ego_compensate(once, FrameStep(1.0, 0.0, t2), Mat4::Zero(), convention);
      const StateEstimate joint =
          ego_compensate(s, FrameStep(1.0, 0.0, t1 + t2), Mat4::Zero(), convention);
      EXPECT_LE((twice.mean - joint.mean).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(EgoCompensate, RejectsNonFinite) {
  StateEstimate s;
  s.cov(0, 0) = NAN;
  EXPECT_THROW(ego_compensate(s, FrameStep(0.1, 1.0, 0.0), Mat4::Zero()), InvalidInputError);
}

TEST(VelocityTransport, LowerInvertsLift) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const StateEstimate s{random_vec(rng, 10.0), random_spd(rng)};
    const StateEstimate back = lower_to_relative(lift_to_over_ground(s, 25.0, 0.3), 25.0, 0.3);
    EXPECT_LE((back.mean - s.mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((back.cov - s.cov).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(VelocityTransport, ParkedObstacleHasZeroOverGroundVelocity) {
  // ego at 10 m/s turning at 0.2 rad/s; a point fixed on the ground at (5, 3)
  const double v = 10.0, omega = 0.2;
  const Vec2 r(5.0, 3.0);
  const Vec2 relative_velocity = Vec2(-v, 0.0) - omega * Vec2(-r.y(), r.x());
  const StateEstimate s{Vec4(r.x(), r.y(), relative_velocity.x(), relative_velocity.y()),
                        Mat4::Identity()};
  const StateEstimate lifted = lift_to_over_ground(s, v, omega);
  EXPECT_NEAR(lifted.mean(2), 0.0, 1e-14);
  EXPECT_NEAR(lifted.mean(3), 0.0, 1e-14);
}

// Replays the noise-free bend scenario: each CV + compensation step must land on the next
// true relative state. The counter-clockwise yaw rate of the simulator needs the inverse
// rotation; the as-printed sense misses by roughly 2 * theta * range per step.
TEST(EgoCompensate, SimulatorDecidesRotationConvention) {
  const ScenarioConfig cfg = ScenarioConfig::bend(30.0, 1);
  const ScenarioKinematics kin(cfg);
  auto median_error = [&](RotationConvention convention) {
    std::vector<double> errors;
    for (int k = 0; k < 750; ++k) {
      const double t0 = 0.04 * k, t1 = t0 + 0.04;
      const RelativeState r0 = kin.relative_target(t0);
      const RelativeState r1 = kin.relative_target(t1);
      const GroundState e = kin.ego(t1);
      const double v = e.velocity.norm();
      const StateEstimate s{Vec4(r0.x, r0.y, r0.vx, r0.vy), Mat4::Identity()};
      const StateEstimate out = lower_to_relative(
          ego_compensate(lift_to_over_ground(s, v, e.omega), FrameStep(0.04, v, e.omega),
                         Mat4::Zero(), convention),
          v, e.omega);
      errors.push_back((out.mean.head<2>() - Vec2(r1.x, r1.y)).norm());
    }
    std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
    return errors[errors.size() / 2];
  };
  const double inverse = median_error(RotationConvention::FrameInverse);
  const double printed = median_error(RotationConvention::AsPrinted);
  EXPECT_LT(inverse, 0.01);
  EXPECT_GT(printed, 10.0 * inverse);
}

}  // namespace
}  // namespace fusetrack
