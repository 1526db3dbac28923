#include <gtest/gtest.h>

#include <random>

#include "seed6d/se3.hpp"
#include "test_support.hpp"

using namespace seed6d;

TEST(RpyToRotation, ZeroIsIdentity) {
  EXPECT_TRUE(rpy_to_rotation({0, 0, 0}).isApprox(Mat3::Identity(), 0.0));
}

TEST(RpyToRotation, QuarterRollPermutesAxes) {
  const Mat3 R = rpy_to_rotation({M_PI / 2, 0, 0});
  EXPECT_LT((R * Vec3::UnitY() - Vec3::UnitZ()).norm(), 1e-15);
  EXPECT_LT((R * Vec3::UnitZ() + Vec3::UnitY()).norm(), 1e-15);
}

TEST(RotationToRpy, PureYaw) {
  const RollPitchYaw rpy = rotation_to_rpy(Eigen::AngleAxisd(0.3, Vec3::UnitZ()).toRotationMatrix());
  EXPECT_NEAR(rpy.roll, 0.0, 1e-15);
  EXPECT_NEAR(rpy.pitch, 0.0, 1e-15);
  EXPECT_NEAR(rpy.yaw, 0.3, 1e-15);
}

TEST(RotationToRpy, IdentityIsZero) {
  const RollPitchYaw rpy = rotation_to_rpy(Mat3::Identity());
  EXPECT_EQ(rpy.roll, 0.0);
  EXPECT_EQ(rpy.pitch, 0.0);
  EXPECT_EQ(rpy.yaw, 0.0);
}

TEST(RotationToRpy, GimbalLockThrows) {
  EXPECT_THROW(rotation_to_rpy(rpy_to_rotation({0.2, M_PI / 2, 0.1})), GimbalLock);
}

TEST(RotationToRpy, RoundTripWithinThirdOfPi) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const RollPitchYaw rpy = testing_support::random_rpy(rng, M_PI / 3);
    const RollPitchYaw back = rotation_to_rpy(rpy_to_rotation(rpy));
    EXPECT_NEAR(back.roll, rpy.roll, 1e-10);
    EXPECT_NEAR(back.pitch, rpy.pitch, 1e-10);
    EXPECT_NEAR(back.yaw, rpy.yaw, 1e-10);
  }
}

TEST(RotationToRpy, ComposedRotationRoundTrips) {
  const Mat3 R = Eigen::AngleAxisd(0.4, Vec3(1, 2, 3).normalized()).toRotationMatrix() *
                 Eigen::AngleAxisd(-0.2, Vec3(0, 1, -1).normalized()).toRotationMatrix();
  EXPECT_LT((rpy_to_rotation(rotation_to_rpy(R)) - R).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GimbalMatrix, IdentityAtZeroPitchAndYaw) {
  for (double r : {-1.0, 0.0, 0.7}) {
    EXPECT_EQ(gimbal_matrix({r, 0.0, 0.0}), Mat3::Identity());
  }
}

TEST(GimbalMatrix, QuarterYaw) {
  Mat3 expected;
  expected << 0, 1, 0, -1, 0, 0, 0, 0, 1;
  EXPECT_LT((gimbal_matrix({0, 0, M_PI / 2}) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GimbalMatrix, ThrowsAtGimbalLock) {
  EXPECT_THROW(gimbal_matrix({0, M_PI / 2, 0}), GimbalLock);
  EXPECT_THROW(gimbal_rates_to_angular_velocity({0, -M_PI / 2, 0}, Vec3::Ones()), GimbalLock);
}

TEST(GimbalMatrix, InverseOfRateMatrix) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const RollPitchYaw rpy = testing_support::random_rpy(rng, 1.3);
    EXPECT_LT((gimbal_matrix(rpy) * gimbal_rate_matrix(rpy) - Mat3::Identity()).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(AngularVelocity, TrivialCases) {
  EXPECT_EQ(gimbal_rates_to_angular_velocity({0, 0, 0}, Vec3(1, 0, 0)), Vec3(1, 0, 0));
  EXPECT_EQ(gimbal_rates_to_angular_velocity({0.3, 0.2, 0.1}, Vec3::Zero()), Vec3::Zero());
}

// Oracle: central differences of R(Θ(t)) give [ω]x = Ṙ R^T.
TEST(AngularVelocity, MatchesFiniteDifferenceOfRotation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const RollPitchYaw rpy = testing_support::random_rpy(rng, 1.2);
    const Vec3 rates(u(rng), u(rng), u(rng));
    const Vec3 omega_fd = testing_support::fd_angular_velocity(rpy, rates, 1e-6);
    const Vec3 omega = gimbal_rates_to_angular_velocity(rpy, rates);
    EXPECT_LT((omega - omega_fd).norm(), 1e-6 * (1.0 + rates.norm()));
  }
}

// Power on the gimbal equals power on the spatial representation.
TEST(GimbalMatrix, PowerBalanceWithFiniteDifferenceOmega) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const RollPitchYaw rpy = testing_support::random_rpy(rng, M_PI / 3);
    const Vec3 rates(u(rng), u(rng), u(rng));
    const Vec3 k(2, 3, 4);
    const Vec3 gimbal_torque = k.cwiseProduct(rpy.vector());
    const Vec3 tau = gimbal_matrix(rpy).transpose() * gimbal_torque;
    const Vec3 omega_fd = testing_support::fd_angular_velocity(rpy, rates, 1e-6);
    const double p_gimbal = gimbal_torque.dot(rates);
    EXPECT_NEAR(tau.dot(omega_fd), p_gimbal, 1e-6 * (1.0 + std::abs(p_gimbal)));
  }
}

TEST(RigidTransform, ComposeChecksFrames) {
  const RigidTransform X_WT = RigidTransform::identity(Frame::kWorld, Frame::kGripper);
  const RigidTransform X_TC = RigidTransform::identity(Frame::kGripper, Frame::kTool);
  EXPECT_EQ((X_WT * X_TC).parent(), Frame::kWorld);
  EXPECT_EQ((X_WT * X_TC).child(), Frame::kTool);
  EXPECT_THROW(X_TC * X_WT, FrameMismatch);
  EXPECT_EQ(X_WT.inverse().parent(), Frame::kGripper);
}

TEST(RigidTransform, InverseComposesToIdentity) {
  std::mt19937_64 rng(2);
  const RigidTransform X = testing_support::random_transform(rng, 1.0, 0.5);
  const RigidTransform I = X * X.inverse();
  EXPECT_LT((I.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(I.translation().norm(), 1e-14);
  EXPECT_TRUE(X.is_valid());
}

TEST(ReexpressSpatialForce, IdentityLeavesForceUnchanged) {
  const SpatialForce F(Vec3(1, 2, 3), Vec3(4, 5, 6));
  const SpatialForce G = reexpress_spatial_force(RigidTransform::identity(), F);
  EXPECT_EQ(G.torque, F.torque);
  EXPECT_EQ(G.force, F.force);
}

TEST(ReexpressSpatialForce, LeverArm) {
  const RigidTransform X(Mat3::Identity(), Vec3(0, 0, 1));
  const SpatialForce G = reexpress_spatial_force(X, SpatialForce(Vec3::Zero(), Vec3(1, 0, 0)));
  EXPECT_EQ(G.torque, Vec3(0, 1, 0));
  EXPECT_EQ(G.force, Vec3(1, 0, 0));
}

TEST(ReexpressSpatialForce, FrameLabelsAreChecked) {
  const RigidTransform X_WT = RigidTransform::identity(Frame::kWorld, Frame::kGripper);
  EXPECT_EQ(reexpress_spatial_force(X_WT, SpatialForce({}, {}, Frame::kGripper)).frame, Frame::kWorld);
  EXPECT_THROW(reexpress_spatial_force(X_WT, SpatialForce({}, {}, Frame::kTool)), FrameMismatch);
}

TEST(ReexpressSpatialForce, InverseRecoversForce) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform X = testing_support::random_transform(rng, 1.5, 2.0);
    const SpatialForce F(Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)));
    const SpatialForce back = reexpress_spatial_force(X.inverse(), reexpress_spatial_force(X, F));
    EXPECT_LT((back.vector() - F.vector()).norm(), 1e-12 * (1.0 + F.vector().norm()) * 10);
  }
}
