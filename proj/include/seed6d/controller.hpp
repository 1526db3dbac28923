#pragma once

// Force and hybrid force/pose control through a series-elastic end effector.
// A force problem is turned into a position problem: the desired wrench is
// mapped to a desired deformation through the estimated stiffness map and the
// gripper is commanded to the pose that realizes that deformation.
//
// Sign convention: desired wrenches handed to the controllers are the wrench
// the tool should exert on its environment, about the origin of C. The
// stiffness map is written for the load applied on C, which is the negation.

#include <cmath>
#include <limits>

#include "seed6d/se3.hpp"
#include "seed6d/stiffness.hpp"

namespace seed6d {

struct ControllerConfig {
  StiffnessParams stiffness_estimate;
  double dt = 0.004;
  /// Per-step limits on the commanded pose increment. Infinity disables.
  double max_step_translation = 0.002;
  double max_step_rotation = 0.5 * M_PI / 180.0;
  double horizon = 2.0;

  void validate() const {
    stiffness_estimate.validate();
    if (!(dt > 0.0)) throw ConfigError("controller dt must be positive");
    if (!(max_step_translation >= 0.0) || !(max_step_rotation >= 0.0)) {
      throw ConfigError("controller rate limits must be non-negative");
    }
  }
};

// ---------------------------------------------------------------------------
// 1D series elastic actuator reference controller

struct Sea1dState {
  double stiffness = 100.0;  // k, N/m
  double kp = 4e4;
  double kd = 280.0;
  double position = 0.0;     // W x^T
  double velocity = 0.0;     // W xdot^T
  double deformation = 0.0;  // T x^C
};

struct Sea1dCommand {
  double desired_deformation = 0.0;
  double desired_position = 0.0;
  double effort = 0.0;  // u
};

inline Sea1dCommand sea_1d_force_step(const Sea1dState& s, double f_d) {
  Sea1dCommand c;
  c.desired_deformation = f_d / s.stiffness;
  c.desired_position = s.position + s.deformation - c.desired_deformation;
  c.effort = -s.kp * (s.position - c.desired_position) - s.kd * s.velocity;
  return c;
}

// ---------------------------------------------------------------------------
// 6D

/// Moves from `current` toward `target`, clamping the translation and the
/// rotation angle of the increment independently. Directions are preserved.
inline RigidTransform rate_limit(const RigidTransform& current, const RigidTransform& target,
                                 double max_translation, double max_rotation) {
  Vec3 dp = target.translation() - current.translation();
  const double dn = dp.norm();
  if (dn > max_translation) dp *= max_translation / dn;

  Eigen::AngleAxisd delta(target.rotation() * current.rotation().transpose());
  if (delta.angle() > max_rotation) delta.angle() = max_rotation;
  const Mat3 R = delta.toRotationMatrix() * current.rotation();
  return {R, current.translation() + dp, target.parent(), target.child()};
}

/// Gripper pose that puts the tool at X_WC with relative pose X_TC_d.
inline RigidTransform compose_command(const RigidTransform& X_WC,
                                      const RigidTransform& X_TC_d) {
  return (X_WC.with_frames(Frame::kWorld, Frame::kTool) *
          X_TC_d.with_frames(Frame::kGripper, Frame::kTool).inverse())
      .with_frames(Frame::kWorld, Frame::kGripper);
}

/// Desired world wrench (about C) re-expressed in T using the current
/// gripper orientation.
inline SpatialForce world_wrench_in_gripper(const RigidTransform& X_WT, const SpatialForce& F_W) {
  const RigidTransform R_TW(X_WT.rotation().transpose(), Vec3::Zero(), Frame::kGripper,
                            Frame::kWorld);
  SpatialForce f = F_W;
  f.frame = Frame::kWorld;
  return reexpress_spatial_force(R_TW, f);
}

/// Desired relative pose for a desired world wrench: the wrench is carried
/// into T and through the inverse stiffness map.
inline RelativePose force_control_target(const RigidTransform& X_WT, const SpatialForce& F_d_W,
                                         const StiffnessParams& k_hat) {
  const SpatialForce load_T = -world_wrench_in_gripper(X_WT, F_d_W);
  return stiffness_inverse(load_T, k_hat);
}

/// One step of spatial force control.
///   y      measured relative pose T X^C
///   x_cmd  current commanded gripper pose W X^T
///   F_d    desired wrench exerted by the tool, world axes, about C
inline RigidTransform force_control_step(const RigidTransform& y, const RigidTransform& x_cmd,
                                         const SpatialForce& F_d, const ControllerConfig& cfg) {
  const RelativePose target = force_control_target(x_cmd, F_d, cfg.stiffness_estimate);
  const RigidTransform X_WC = x_cmd.with_frames(Frame::kWorld, Frame::kGripper) *
                              y.with_frames(Frame::kGripper, Frame::kTool);
  const RigidTransform desired = compose_command(X_WC, target.transform());
  return rate_limit(x_cmd.with_frames(Frame::kWorld, Frame::kGripper), desired,
                    cfg.max_step_translation, cfg.max_step_rotation);
}

/// Desired relative pose for a hybrid spec. Position channels keep the
/// measured deformation; force channels come from the partial inverse.
inline RelativePose hybrid_control_target(const RigidTransform& y, const RigidTransform& x_cmd,
                                          const HybridSpec& spec, const StiffnessParams& k_hat) {
  const Mat3 R_WT = x_cmd.rotation();
  const Mat3 R_TW = R_WT.transpose();
  const Mat3 P_T = R_TW * spec.position_selection * R_WT;
  const Vec3 load_force_T = -(R_TW * spec.force_target);
  RelativePose target;
  target.translation = hybrid_position(P_T, y.translation(), load_force_T, k_hat);
  target.rpy = hybrid_orientation(spec, -spec.torque_target, k_hat);
  return target;
}

inline RigidTransform hybrid_control_step(const RigidTransform& y, const RigidTransform& x_cmd,
                                          const HybridSpec& spec, const ControllerConfig& cfg) {
  const RigidTransform X_WC = x_cmd.with_frames(Frame::kWorld, Frame::kGripper) *
                              y.with_frames(Frame::kGripper, Frame::kTool);
  const Mat3& P = spec.position_selection;
  const Vec3 tool_target = P * spec.position_target + (Mat3::Identity() - P) * X_WC.translation();
  const RelativePose target = hybrid_control_target(y, x_cmd, spec, cfg.stiffness_estimate);
  const RigidTransform desired = compose_command(
      RigidTransform(X_WC.rotation(), tool_target, Frame::kWorld, Frame::kTool),
      target.transform());
  return rate_limit(x_cmd.with_frames(Frame::kWorld, Frame::kGripper), desired,
                    cfg.max_step_translation, cfg.max_step_rotation);
}

}  // namespace seed6d
