#pragma once

// Bushing generalized stiffness map: relative pose of C in T (roll-pitch-yaw
// plus translation) to the spatial force applied on C, written in T with the
// torque taken about the origin of C.
//
//   tau = N(Θ)^T K_tau Θ,   f = K_f x
//
// plus its closed-form inverse, Jacobian determinant and the partial inverses
// used for hybrid force / pose control.

#include <array>
#include <cmath>
#include <string>

#include "seed6d/se3.hpp"

namespace seed6d {

/// Diagonal gimbal and translational stiffness. Units N·m/rad and N/m.
struct StiffnessParams {
  Vec3 k_tau = Vec3::Constant(2.0);
  Vec3 k_f = Vec3::Constant(300.0);

  StiffnessParams() = default;
  StiffnessParams(const Vec3& tau, const Vec3& f) : k_tau(tau), k_f(f) {}

  static StiffnessParams desk_default() { return {}; }

  double k_roll() const { return k_tau.x(); }
  double k_pitch() const { return k_tau.y(); }
  double k_yaw() const { return k_tau.z(); }

  Mat3 gimbal_stiffness() const { return k_tau.asDiagonal(); }
  Mat3 translational_stiffness() const { return k_f.asDiagonal(); }

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (!(k_tau[i] > 0.0) || !std::isfinite(k_tau[i]) || !(k_f[i] > 0.0) ||
          !std::isfinite(k_f[i])) {
        throw ConfigError("stiffness entries must be finite and strictly positive");
      }
    }
  }

  StiffnessParams scaled(double s) const { return {k_tau * s, k_f * s}; }
};

/// Wrench applied on C for the relative pose (Θ, x).
inline SpatialForce stiffness_forward(const RollPitchYaw& rpy, const Vec3& x,
                                      const StiffnessParams& k) {
  const Mat3 n = gimbal_matrix(rpy);
  const Vec3 tau = n.transpose() * k.k_tau.cwiseProduct(rpy.vector());
  return {tau, k.k_f.cwiseProduct(x), Frame::kGripper};
}

inline SpatialForce stiffness_forward(const RigidTransform& X_TC, const StiffnessParams& k) {
  return stiffness_forward(X_TC.rpy(), X_TC.translation(), k);
}

/// Orientation half of the inverse, evaluated bottom-up: yaw from tau_z,
/// then pitch, then roll.
inline RollPitchYaw orientation_from_torque(const Vec3& tau, const Vec3& k_tau) {
  const double yaw = tau.z() / k_tau.z();
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double pitch = (tau.y() * cy - tau.x() * sy) / k_tau.y();
  if (std::abs(std::cos(pitch)) < kGimbalTolerance || std::abs(pitch) >= M_PI / 2) {
    throw OutOfRange("stiffness inverse: recovered pitch " + std::to_string(pitch) +
                     " leaves |p| < pi/2");
  }
  // 1/k_r scales the whole bracket; the other grouping fails the round trip.
  const double roll =
      ((tau.x() * cy + tau.y() * sy) * std::cos(pitch) - tau.z() * std::sin(pitch)) /
      k_tau.x();
  return {roll, pitch, yaw};
}

struct RelativePose {
  RollPitchYaw rpy;
  Vec3 translation = Vec3::Zero();

  RigidTransform transform() const {
    return {rpy, translation, Frame::kGripper, Frame::kTool};
  }
};

inline RelativePose stiffness_inverse(const SpatialForce& F, const StiffnessParams& k) {
  return {orientation_from_torque(F.torque, k.k_tau), F.force.cwiseQuotient(k.k_f)};
}

/// det of d tau / d Θ.
inline double stiffness_jacobian_det(const RollPitchYaw& rpy, const StiffnessParams& k) {
  detail::require_away_from_gimbal_lock(rpy.pitch, "stiffness_jacobian_det");
  return k.k_tau.prod() / std::cos(rpy.pitch);
}

enum class RotationMode {
  kTwoTorquesOneAngle,  // tau_x, tau_y and yaw
  kOneTorqueTwoAngles,  // tau_z, roll and pitch
  kAllAngles,
  kAllTorques,
};

inline std::string rotation_mode_name(RotationMode m) {
  switch (m) {
    case RotationMode::kTwoTorquesOneAngle: return "2t1a";
    case RotationMode::kOneTorqueTwoAngles: return "1t2a";
    case RotationMode::kAllAngles: return "all-angles";
    case RotationMode::kAllTorques: return "all-torques";
  }
  return "?";
}

inline RotationMode parse_rotation_mode(const std::string& s) {
  if (s == "2t1a") return RotationMode::kTwoTorquesOneAngle;
  if (s == "1t2a") return RotationMode::kOneTorqueTwoAngles;
  if (s == "all-angles") return RotationMode::kAllAngles;
  if (s == "all-torques") return RotationMode::kAllTorques;
  throw ConfigError("unknown rotation mode '" + s + "'");
}

/// Task decomposition for hybrid control.
///
/// `position_selection` is an orthogonal projection P onto the
/// position-controlled translational subspace; its complement carries force.
/// Rotational channels are always decomposed in frame T.
struct HybridSpec {
  Mat3 position_selection = Mat3::Identity();
  RotationMode rotation_mode = RotationMode::kAllAngles;
  Vec3 position_target = Vec3::Zero();
  Vec3 force_target = Vec3::Zero();
  Vec3 torque_target = Vec3::Zero();
  RollPitchYaw angle_target;

  Mat3 force_selection() const { return Mat3::Identity() - position_selection; }

  void validate(double tol = 1e-9) const {
    const Mat3& P = position_selection;
    if ((P * P - P).cwiseAbs().maxCoeff() > tol || (P - P.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw ConfigError("position selection must be a symmetric idempotent projection");
    }
  }

  /// Projection onto the span of the listed world axes (0=x, 1=y, 2=z).
  static Mat3 axis_selection(std::initializer_list<int> axes) {
    Mat3 P = Mat3::Zero();
    for (int a : axes) P(a, a) = 1.0;
    return P;
  }
};

/// x = P x_d + (I - P) K_f^-1 f_d
inline Vec3 hybrid_position(const Mat3& P, const Vec3& x_d, const Vec3& f_d,
                            const StiffnessParams& k) {
  return P * x_d + (Mat3::Identity() - P) * f_d.cwiseQuotient(k.k_f);
}

inline Vec3 hybrid_position(const HybridSpec& spec, const Vec3& x_d, const Vec3& f_d,
                            const StiffnessParams& k) {
  return hybrid_position(spec.position_selection, x_d, f_d, k);
}

/// Angles achieving torques (tau_x, tau_y) with yaw fixed to `yaw_d`.
/// The roll row depends on pitch, so the pair is iterated to a fixed point.
inline RollPitchYaw hybrid_orientation_2t1a(double tau_x_d, double tau_y_d, double yaw_d,
                                            const StiffnessParams& k, int max_iter = 100,
                                            double step_tol = 1e-12) {
  const double cy = std::cos(yaw_d), sy = std::sin(yaw_d);
  const double a = tau_x_d * cy + tau_y_d * sy;
  const double gimbal_yaw_torque = k.k_yaw() * yaw_d;
  RollPitchYaw rpy{0.0, 0.0, yaw_d};
  for (int it = 0; it < max_iter; ++it) {
    const double pitch = (tau_y_d * cy - tau_x_d * sy) / k.k_pitch();
    const double roll = (a * std::cos(rpy.pitch) - gimbal_yaw_torque * std::sin(rpy.pitch)) /
                        k.k_roll();
    const double step = std::max(std::abs(pitch - rpy.pitch), std::abs(roll - rpy.roll));
    rpy.roll = roll;
    rpy.pitch = pitch;
    if (step <= step_tol) {
      if (std::abs(std::cos(rpy.pitch)) < kGimbalTolerance) {
        throw OutOfRange("hybrid_orientation_2t1a: pitch at gimbal lock");
      }
      return rpy;
    }
  }
  throw NoConvergence("hybrid_orientation_2t1a: fixed point did not converge");
}

/// r = r_d, p = p_d, y = tau_z / k_y
inline RollPitchYaw hybrid_orientation_1t2a(double tau_z_d, double roll_d, double pitch_d,
                                            const StiffnessParams& k) {
  return {roll_d, pitch_d, tau_z_d / k.k_yaw()};
}

/// Desired relative orientation for any rotational mode of `spec`, with the
/// torque targets given in the stiffness-map convention.
inline RollPitchYaw hybrid_orientation(const HybridSpec& spec, const Vec3& torque,
                                       const StiffnessParams& k) {
  switch (spec.rotation_mode) {
    case RotationMode::kTwoTorquesOneAngle:
      return hybrid_orientation_2t1a(torque.x(), torque.y(), spec.angle_target.yaw, k);
    case RotationMode::kOneTorqueTwoAngles:
      return hybrid_orientation_1t2a(torque.z(), spec.angle_target.roll,
                                     spec.angle_target.pitch, k);
    case RotationMode::kAllAngles:
      return spec.angle_target;
    case RotationMode::kAllTorques:
      return orientation_from_torque(torque, k.k_tau);
  }
  return {};
}

}  // namespace seed6d
