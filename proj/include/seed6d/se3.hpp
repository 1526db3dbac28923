#pragma once

// Rotation / rigid-transform algebra, the roll-pitch-yaw gimbal
// parametrization and spatial-force frame changes.
//
// Conventions
//  * Roll-pitch-yaw is extrinsic x-y-z:  R = Rz(yaw) * Ry(pitch) * Rx(roll).
//  * Angular velocities are expressed in the parent frame of the rotation.
//  * A spatial force stores its torque about the origin of the frame it is
//    expressed in.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "seed6d/errors.hpp"

namespace seed6d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// |cos p| below this value is treated as gimbal lock.
inline constexpr double kGimbalTolerance = 1e-6;

enum class Frame {
  kUnspecified,
  kWorld,          // W
  kGripper,        // T, gripper-fixed nominal frame
  kTool,           // C, tool-fixed compliance frame
  kGripperBody,    // G
  kLeftCamera,     // L
  kRightCamera,    // R
  kZeroPitchTool,  // C', intermediate zero-pitch frame
};

inline std::string_view frame_name(Frame f) {
  switch (f) {
    case Frame::kWorld: return "W";
    case Frame::kGripper: return "T";
    case Frame::kTool: return "C";
    case Frame::kGripperBody: return "G";
    case Frame::kLeftCamera: return "L";
    case Frame::kRightCamera: return "R";
    case Frame::kZeroPitchTool: return "C'";
    case Frame::kUnspecified: break;
  }
  return "?";
}

struct RollPitchYaw {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  RollPitchYaw() = default;
  RollPitchYaw(double r, double p, double y) : roll(r), pitch(p), yaw(y) {}
  explicit RollPitchYaw(const Vec3& v) : roll(v.x()), pitch(v.y()), yaw(v.z()) {}

  Vec3 vector() const { return {roll, pitch, yaw}; }
  bool finite() const {
    return std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw);
  }
};

namespace detail {

inline void require_away_from_gimbal_lock(double pitch, const char* where) {
  if (std::abs(std::cos(pitch)) < kGimbalTolerance) {
    throw GimbalLock(std::string(where) + ": pitch " + std::to_string(pitch) +
                     " is at gimbal lock");
  }
}

inline Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}
inline Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}
inline Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

}  // namespace detail

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline Mat3 rpy_to_rotation(const RollPitchYaw& rpy) {
  return detail::rot_z(rpy.yaw) * detail::rot_y(rpy.pitch) * detail::rot_x(rpy.roll);
}

/// Inverse of rpy_to_rotation on |pitch| < pi/2.
inline RollPitchYaw rotation_to_rpy(const Mat3& R) {
  const double sp = std::clamp(-R(2, 0), -1.0, 1.0);
  const double cp = std::hypot(R(0, 0), R(1, 0));
  if (cp < kGimbalTolerance) {
    throw GimbalLock("rotation_to_rpy: rotation is at gimbal lock");
  }
  const double pitch = std::atan2(sp, cp);
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  return {roll, pitch, yaw};
}

/// Gimbal coordinate-transformation matrix N(Θ). Maps angular velocity to
/// gimbal rates (Θ̇ = N ω); its transpose maps gimbal torques to spatial
/// torques.
inline Mat3 gimbal_matrix(const RollPitchYaw& rpy) {
  detail::require_away_from_gimbal_lock(rpy.pitch, "gimbal_matrix");
  const double cw = std::cos(rpy.yaw), sw = std::sin(rpy.yaw);
  const double cp = std::cos(rpy.pitch);
  const double sec = 1.0 / cp, tan = std::tan(rpy.pitch);
  Mat3 n;
  n << cw * sec, sw * sec, 0.0,  //
      -sw, cw, 0.0,              //
      cw * tan, sw * tan, 1.0;
  return n;
}

/// Inverse of gimbal_matrix: ω = M(Θ) Θ̇. Defined everywhere, but the gimbal
/// domain is still enforced so callers never see a singular pairing.
inline Mat3 gimbal_rate_matrix(const RollPitchYaw& rpy) {
  detail::require_away_from_gimbal_lock(rpy.pitch, "gimbal_rate_matrix");
  const double cw = std::cos(rpy.yaw), sw = std::sin(rpy.yaw);
  const double cp = std::cos(rpy.pitch), sp = std::sin(rpy.pitch);
  Mat3 m;
  m << cw * cp, -sw, 0.0,  //
      sw * cp, cw, 0.0,    //
      -sp, 0.0, 1.0;
  return m;
}

inline Vec3 gimbal_rates_to_angular_velocity(const RollPitchYaw& rpy, const Vec3& rates) {
  return gimbal_rate_matrix(rpy) * rates;
}

/// Proper rigid transform with parent/child frame annotations.
/// X_AB maps coordinates in B to coordinates in A.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation,
                 Frame parent = Frame::kUnspecified, Frame child = Frame::kUnspecified)
      : rotation_(rotation), translation_(translation), parent_(parent), child_(child) {}
  RigidTransform(const RollPitchYaw& rpy, const Vec3& translation,
                 Frame parent = Frame::kUnspecified, Frame child = Frame::kUnspecified)
      : RigidTransform(rpy_to_rotation(rpy), translation, parent, child) {}

  static RigidTransform identity(Frame parent = Frame::kUnspecified,
                                 Frame child = Frame::kUnspecified) {
    return {Mat3::Identity(), Vec3::Zero(), parent, child};
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Frame parent() const { return parent_; }
  Frame child() const { return child_; }

  RollPitchYaw rpy() const { return rotation_to_rpy(rotation_); }

  RigidTransform with_frames(Frame parent, Frame child) const {
    return {rotation_, translation_, parent, child};
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation_.transpose();
    return {rt, -rt * translation_, child_, parent_};
  }

  Vec3 operator*(const Vec3& point) const { return rotation_ * point + translation_; }

  RigidTransform operator*(const RigidTransform& other) const {
    if (child_ != Frame::kUnspecified && other.parent_ != Frame::kUnspecified &&
        child_ != other.parent_) {
      throw FrameMismatch("cannot compose X_" + std::string(frame_name(parent_)) +
                          std::string(frame_name(child_)) + " with X_" +
                          std::string(frame_name(other.parent_)) +
                          std::string(frame_name(other.child_)));
    }
    return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_,
            parent_, other.child_};
  }

  bool is_valid(double tol = 1e-12) const {
    return (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(rotation_.determinant() - 1.0) < tol && translation_.allFinite();
  }

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
  Frame parent_ = Frame::kUnspecified;
  Frame child_ = Frame::kUnspecified;
};

/// Torque (about the expressed-in frame origin) and force, both in `frame`.
struct SpatialForce {
  Vec3 torque = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  Frame frame = Frame::kUnspecified;

  SpatialForce() = default;
  SpatialForce(const Vec3& t, const Vec3& f, Frame in = Frame::kUnspecified)
      : torque(t), force(f), frame(in) {}

  Vec6 vector() const {
    Vec6 v;
    v << torque, force;
    return v;
  }
  static SpatialForce from_vector(const Vec6& v, Frame in = Frame::kUnspecified) {
    return {v.head<3>(), v.tail<3>(), in};
  }
  bool finite() const { return torque.allFinite() && force.allFinite(); }

  SpatialForce operator-() const { return {-torque, -force, frame}; }
  SpatialForce operator+(const SpatialForce& o) const {
    return {torque + o.torque, force + o.force, frame};
  }
};

/// Re-expresses F (given in X's child frame, about the child origin) in X's
/// parent frame, about the parent origin.
inline SpatialForce reexpress_spatial_force(const RigidTransform& X, const SpatialForce& F) {
  if (F.frame != Frame::kUnspecified && X.child() != Frame::kUnspecified &&
      F.frame != X.child()) {
    throw FrameMismatch("spatial force expressed in " + std::string(frame_name(F.frame)) +
                        " but transform child is " + std::string(frame_name(X.child())));
  }
  const Vec3 f = X.rotation() * F.force;
  const Vec3 tau = X.rotation() * F.torque + X.translation().cross(f);
  return {tau, f, X.parent()};
}

/// Relative rotation angle between two rotations, radians in [0, pi].
inline double rotation_angle(const Mat3& R) {
  return Eigen::AngleAxisd(R).angle();
}

}  // namespace seed6d
