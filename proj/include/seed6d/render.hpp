#pragma once

// Synthetic stereo bubble-sensor generator, used as ground truth for the
// estimator.
//
// Model (per membrane, side s = -1 left, +1 right):
//  - Each membrane is a flat sheet at gripper y = s * membrane_offset, imaged
//    by a camera camera_distance behind it looking along -s * y.
//  - The grasped tool is a cylinder of radius rho whose axis is the tool z
//    axis. Membranes do not slip on the tool: the patch is anchored to the
//    tool material point q_s = X_GC * (0, s rho, 0). Its in-plane centre is
//    (kappa q_s.x, q_s.z) with kappa = shear_length / (shear_length + rho),
//    the shear lag of a soft membrane.
//  - Indentation depth is the penetration of q_s past the membrane. The
//    indented region is the cylinder/dome overlap ellipse, with the full
//    penetration inside it and Gaussian (blur_px) smoothed edges.
//  - IR is a fixed speckle texture on the membrane, advected by the patch's
//    rigid in-plane motion (translation plus rotation by the tool pitch)
//    under a Gaussian weight of width flow_window around the rest patch.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "seed6d/estimator.hpp"
#include "seed6d/sensor.hpp"

namespace seed6d {

struct BubbleGeometry {
  double membrane_offset = 0.013;  // m, rest membrane distance from G origin
  double camera_distance = 0.05;   // m
  double dome_radius = 0.025;      // m, membrane curvature along the tool axis
  double shear_length = 0.05;      // m
  double blur_px = 4.0;
  double flow_window = 0.010;  // m
  std::uint64_t texture_seed = 1;
  CameraIntrinsics intrinsics;

  void validate() const {
    intrinsics.validate();
    if (!(camera_distance > 0.0) || !(dome_radius > 0.0) || !(shear_length > 0.0) ||
        !(flow_window > 0.0) || !(blur_px >= 0.0) || !(membrane_offset >= 0.0)) {
      throw ConfigError("bubble geometry: lengths must be positive");
    }
  }

  RigidTransform camera_pose(int side) const {
    const double s = side == kLeft ? -1.0 : 1.0;
    Mat3 R;
    // Columns: camera x, y, z in gripper axes. Image "down" is gripper -z.
    R << -s, 0, 0,   //
        0, 0, -s,    //
        0, -1, 0;
    return {R, Vec3(0, s * (membrane_offset + camera_distance), 0), Frame::kGripperBody,
            side == kLeft ? Frame::kLeftCamera : Frame::kRightCamera};
  }
};

/// Pitch of X_GC about the y axis of the zero-pitch frame built from the
/// tool's two grasp material points.
inline double intrinsic_pitch(const RigidTransform& X_GC, double radius) {
  const RigidTransform Cp = estimate_frame(X_GC * Vec3(0, -radius, 0), X_GC * Vec3(0, radius, 0));
  const Mat3 M = Cp.rotation().transpose() * X_GC.rotation();
  return std::atan2(M(0, 2), M(0, 0));
}

class SyntheticSensor {
 public:
  explicit SyntheticSensor(BubbleGeometry g) : g_(std::move(g)) {
    g_.validate();
    texel_ = 0.5 * g_.camera_distance / g_.intrinsics.fx;
    const double half = g_.camera_distance *
                            std::max(g_.intrinsics.width / g_.intrinsics.fx,
                                     g_.intrinsics.height / g_.intrinsics.fy) +
                        0.02;
    for (int s = 0; s < 2; ++s) textures_[s] = speckle(g_.texture_seed * 2 + s, half);
  }

  const BubbleGeometry& geometry() const { return g_; }

  /// No-contact frame; its depth images are the estimator background.
  SensorFrame render_background(double radius) const { return render_impl(nullptr, radius); }

  SensorFrame render(const RigidTransform& X_GC, double radius) const {
    return render_impl(&X_GC, radius);
  }

 private:
  struct Patch {
    bool contact = false;
    double depth = 0.0;
    Vec2 centre = Vec2::Zero();  // camera-plane coordinates, m
    Vec2 across = Vec2(1, 0), along = Vec2(0, 1);
    double a_across = 0.0, a_along = 0.0;
    double angle = 0.0;  // in-plane texture rotation
  };

  ImageF speckle(std::uint64_t seed, double half) {
    const int n = static_cast<int>(std::ceil(2.0 * half / texel_)) + 1;
    tex_half_ = half;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageF t(n, n);
    for (double& v : t.data()) v = u(rng);
    t = gaussian_blur(t, 1.5);
    double mean = 0.0, sq = 0.0;
    for (double v : t.data()) mean += v;
    mean /= static_cast<double>(t.data().size());
    for (double v : t.data()) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / static_cast<double>(t.data().size()));
    for (double& v : t.data()) v = std::clamp(0.5 + 0.15 * (v - mean) / sd, 0.0, 1.0);
    return t;
  }

  double texture_at(int side, const Vec2& x) const {
    return sample_bilinear(textures_[side], (x.x() + tex_half_) / texel_, (x.y() + tex_half_) / texel_);
  }

  Patch patch_for(const RigidTransform& X_GC, double radius, int side, const RigidTransform& X_GCam,
                  double pitch) const {
    const double s = side == kLeft ? -1.0 : 1.0;
    Patch p;
    const Vec3 q = X_GC * Vec3(0, s * radius, 0);
    p.depth = s * q.y() - g_.membrane_offset;
    if (!(p.depth > 0.0)) return p;
    p.contact = true;
    const double kappa = g_.shear_length / (g_.shear_length + radius);
    const RigidTransform X_CamG = X_GCam.inverse();
    const Vec3 c = X_CamG * Vec3(kappa * q.x(), s * g_.membrane_offset, q.z());
    p.centre = c.head<2>();
    const Vec3 axis = X_CamG.rotation() * X_GC.rotation().col(2);
    if (axis.head<2>().norm() > 1e-9) p.along = axis.head<2>().normalized();
    p.across = Vec2(-p.along.y(), p.along.x());
    p.a_across = std::sqrt(2.0 * p.depth / (1.0 / radius + 1.0 / g_.dome_radius));
    p.a_along = std::sqrt(2.0 * p.depth * g_.dome_radius);
    p.angle = detail::curl_sign(CameraView{{}, X_GCam, {}, {}}) * pitch;
    return p;
  }

  // Smoothed plateau: full depth inside the footprint ellipse, erfc edges
  // using a first-order signed distance to the ellipse.
  double indentation(const Patch& p, const Vec2& x, double sigma) const {
    if (!p.contact) return 0.0;
    const Vec2 d = x - p.centre;
    const double e1 = d.dot(p.across) / p.a_across, e2 = d.dot(p.along) / p.a_along;
    const double e = std::hypot(e1, e2);
    double dist;
    if (e < 1e-12) {
      dist = -std::min(p.a_across, p.a_along);
    } else {
      const double g = std::hypot(e1 / p.a_across, e2 / p.a_along) / e;
      dist = (e - 1.0) / g;
    }
    if (sigma <= 0.0) return dist <= 0.0 ? p.depth : 0.0;
    return p.depth * 0.5 * std::erfc(dist / (std::sqrt(2.0) * sigma));
  }

  SensorFrame render_impl(const RigidTransform* X_GC, double radius) const {
    if (!(radius > 0.0)) throw ConfigError("render: tool radius must be positive");
    const CameraIntrinsics& K = g_.intrinsics;
    const double D0 = g_.camera_distance;
    const double sigma = g_.blur_px * D0 / K.fx;
    const double pitch = X_GC ? intrinsic_pitch(*X_GC, radius) : 0.0;
    const RigidTransform identity = RigidTransform::identity(Frame::kGripperBody, Frame::kTool);

    SensorFrame f;
    f.tool_radius = radius;
    if (X_GC) f.truth_X_GC = X_GC->with_frames(Frame::kGripperBody, Frame::kTool);
    for (int side = 0; side < 2; ++side) {
      CameraView& cam = f.cameras[side];
      cam.intrinsics = K;
      cam.X_GCam = g_.camera_pose(side);
      const Patch p = X_GC ? patch_for(*X_GC, radius, side, cam.X_GCam, pitch) : Patch{};
      const Patch rest = patch_for(identity, radius, side, cam.X_GCam, 0.0);
      const Vec2 shift = p.contact ? Vec2(p.centre - rest.centre) : Vec2::Zero();
      const double ca = std::cos(p.angle), sa = std::sin(p.angle);
      Eigen::Matrix2d Rm;
      Rm << ca - 1.0, -sa, sa, ca - 1.0;
      const double inv2w = 1.0 / (2.0 * g_.flow_window * g_.flow_window);

      cam.depth = ImageF(K.width, K.height, D0);
      cam.ir = ImageF(K.width, K.height);
      for (int v = 0; v < K.height; ++v) {
        for (int u = 0; u < K.width; ++u) {
          const Vec2 ray((u - K.cx) / K.fx, (v - K.cy) / K.fy);
          double Z = D0;
          const double h0 = indentation(p, D0 * ray, sigma);
          if (h0 > 1e-9) {
            // Surface hit: bisect Z + h(Z ray) = D0 on [D0 - depth, D0].
            double lo = D0 - p.depth, hi = D0;
            for (int it = 0; it < 30; ++it) {
              const double mid = 0.5 * (lo + hi);
              if (mid + indentation(p, mid * ray, sigma) > D0) {
                hi = mid;
              } else {
                lo = mid;
              }
            }
            Z = 0.5 * (lo + hi);
          } else {
            Z = D0 - h0;
          }
          cam.depth(u, v) = Z;

          const Vec2 x = Z * ray;
          Vec2 xm = x;
          if (p.contact) {
            for (int it = 0; it < 4; ++it) {
              const Vec2 r = xm - rest.centre;
              const double w = std::exp(-r.squaredNorm() * inv2w);
              xm = x - w * (shift + Rm * r);
            }
          }
          cam.ir(u, v) = texture_at(side, xm);
        }
      }
      quantize_depth(cam.depth);
      quantize_intensity(cam.ir);
    }
    return f;
  }

  BubbleGeometry g_;
  double texel_ = 0.0;
  double tex_half_ = 0.0;
  std::array<ImageF, 2> textures_;
};

inline SensorFrame render_synthetic(const RigidTransform& X_GC, double radius,
                                    const BubbleGeometry& geometry) {
  return SyntheticSensor(geometry).render(X_GC, radius);
}

}  // namespace seed6d
