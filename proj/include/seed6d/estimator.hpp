#pragma once

// Visuotactile relative-pose estimation: depth background subtraction gives
// one contact patch per bubble, the two patch centroids fix position, roll
// and yaw, and the curl of the IR optical flow supplies pitch.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "seed6d/image.hpp"
#include "seed6d/sensor.hpp"

namespace seed6d {

struct PatchOptions {
  double threshold = 1e-3;  // m
  int kernel_size = 5;      // elliptical opening kernel, pixels
  std::size_t min_pixels = 20;
};

struct ContactPatch {
  Mask mask;
  Vec3 centroid = Vec3::Zero();  // camera frame, m
  std::size_t pixels = 0;
};

inline ContactPatch estimate_contact_patch(const ImageF& D0, const ImageF& Dk,
                                           const CameraIntrinsics& K, const PatchOptions& opt = {}) {
  if (!D0.same_size(Dk) || !Dk.same_size(K.width, K.height)) {
    throw Error("estimate_contact_patch: image sizes differ");
  }
  Mask raw(Dk.width(), Dk.height(), 0);
  for (int y = 0; y < Dk.height(); ++y) {
    for (int x = 0; x < Dk.width(); ++x) {
      raw(x, y) = (D0(x, y) - Dk(x, y) > opt.threshold && Dk(x, y) > 0.0) ? 1 : 0;
    }
  }
  ContactPatch p;
  p.mask = morphological_open(raw, elliptical_kernel(opt.kernel_size, opt.kernel_size));
  Vec3 sum = Vec3::Zero();
  for (int y = 0; y < Dk.height(); ++y) {
    for (int x = 0; x < Dk.width(); ++x) {
      if (!p.mask(x, y)) continue;
      sum += K.back_project(x, y, Dk(x, y));
      ++p.pixels;
    }
  }
  if (p.pixels < opt.min_pixels) {
    throw NoContact("contact patch has " + std::to_string(p.pixels) + " pixels, need " +
                    std::to_string(opt.min_pixels));
  }
  p.centroid = sum / static_cast<double>(p.pixels);
  return p;
}

/// Zero-pitch contact frame from the two patch centroids (gripper body frame).
inline RigidTransform estimate_frame(const Vec3& p_left, const Vec3& p_right) {
  const Vec3 d = p_right - p_left;
  if (!(d.norm() > 1e-3)) throw DegeneratePatches("contact patches closer than 1 mm");
  const Vec3 v = d.normalized();
  if (std::abs(v.y()) < 1e-9) throw DegenerateFrame("patch axis perpendicular to gripper y");
  const Vec3 u = Vec3(1.0, -v.x() / v.y(), 0.0).normalized();
  const Vec3 w = u.cross(v);
  Mat3 R;
  R << u, v, w;
  return {R, 0.5 * (p_left + p_right), Frame::kGripperBody, Frame::kZeroPitchTool};
}

// ---------------------------------------------------------------------------
// Block-matching flow

struct FlowOptions {
  int stride = 8;
  int window = 15;  // odd
  int search_radius = 6;
  double min_contrast = 0.02;  // window intensity std below this is LowTexture
};

struct FlowField {
  int cols = 0, rows = 0;
  int stride = 8;
  int origin = 0;  // pixel coordinate of cell (0, 0) centre, both axes
  std::vector<Vec2> v;
  std::vector<std::uint8_t> valid;

  const Vec2& at(int i, int j) const { return v[static_cast<std::size_t>(j) * cols + i]; }
  bool is_valid(int i, int j) const { return valid[static_cast<std::size_t>(j) * cols + i] != 0; }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
};

namespace detail {

inline double parabolic_offset(double left, double centre, double right) {
  const double den = left - 2.0 * centre + right;
  if (!(den > 0.0)) return 0.0;
  return std::clamp(0.5 * (left - right) / den, -0.5, 0.5);
}

}  // namespace detail

/// Eulerian flow of I_k relative to I_0: texture at x in I_0 is found at
/// x + V in I_k.
inline FlowField estimate_flow(const ImageF& I0, const ImageF& Ik, const FlowOptions& opt = {}) {
  if (!I0.same_size(Ik)) throw Error("estimate_flow: image sizes differ");
  if (opt.window < 3 || opt.window % 2 == 0) throw ConfigError("flow window must be odd and >= 3");
  if (opt.stride < 1 || opt.search_radius < 1) throw ConfigError("flow stride and radius must be >= 1");
  const int hw = opt.window / 2, r = opt.search_radius;
  FlowField f;
  f.stride = opt.stride;
  f.origin = hw + r;
  const int span_x = I0.width() - 1 - 2 * f.origin, span_y = I0.height() - 1 - 2 * f.origin;
  f.cols = span_x >= 0 ? span_x / opt.stride + 1 : 0;
  f.rows = span_y >= 0 ? span_y / opt.stride + 1 : 0;
  f.v.assign(static_cast<std::size_t>(f.cols) * f.rows, Vec2::Zero());
  f.valid.assign(f.v.size(), 0);

  const int side = 2 * r + 1;
  std::vector<double> ssd(static_cast<std::size_t>(side) * side);
  const double n = static_cast<double>(opt.window) * opt.window;
  for (int j = 0; j < f.rows; ++j) {
    for (int i = 0; i < f.cols; ++i) {
      const int cx = f.origin + i * opt.stride, cy = f.origin + j * opt.stride;
      double s = 0.0, s2 = 0.0;
      for (int y = cy - hw; y <= cy + hw; ++y) {
        for (int x = cx - hw; x <= cx + hw; ++x) {
          s += I0(x, y);
          s2 += I0(x, y) * I0(x, y);
        }
      }
      const double var = std::max(0.0, s2 / n - (s / n) * (s / n));
      if (std::sqrt(var) < opt.min_contrast) continue;

      int best = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          double acc = 0.0;
          for (int y = -hw; y <= hw; ++y) {
            for (int x = -hw; x <= hw; ++x) {
              const double e = Ik(cx + dx + x, cy + dy + y) - I0(cx + x, cy + y);
              acc += e * e;
            }
          }
          const int idx = (dy + r) * side + (dx + r);
          ssd[idx] = acc;
          if (acc < ssd[best]) best = idx;
        }
      }
      const int bx = best % side, by = best / side;
      double sx = bx - r, sy = by - r;
      // An exact match needs no refinement; the parabola would be biased by
      // asymmetric neighbours.
      const bool exact = ssd[best] == 0.0;
      if (!exact && bx > 0 && bx < side - 1) {
        sx += detail::parabolic_offset(ssd[best - 1], ssd[best], ssd[best + 1]);
      }
      if (!exact && by > 0 && by < side - 1) {
        sy += detail::parabolic_offset(ssd[best - side], ssd[best], ssd[best + side]);
      }
      const std::size_t k = static_cast<std::size_t>(j) * f.cols + i;
      f.v[k] = Vec2(sx, sy);
      f.valid[k] = 1;
    }
  }
  return f;
}

/// Mean of dV_y/dx - dV_x/dy (Sobel 3x3 on the flow grid, per pixel) over
/// cells whose whole 3x3 neighbourhood is valid.
inline double estimate_curl(const FlowField& f) {
  if (f.v.empty() || 2 * f.valid_count() < f.v.size()) {
    throw InsufficientFlow("fewer than half of the flow cells are valid");
  }
  double sum = 0.0;
  int used = 0;
  for (int j = 1; j + 1 < f.rows; ++j) {
    for (int i = 1; i + 1 < f.cols; ++i) {
      bool ok = true;
      for (int b = -1; b <= 1 && ok; ++b) {
        for (int a = -1; a <= 1 && ok; ++a) ok = f.is_valid(i + a, j + b);
      }
      if (!ok) continue;
      double dvy_dx = 0.0, dvx_dy = 0.0;
      for (int b = -1; b <= 1; ++b) {
        const double wb = b == 0 ? 2.0 : 1.0;
        dvy_dx += wb * (f.at(i + 1, j + b).y() - f.at(i - 1, j + b).y());
        dvx_dy += wb * (f.at(i + b, j + 1).x() - f.at(i + b, j - 1).x());
      }
      sum += (dvy_dx - dvx_dy) / (8.0 * f.stride);
      ++used;
    }
  }
  if (used == 0) throw InsufficientFlow("no interior flow cell with a valid neighbourhood");
  return sum / used;
}

inline double estimate_pitch(const FlowField& f, double k_curl) { return k_curl * estimate_curl(f); }

// ---------------------------------------------------------------------------
// Full pipeline

struct EstimatorCalibration {
  PatchOptions patch;
  FlowOptions flow;
  double k_curl = 0.5;
  std::array<ImageF, 2> background;  // no-contact depth per camera
};

struct PoseEstimate {
  RigidTransform X_TC;
  RigidTransform X_GCprime;  // current zero-pitch frame
  double pitch = 0.0;
  double signed_curl = 0.0;  // camera-averaged, sign-aligned with gripper +y
  std::array<std::size_t, 2> patch_pixels{};
};

namespace detail {

// Rotation about gripper +y appears in each camera as an in-image rotation
// whose sign follows the optical axis.
inline double curl_sign(const CameraView& c) {
  return c.X_GCam.rotation().col(2).y() >= 0.0 ? 1.0 : -1.0;
}

inline RigidTransform patch_frame(const SensorFrame& f, const EstimatorCalibration& cal,
                                  std::array<std::size_t, 2>* pixels = nullptr) {
  std::array<Vec3, 2> p;
  for (int s = 0; s < 2; ++s) {
    const CameraView& c = f.cameras[s];
    const ContactPatch patch = estimate_contact_patch(cal.background[s], c.depth, c.intrinsics, cal.patch);
    p[s] = c.X_GCam * patch.centroid;
    if (pixels) (*pixels)[s] = patch.pixels;
  }
  return estimate_frame(p[kLeft], p[kRight]);
}

}  // namespace detail

/// Camera-averaged, sign-aligned curl of the IR flow from reference to frame.
inline double signed_flow_curl(const SensorFrame& frame, const SensorFrame& reference,
                               const FlowOptions& opt) {
  double sum = 0.0;
  for (int s = 0; s < 2; ++s) {
    const FlowField v = estimate_flow(reference.cameras[s].ir, frame.cameras[s].ir, opt);
    sum += detail::curl_sign(frame.cameras[s]) * estimate_curl(v);
  }
  return 0.5 * sum;
}

/// Tool pose relative to the reference grasp. T is taken to coincide with
/// the contact frame recovered from `reference`.
inline PoseEstimate estimate_relative_pose(const SensorFrame& frame, const SensorFrame& reference,
                                           const EstimatorCalibration& cal) {
  frame.validate();
  reference.validate();
  PoseEstimate e;
  const RigidTransform X_GC0 = detail::patch_frame(reference, cal);
  e.X_GCprime = detail::patch_frame(frame, cal, &e.patch_pixels);
  e.signed_curl = signed_flow_curl(frame, reference, cal.flow);
  e.pitch = cal.k_curl * e.signed_curl;
  const RigidTransform X_CprimeC(RollPitchYaw(0.0, e.pitch, 0.0), Vec3::Zero(),
                                 Frame::kZeroPitchTool, Frame::kTool);
  e.X_TC = (X_GC0.inverse() * e.X_GCprime * X_CprimeC).with_frames(Frame::kGripper, Frame::kTool);
  return e;
}

/// Least-squares gain mapping signed curl to pitch: k = sum(c θ) / sum(c²).
inline double fit_k_curl(const std::vector<double>& curls, const std::vector<double>& pitches) {
  if (curls.size() != pitches.size() || curls.empty()) {
    throw Error("fit_k_curl: need matching, non-empty samples");
  }
  double cc = 0.0, ct = 0.0;
  for (std::size_t i = 0; i < curls.size(); ++i) {
    cc += curls[i] * curls[i];
    ct += curls[i] * pitches[i];
  }
  if (!(cc > 0.0)) throw InsufficientFlow("fit_k_curl: calibration sweep produced no curl");
  return ct / cc;
}

}  // namespace seed6d
