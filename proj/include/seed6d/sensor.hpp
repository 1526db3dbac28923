#pragma once

// Stereo bubble-sensor frames: pinhole intrinsics, per-camera depth and IR
// images, and the directory format frames are persisted in.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "seed6d/config.hpp"
#include "seed6d/image.hpp"
#include "seed6d/se3.hpp"

namespace seed6d {

inline constexpr double kDepthScale = 1e-5;  // metres per 16-bit count

struct CameraIntrinsics {
  double fx = 80.0, fy = 80.0;
  double cx = 63.5, cy = 63.5;
  int width = 128, height = 128;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw ConfigError("intrinsics: image size must be positive");
    if (!(cx >= 0.0 && cx <= width - 1.0 && cy >= 0.0 && cy <= height - 1.0)) {
      throw ConfigError("intrinsics: principal point outside image");
    }
  }

  /// Point at camera depth z along the ray through pixel (u, v).
  Vec3 back_project(double u, double v, double z) const {
    return {z * (u - cx) / fx, z * (v - cy) / fy, z};
  }
  Vec2 project(const Vec3& p) const { return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy}; }
};

enum Side { kLeft = 0, kRight = 1 };

struct CameraView {
  CameraIntrinsics intrinsics;
  RigidTransform X_GCam;  // camera pose in the gripper body frame
  ImageF depth;           // metres, camera z
  ImageF ir;              // intensity in [0, 1]
};

struct SensorFrame {
  std::array<CameraView, 2> cameras;
  double tool_radius = 0.0;
  std::optional<RigidTransform> truth_X_GC;  // generator ground truth, if known

  void validate() const {
    for (const CameraView& c : cameras) {
      c.intrinsics.validate();
      if (!c.depth.same_size(c.intrinsics.width, c.intrinsics.height) ||
          !c.ir.same_size(c.intrinsics.width, c.intrinsics.height)) {
        throw Error("sensor frame: image size does not match intrinsics");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Quantization to the stored representation. Rendering quantizes in memory so
// that a save/load round trip is lossless.

inline std::uint16_t depth_to_counts(double metres) {
  return static_cast<std::uint16_t>(std::clamp(std::lround(metres / kDepthScale), 0L, 65535L));
}
inline double counts_to_depth(std::uint16_t c) { return c * kDepthScale; }
inline std::uint8_t intensity_to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

inline void quantize_depth(ImageF& d) {
  for (double& v : d.data()) v = counts_to_depth(depth_to_counts(v));
}
inline void quantize_intensity(ImageF& img) {
  for (double& v : img.data()) v = intensity_to_byte(v) / 255.0;
}

// ---------------------------------------------------------------------------
// Persistence: <dir>/{left,right}_{depth,ir}.pgm plus frame.json

namespace detail {

// Rotation stored row-major so the round trip is exact.
inline Json transform_to_json(const RigidTransform& X) {
  Json r = Json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(X.rotation()(i, j));
  }
  const Vec3& p = X.translation();
  return {{"rotation", r}, {"translation", {p.x(), p.y(), p.z()}}};
}

inline RigidTransform transform_from_json(ConfigNode n, Frame parent, Frame child) {
  const std::vector<double> r = n.number_list("rotation");
  if (r.size() != 9) n.fail("rotation", "expected 9 numbers");
  Mat3 R;
  for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = r[i];
  RigidTransform X(R, n.vec3("translation"), parent, child);
  n.finish();
  if (!X.is_valid(1e-9)) n.fail("rotation", "not a rotation matrix");
  return X;
}

inline const char* side_name(int s) { return s == kLeft ? "left" : "right"; }

}  // namespace detail

inline void save_sensor_frame(const SensorFrame& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json meta;
  meta["tool_radius"] = f.tool_radius;
  meta["truth_X_GC"] = f.truth_X_GC ? detail::transform_to_json(*f.truth_X_GC) : Json(nullptr);
  for (int s = 0; s < 2; ++s) {
    const CameraView& c = f.cameras[s];
    const std::string name = detail::side_name(s);
    Image<std::uint16_t> d(c.depth.width(), c.depth.height());
    for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] = depth_to_counts(c.depth.data()[i]);
    Image<std::uint8_t> ir(c.ir.width(), c.ir.height());
    for (std::size_t i = 0; i < ir.data().size(); ++i) ir.data()[i] = intensity_to_byte(c.ir.data()[i]);
    write_pgm16le((dir / (name + "_depth.pgm")).string(), d);
    write_pgm8((dir / (name + "_ir.pgm")).string(), ir);
    const CameraIntrinsics& k = c.intrinsics;
    meta["cameras"][name] = {
        {"intrinsics",
         {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}}},
        {"X_GCam", detail::transform_to_json(c.X_GCam)}};
  }
  std::ofstream out(dir / "frame.json");
  if (!out) throw IoError("cannot write '" + (dir / "frame.json").string() + "'");
  out << meta.dump(2) << '\n';
}

inline SensorFrame load_sensor_frame(const std::filesystem::path& dir) {
  const std::string meta_path = (dir / "frame.json").string();
  const Json meta = load_json_file(meta_path);
  ConfigNode root(meta, "", meta_path);
  SensorFrame f;
  f.tool_radius = root.number("tool_radius");
  if (!root.take_null("truth_X_GC")) {
    f.truth_X_GC =
        detail::transform_from_json(root.object("truth_X_GC"), Frame::kGripperBody, Frame::kTool);
  }
  ConfigNode cams = root.object("cameras");
  for (int s = 0; s < 2; ++s) {
    const std::string name = detail::side_name(s);
    ConfigNode c = cams.object(name);
    ConfigNode k = c.object("intrinsics");
    CameraView& v = f.cameras[s];
    v.intrinsics.fx = k.number("fx");
    v.intrinsics.fy = k.number("fy");
    v.intrinsics.cx = k.number("cx");
    v.intrinsics.cy = k.number("cy");
    v.intrinsics.width = static_cast<int>(k.unsigned_integer("width"));
    v.intrinsics.height = static_cast<int>(k.unsigned_integer("height"));
    k.finish();
    v.X_GCam = detail::transform_from_json(c.object("X_GCam"), Frame::kGripperBody,
                                           s == kLeft ? Frame::kLeftCamera : Frame::kRightCamera);
    c.finish();
    const auto d = read_pgm16le((dir / (name + "_depth.pgm")).string());
    const auto ir = read_pgm8((dir / (name + "_ir.pgm")).string());
    v.depth = ImageF(d.width(), d.height());
    for (std::size_t i = 0; i < d.data().size(); ++i) v.depth.data()[i] = counts_to_depth(d.data()[i]);
    v.ir = ImageF(ir.width(), ir.height());
    for (std::size_t i = 0; i < ir.data().size(); ++i) v.ir.data()[i] = ir.data()[i] / 255.0;
  }
  cams.finish();
  f.validate();
  return f;
}

}  // namespace seed6d
