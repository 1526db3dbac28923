#pragma once

// Synthetic estimator corpus: per-axis pose sweeps rendered by the synthetic
// sensor, k_curl calibration, on-disk persistence and the error report.

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "seed6d/config.hpp"
#include "seed6d/estimator.hpp"
#include "seed6d/render.hpp"

namespace seed6d {

inline constexpr std::array<const char*, 6> kPoseAxisNames = {"roll", "pitch", "yaw", "x", "y", "z"};

inline int pose_axis_index(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kPoseAxisNames[i]) return i;
  }
  return -1;
}

struct Sweep {
  int axis = 0;
  double range = 0.0;  // rad or m, symmetric
  int count = 0;
};

struct CorpusConfig {
  std::string name = "estimator_eval";
  double tool_radius = 0.02;
  BubbleGeometry geometry;
  std::vector<Sweep> sweeps;
  int calibration_points = 9;
  double calibration_range = 15.0 * M_PI / 180.0;
  EstimatorCalibration estimator;  // background filled in at generation
  std::string corpus_dir;          // empty: generate in memory

  std::size_t frame_count() const {
    std::size_t n = 0;
    for (const Sweep& s : sweeps) n += static_cast<std::size_t>(s.count);
    return n;
  }
};

inline RigidTransform sweep_pose(const Sweep& s, int i) {
  const double t = s.count == 1 ? 0.0 : -1.0 + 2.0 * i / (s.count - 1);
  Vec6 v = Vec6::Zero();
  v[s.axis] = t * s.range;
  return {RollPitchYaw(Vec3(v.head<3>())), v.tail<3>(), Frame::kGripperBody, Frame::kTool};
}

struct CorpusFrame {
  int sweep = 0;  // index into CorpusConfig::sweeps
  SensorFrame frame;
};

struct Corpus {
  SensorFrame background;
  SensorFrame reference;
  std::vector<CorpusFrame> frames;
  double k_curl = 0.0;
};

/// k_curl from a pitch sweep of `points` poses over [-range, range].
inline double calibrate_k_curl(const SyntheticSensor& sensor, double radius,
                               const SensorFrame& reference, const FlowOptions& flow, int points,
                               double range) {
  if (points < 2) throw ConfigError("calibration needs at least 2 points");
  std::vector<double> curls, pitches;
  for (int i = 0; i < points; ++i) {
    const double p = range * (-1.0 + 2.0 * i / (points - 1));
    const SensorFrame f =
        sensor.render(RigidTransform(RollPitchYaw(0, p, 0), Vec3::Zero()), radius);
    curls.push_back(signed_flow_curl(f, reference, flow));
    pitches.push_back(p);
  }
  return fit_k_curl(curls, pitches);
}

inline Corpus generate_corpus(const CorpusConfig& c) {
  const SyntheticSensor sensor(c.geometry);
  Corpus out;
  out.background = sensor.render_background(c.tool_radius);
  out.reference = sensor.render(RigidTransform::identity(), c.tool_radius);
  out.k_curl = calibrate_k_curl(sensor, c.tool_radius, out.reference, c.estimator.flow,
                                c.calibration_points, c.calibration_range);
  for (std::size_t s = 0; s < c.sweeps.size(); ++s) {
    for (int i = 0; i < c.sweeps[s].count; ++i) {
      out.frames.push_back({static_cast<int>(s), sensor.render(sweep_pose(c.sweeps[s], i), c.tool_radius)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: <dir>/{background,reference}/, <dir>/frames/NNNN/, corpus.json

namespace detail {

inline std::string frame_dir_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

}  // namespace detail

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  save_sensor_frame(corpus.background, dir / "background");
  save_sensor_frame(corpus.reference, dir / "reference");
  Json index = Json::array();
  for (std::size_t i = 0; i < corpus.frames.size(); ++i) {
    save_sensor_frame(corpus.frames[i].frame, dir / "frames" / detail::frame_dir_name(i));
    index.push_back({{"dir", detail::frame_dir_name(i)}, {"sweep", corpus.frames[i].sweep}});
  }
  std::ofstream out(dir / "corpus.json");
  if (!out) throw IoError("cannot write '" + (dir / "corpus.json").string() + "'");
  out << Json{{"k_curl", corpus.k_curl}, {"frames", index}}.dump(2) << '\n';
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
  const std::string path = (dir / "corpus.json").string();
  const Json j = load_json_file(path);
  ConfigNode root(j, "", path);
  Corpus c;
  c.k_curl = root.number("k_curl");
  for (ConfigNode e : root.object_list("frames")) {
    const std::string name = e.string("dir");
    const int sweep = static_cast<int>(e.unsigned_integer("sweep"));
    e.finish();
    c.frames.push_back({sweep, load_sensor_frame(dir / "frames" / name)});
  }
  root.finish();
  c.background = load_sensor_frame(dir / "background");
  c.reference = load_sensor_frame(dir / "reference");
  return c;
}

// ---------------------------------------------------------------------------
// Evaluation

struct SweepReport {
  std::string axis;
  int frames = 0;
  int failures = 0;  // frames where estimation threw
  std::array<double, 6> rms{};
  std::array<double, 6> max_abs{};
  double signed_bias = 0.0;  // mean(sign(true) * (est - true)) on the swept axis
};

struct EstimatorReport {
  std::vector<SweepReport> sweeps;
  std::array<double, 6> overall_rms{};  // over all successful frames
  int frames = 0;
  int failures = 0;
  double k_curl = 0.0;

  const SweepReport* sweep(const std::string& axis) const {
    for (const SweepReport& s : sweeps) {
      if (s.axis == axis) return &s;
    }
    return nullptr;
  }

  Json to_json() const {
    auto arr = [](const std::array<double, 6>& a) {
      Json j;
      for (int i = 0; i < 6; ++i) j[kPoseAxisNames[i]] = a[i];
      return j;
    };
    Json s = Json::array();
    for (const SweepReport& r : sweeps) {
      s.push_back({{"axis", r.axis},
                   {"frames", r.frames},
                   {"failures", r.failures},
                   {"rms", arr(r.rms)},
                   {"max_abs", arr(r.max_abs)},
                   {"signed_bias", r.signed_bias}});
    }
    return {{"frames", frames}, {"failures", failures},  {"k_curl", k_curl},
            {"units", "rad for roll/pitch/yaw, m for x/y/z"},
            {"overall_rms", arr(overall_rms)},           {"sweeps", s}};
  }
};

/// Per-axis pose error (est - true): RPY differences wrapped to (-pi, pi],
/// translation differences in metres.
inline Vec6 pose_error(const RigidTransform& est, const RigidTransform& truth) {
  Vec6 e;
  const Vec3 d = est.rpy().vector() - truth.rpy().vector();
  for (int i = 0; i < 3; ++i) e[i] = std::remainder(d[i], 2.0 * M_PI);
  e.tail<3>() = est.translation() - truth.translation();
  return e;
}

inline EstimatorReport evaluate_corpus(const Corpus& corpus, const std::vector<Sweep>& sweeps,
                                       EstimatorCalibration cal) {
  cal.k_curl = corpus.k_curl;
  for (int s = 0; s < 2; ++s) cal.background[s] = corpus.background.cameras[s].depth;
  EstimatorReport rep;
  rep.k_curl = corpus.k_curl;
  rep.sweeps.resize(sweeps.size());
  std::vector<std::array<double, 6>> sq(sweeps.size(), std::array<double, 6>{});
  std::array<double, 6> all_sq{};
  for (std::size_t s = 0; s < sweeps.size(); ++s) rep.sweeps[s].axis = kPoseAxisNames[sweeps[s].axis];

  for (const CorpusFrame& cf : corpus.frames) {
    if (cf.sweep < 0 || static_cast<std::size_t>(cf.sweep) >= sweeps.size()) {
      throw Error("corpus frame refers to an unknown sweep");
    }
    if (!cf.frame.truth_X_GC) throw Error("corpus frame has no ground truth");
    SweepReport& r = rep.sweeps[cf.sweep];
    ++rep.frames;
    Vec6 e;
    try {
      e = pose_error(estimate_relative_pose(cf.frame, corpus.reference, cal).X_TC, *cf.frame.truth_X_GC);
    } catch (const Error&) {
      ++r.failures;
      ++rep.failures;
      continue;
    }
    ++r.frames;
    for (int a = 0; a < 6; ++a) {
      sq[cf.sweep][a] += e[a] * e[a];
      all_sq[a] += e[a] * e[a];
      r.max_abs[a] = std::max(r.max_abs[a], std::abs(e[a]));
    }
    const int ax = sweeps[cf.sweep].axis;
    const Vec6 truth = pose_error(*cf.frame.truth_X_GC, RigidTransform::identity());
    const double sign = truth[ax] > 0.0 ? 1.0 : (truth[ax] < 0.0 ? -1.0 : 0.0);
    r.signed_bias += sign * e[ax];
  }
  const int ok = rep.frames - rep.failures;
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    SweepReport& r = rep.sweeps[s];
    if (r.frames == 0) continue;
    for (int a = 0; a < 6; ++a) r.rms[a] = std::sqrt(sq[s][a] / r.frames);
    r.signed_bias /= r.frames;
  }
  for (int a = 0; a < 6; ++a) rep.overall_rms[a] = ok > 0 ? std::sqrt(all_sq[a] / ok) : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Config

inline CameraIntrinsics parse_intrinsics(ConfigNode n) {
  CameraIntrinsics k;
  k.fx = n.number("fx", k.fx);
  k.fy = n.number("fy", k.fy);
  k.width = static_cast<int>(n.unsigned_integer("width", static_cast<std::uint64_t>(k.width)));
  k.height = static_cast<int>(n.unsigned_integer("height", static_cast<std::uint64_t>(k.height)));
  k.cx = n.number("cx", (k.width - 1) / 2.0);
  k.cy = n.number("cy", (k.height - 1) / 2.0);
  n.finish();
  try {
    k.validate();
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return k;
}

inline CorpusConfig parse_corpus_config(const Json& j, const std::string& source = "config") {
  ConfigNode root(j, "", source);
  CorpusConfig c;
  c.name = root.string("name", c.name);
  c.tool_radius = root.number("tool_radius", c.tool_radius);
  if (!(c.tool_radius > 0.0)) root.fail("tool_radius", "must be positive");
  c.geometry.texture_seed = root.unsigned_integer("seed", c.geometry.texture_seed);
  if (root.has("geometry")) {
    ConfigNode g = root.object("geometry");
    BubbleGeometry& b = c.geometry;
    b.membrane_offset = g.number("membrane_offset", b.membrane_offset);
    b.camera_distance = g.number("camera_distance", b.camera_distance);
    b.dome_radius = g.number("dome_radius", b.dome_radius);
    b.shear_length = g.number("shear_length", b.shear_length);
    b.blur_px = g.number("blur_px", b.blur_px);
    b.flow_window = g.number("flow_window", b.flow_window);
    if (g.has("intrinsics")) b.intrinsics = parse_intrinsics(g.object("intrinsics"));
    g.finish();
    try {
      b.validate();
    } catch (const ConfigError& e) {
      g.fail(e.what());
    }
  }
  for (ConfigNode s : root.object_list("sweeps")) {
    Sweep sw;
    const std::string axis = s.string("axis");
    sw.axis = pose_axis_index(axis);
    if (sw.axis < 0) s.fail("axis", "unknown axis '" + axis + "'");
    if (sw.axis < 3) {
      sw.range = degrees(s.number("range_deg"));
      if (sw.range > M_PI / 3.0) s.fail("range_deg", "must not exceed 60");
    } else {
      sw.range = s.number("range");
    }
    if (!(sw.range >= 0.0)) s.fail("range", "must be non-negative");
    sw.count = static_cast<int>(s.unsigned_integer("count"));
    s.finish();
    c.sweeps.push_back(sw);
  }
  if (root.has("calibration")) {
    ConfigNode k = root.object("calibration");
    c.calibration_points = static_cast<int>(k.unsigned_integer("points", 9));
    c.calibration_range = degrees(k.number("range_deg", 15.0));
    k.finish();
  }
  if (root.has("estimator")) {
    ConfigNode e = root.object("estimator");
    PatchOptions& p = c.estimator.patch;
    FlowOptions& f = c.estimator.flow;
    p.threshold = e.number("threshold", p.threshold);
    p.kernel_size = static_cast<int>(e.unsigned_integer("kernel_size", 5));
    p.min_pixels = e.unsigned_integer("min_pixels", p.min_pixels);
    f.stride = static_cast<int>(e.unsigned_integer("flow_stride", 8));
    f.window = static_cast<int>(e.unsigned_integer("flow_window", 15));
    f.search_radius = static_cast<int>(e.unsigned_integer("search_radius", 6));
    f.min_contrast = e.number("min_contrast", f.min_contrast);
    e.finish();
  }
  c.corpus_dir = root.string("corpus_dir", "");
  root.finish();
  return c;
}

}  // namespace seed6d
