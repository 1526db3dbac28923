#pragma once

// Closed-loop / open-loop / welded scenario runner over the quasi-static
// plant, with a CSV trace and a steady-state summary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seed6d/config.hpp"
#include "seed6d/controller.hpp"
#include "seed6d/plant.hpp"

namespace seed6d {

enum class ScenarioMode { kClosedLoop, kOpenLoop, kWelded };
enum class ControlLaw { kForce, kHybrid };

inline std::string scenario_mode_name(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::kClosedLoop: return "closed-loop";
    case ScenarioMode::kOpenLoop: return "open-loop";
    case ScenarioMode::kWelded: return "welded";
  }
  return "?";
}

struct Waypoint {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
};

struct ScenarioConfig {
  std::string name = "scenario";
  ScenarioMode mode = ScenarioMode::kClosedLoop;
  ControlLaw law = ControlLaw::kHybrid;
  std::uint64_t seed = 1;
  double duration = 2.0;
  /// Length of the trailing window used for steady-state statistics, s.
  double steady_window = 0.5;
  PlantConfig plant;
  ControllerConfig controller;
  HybridSpec task;
  RigidTransform initial_pose = RigidTransform::identity(Frame::kWorld, Frame::kGripper);
  /// Gripper path for open-loop and welded runs; position-channel targets
  /// for the tool in closed loop.
  std::vector<Waypoint> trajectory;

  int steps() const { return static_cast<int>(std::lround(duration / controller.dt)); }

  /// Normal force the task asks for.
  double commanded_fz() const { return -task.force_target.z(); }

  SpatialForce desired_wrench() const {
    return {task.torque_target, task.force_target, Frame::kWorld};
  }

  void validate() const {
    controller.validate();
    plant.tool.validate();
    plant.environment.validate();
    plant.stiffness.validate();
    task.validate();
    if (!(duration > 0.0)) throw ConfigError("duration must be positive");
    if (!(steady_window > 0.0) || steady_window > duration) {
      throw ConfigError("steady_window must lie in (0, duration]");
    }
    if (mode != ScenarioMode::kClosedLoop && trajectory.empty()) {
      throw ConfigError(scenario_mode_name(mode) + " scenarios need a trajectory");
    }
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      if (!(trajectory[i].time > trajectory[i - 1].time)) {
        throw ConfigError("trajectory times must increase strictly");
      }
    }
  }
};

/// Piecewise-linear interpolation, held constant outside the waypoints.
inline Vec3 trajectory_position(const std::vector<Waypoint>& path, double t) {
  if (path.empty()) return Vec3::Zero();
  if (t <= path.front().time) return path.front().position;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (t <= path[i].time) {
      const double s = (t - path[i - 1].time) / (path[i].time - path[i - 1].time);
      return (1.0 - s) * path[i - 1].position + s * path[i].position;
    }
  }
  return path.back().position;
}

// ---------------------------------------------------------------------------
// Config parsing

inline ToolModel parse_tool(ConfigNode node) {
  ToolModel t;
  t.name = node.string("name", "tool");
  t.contact_points = node.vec3_list("contact_points");
  t.mass = node.number("mass", 0.0);
  t.center_of_mass = node.vec3("center_of_mass", Vec3::Zero());
  node.finish();
  try {
    t.validate();
  } catch (const ConfigError& e) {
    node.fail(e.what());
  }
  return t;
}

inline EnvironmentModel parse_environment(ConfigNode node) {
  EnvironmentModel env;
  env.plane_height = node.number("plane_height", env.plane_height);
  env.plane_tilt = degrees(node.number("plane_tilt_deg", 0.0));
  env.contact_stiffness = node.number("contact_stiffness", env.contact_stiffness);
  env.gravity = node.number("gravity", env.gravity);
  node.finish();
  if (!(env.contact_stiffness > 0.0)) node.fail("contact_stiffness must be positive");
  return env;
}

inline ScenarioMode parse_scenario_mode(const std::string& s) {
  if (s == "closed-loop") return ScenarioMode::kClosedLoop;
  if (s == "open-loop" || s == "open-loop-baseline") return ScenarioMode::kOpenLoop;
  if (s == "welded") return ScenarioMode::kWelded;
  throw ConfigError("unknown mode '" + s + "' (closed-loop, open-loop, welded)");
}

inline ScenarioConfig parse_scenario(const Json& j, const std::string& source = "config") {
  ConfigNode root(j, "", source);
  ScenarioConfig cfg;
  cfg.name = root.string("name");
  try {
    cfg.mode = parse_scenario_mode(root.string("mode"));
  } catch (const ConfigError& e) {
    root.fail("mode", e.what());
  }
  const std::string law = root.string("control", "hybrid");
  if (law == "hybrid") {
    cfg.law = ControlLaw::kHybrid;
  } else if (law == "force") {
    cfg.law = ControlLaw::kForce;
  } else {
    root.fail("control", "unknown control law '" + law + "' (force, hybrid)");
  }
  cfg.seed = root.unsigned_integer("seed", cfg.seed);
  cfg.duration = root.number("duration");
  cfg.steady_window = root.number("steady_window", 0.2 * cfg.duration);

  cfg.plant.stiffness = parse_stiffness(root.object("stiffness"));
  cfg.controller.stiffness_estimate = root.has("stiffness_estimate")
                                          ? parse_stiffness(root.object("stiffness_estimate"))
                                          : cfg.plant.stiffness;
  cfg.plant.tool = parse_tool(root.object("tool"));
  cfg.plant.environment = root.has("environment") ? parse_environment(root.object("environment"))
                                                  : EnvironmentModel{};
  cfg.plant.welded = cfg.mode == ScenarioMode::kWelded;
  cfg.plant.repeatability_sigma = root.number("repeatability_sigma", cfg.plant.repeatability_sigma);

  if (root.has("controller")) {
    ConfigNode c = root.object("controller");
    cfg.controller.dt = c.number("dt", cfg.controller.dt);
    cfg.controller.max_step_translation =
        c.number("max_step_translation", cfg.controller.max_step_translation);
    cfg.controller.max_step_rotation =
        degrees(c.number("max_step_rotation_deg", cfg.controller.max_step_rotation * 180.0 / M_PI));
    c.finish();
  }
  cfg.controller.horizon = cfg.duration;

  {
    ConfigNode p = root.object("initial_pose");
    const Vec3 pos = p.vec3("position");
    const Vec3 rpy_deg = p.vec3("rpy_deg", Vec3::Zero());
    p.finish();
    cfg.initial_pose = RigidTransform(RollPitchYaw(Vec3(rpy_deg * M_PI / 180.0)), pos,
                                      Frame::kWorld, Frame::kGripper);
  }

  if (root.has("trajectory")) {
    for (ConfigNode w : root.object_list("trajectory")) {
      Waypoint wp;
      wp.time = w.number("time");
      wp.position = w.vec3("position");
      w.finish();
      cfg.trajectory.push_back(wp);
    }
  }

  {
    ConfigNode t = root.object("task");
    std::vector<int> axes = t.has("position_axes") ? t.int_list("position_axes") : std::vector<int>{};
    for (int a : axes) {
      if (a < 0 || a > 2) t.fail("position_axes", "axis indices must be 0, 1 or 2");
    }
    cfg.task.position_selection = Mat3::Zero();
    for (int a : axes) cfg.task.position_selection(a, a) = 1.0;
    try {
      cfg.task.rotation_mode = parse_rotation_mode(t.string("rotation_mode", "all-torques"));
    } catch (const ConfigError& e) {
      t.fail("rotation_mode", e.what());
    }
    cfg.task.force_target = t.vec3("force", Vec3::Zero());
    cfg.task.torque_target = t.vec3("torque", Vec3::Zero());
    cfg.task.angle_target = RollPitchYaw(Vec3(t.vec3("angles_deg", Vec3::Zero()) * M_PI / 180.0));
    t.finish();
  }
  root.finish();

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  return parse_scenario(load_json_file(path), path);
}

// ---------------------------------------------------------------------------
// Trace

struct TraceRecord {
  double time = 0.0;
  Vec6 command = Vec6::Zero();   // W X^T_cmd: x y z roll pitch yaw
  Vec6 relative = Vec6::Zero();  // T X^C: x y z roll pitch yaw
  Vec6 desired = Vec6::Zero();   // tx ty tz fx fy fz
  Vec6 bushing = Vec6::Zero();   // K(T X^C): tx ty tz fx fy fz
  double f_z = 0.0;
  double tau_x = 0.0;
  std::vector<double> lambda;
};

inline Vec6 pose_vector(const RigidTransform& X) {
  Vec6 v;
  v << X.translation(), X.rpy().vector();
  return v;
}

inline std::string trace_header(std::size_t contacts) {
  std::string h =
      "time,cmd_x,cmd_y,cmd_z,cmd_roll,cmd_pitch,cmd_yaw,"
      "rel_x,rel_y,rel_z,rel_roll,rel_pitch,rel_yaw,"
      "des_tx,des_ty,des_tz,des_fx,des_fy,des_fz,"
      "bush_tx,bush_ty,bush_tz,bush_fx,bush_fy,bush_fz,f_z,tau_x";
  for (std::size_t i = 0; i < contacts; ++i) h += ",lambda_" + std::to_string(i);
  return h;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string trace_line(const TraceRecord& r) {
  std::string s = format_number(r.time);
  auto put = [&s](double v) {
    s += ',';
    s += format_number(v);
  };
  for (const Vec6* v : {&r.command, &r.relative, &r.desired, &r.bushing}) {
    for (int i = 0; i < 6; ++i) put((*v)[i]);
  }
  put(r.f_z);
  put(r.tau_x);
  for (double l : r.lambda) put(l);
  return s;
}

/// Parses a trace produced by trace_header / trace_line. Marker lines
/// starting with '#' are skipped.
inline std::vector<std::vector<double>> parse_trace(std::istream& in, std::string* header = nullptr) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      if (header) *header = line;
      first = false;
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = std::min(line.find(',', pos), line.size());
      const std::string cell = line.substr(pos, next - pos);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty()) throw IoError("malformed trace cell '" + cell + "'");
      row.push_back(v);
      pos = next + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Runner

struct ScenarioSummary {
  std::string name;
  ScenarioMode mode = ScenarioMode::kClosedLoop;
  int steps = 0;
  double commanded_fz = 0.0;
  double steady_fz = 0.0;
  double steady_fz_error = 0.0;           // |steady F_z - commanded|, N
  double steady_fz_relative_error = 0.0;  // relative to commanded
  double steady_abs_tau_x = 0.0;
  double max_abs_tau_x = 0.0;
  /// First time after which F_z stays within 5% of the command.
  std::optional<double> convergence_time;

  Json to_json() const {
    Json j;
    j["name"] = name;
    j["mode"] = scenario_mode_name(mode);
    j["steps"] = steps;
    j["commanded_fz"] = commanded_fz;
    j["steady_state_error"] = {{"f_z", steady_fz_error},
                               {"f_z_relative", steady_fz_relative_error},
                               {"tau_x", steady_abs_tau_x}};
    j["steady_fz"] = steady_fz;
    j["max_abs_tau_x"] = max_abs_tau_x;
    j["convergence_time"] = convergence_time ? Json(*convergence_time) : Json(nullptr);
    return j;
  }
};

struct ScenarioResult {
  std::vector<TraceRecord> records;
  ScenarioSummary summary;
};

inline ScenarioSummary summarize(const ScenarioConfig& cfg, const std::vector<TraceRecord>& recs) {
  ScenarioSummary s;
  s.name = cfg.name;
  s.mode = cfg.mode;
  s.steps = static_cast<int>(recs.size());
  s.commanded_fz = cfg.commanded_fz();
  if (recs.empty()) return s;
  const double t_end = recs.back().time;
  int n = 0;
  for (const TraceRecord& r : recs) {
    s.max_abs_tau_x = std::max(s.max_abs_tau_x, std::abs(r.tau_x));
    if (r.time >= t_end - cfg.steady_window - 1e-12) {
      s.steady_fz += r.f_z;
      s.steady_abs_tau_x += std::abs(r.tau_x);
      ++n;
    }
  }
  s.steady_fz /= n;
  s.steady_abs_tau_x /= n;
  s.steady_fz_error = std::abs(s.steady_fz - s.commanded_fz);
  s.steady_fz_relative_error =
      s.commanded_fz != 0.0 ? s.steady_fz_error / std::abs(s.commanded_fz) : s.steady_fz_error;
  const double band = 0.05 * std::abs(s.commanded_fz);
  for (std::size_t i = recs.size(); i-- > 0;) {
    if (std::abs(recs[i].f_z - s.commanded_fz) > band) {
      if (i + 1 < recs.size()) s.convergence_time = recs[i + 1].time;
      break;
    }
    if (i == 0) s.convergence_time = recs[0].time;
  }
  return s;
}

/// Runs the scenario, streaming the trace to `trace` when given. On a
/// simulation error the partial trace is terminated with a marker line and
/// the error is rethrown with the step index.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, std::ostream* trace = nullptr) {
  cfg.validate();
  ScenarioResult out;
  PlantState state = initial_state(cfg.initial_pose, cfg.plant, cfg.seed);
  const double dt = cfg.controller.dt;
  const int n = cfg.steps();
  if (trace) *trace << trace_header(cfg.plant.tool.contact_points.size()) << '\n';

  int k = 0;
  try {
    for (k = 1; k <= n; ++k) {
      const double t = k * dt;
      RigidTransform command;
      if (cfg.mode == ScenarioMode::kClosedLoop) {
        const RigidTransform y = observe_relative_pose(state);
        if (cfg.law == ControlLaw::kForce) {
          command = force_control_step(y, state.X_WT_cmd, cfg.desired_wrench(), cfg.controller);
        } else {
          HybridSpec spec = cfg.task;
          if (!cfg.trajectory.empty()) spec.position_target = trajectory_position(cfg.trajectory, t);
          command = hybrid_control_step(y, state.X_WT_cmd, spec, cfg.controller);
        }
      } else {
        command = RigidTransform(cfg.initial_pose.rotation(), trajectory_position(cfg.trajectory, t),
                                 Frame::kWorld, Frame::kGripper);
      }
      state = step(std::move(state), command, dt, cfg.plant);

      TraceRecord r;
      r.time = t;
      r.command = pose_vector(state.X_WT_cmd);
      r.relative = pose_vector(state.X_TC);
      r.desired = cfg.desired_wrench().vector();
      r.bushing = stiffness_forward(state.X_TC, cfg.plant.stiffness).vector();
      r.f_z = state.contact.normal_force;
      r.tau_x = state.contact.torque_x;
      r.lambda = state.contact.lambda;
      if (trace) *trace << trace_line(r) << '\n';
      out.records.push_back(std::move(r));
    }
  } catch (const Error& e) {
    if (trace) {
      *trace << "# truncated at step " << k << ": " << e.what() << '\n';
      trace->flush();
    }
    throw Error("scenario '" + cfg.name + "' failed at step " + std::to_string(k) + ": " + e.what());
  }
  if (trace) trace->flush();
  out.summary = summarize(cfg, out.records);
  return out;
}

}  // namespace seed6d
