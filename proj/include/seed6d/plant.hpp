#pragma once

// Quasi-static plant: an ideally position-tracked gripper frame T, a bushing
// between T and the tool frame C, and a rigid tool whose contact points touch
// a (possibly tilted) plane through frictionless penalty springs. Every state
// is the static equilibrium of the total potential energy
//
//   E = 1/2 Θ^T K_tau Θ + 1/2 x^T K_f x + sum_i 1/2 k_c max(0, depth_i)^2 + m g z_com
//
// over the relative pose (Θ, x) of C in T.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "seed6d/se3.hpp"
#include "seed6d/stiffness.hpp"

namespace seed6d {

struct ToolModel {
  std::string name = "tool";
  std::vector<Vec3> contact_points;  // in C
  double mass = 0.0;
  Vec3 center_of_mass = Vec3::Zero();  // in C

  void validate() const {
    if (contact_points.empty()) throw ConfigError("tool '" + name + "' has no contact points");
    if (!(mass >= 0.0)) throw ConfigError("tool mass must be non-negative");
  }
};

struct EnvironmentModel {
  double plane_height = 0.0;
  /// Rotation of the plane normal about world x, radians.
  double plane_tilt = 0.0;
  double contact_stiffness = 1e4;  // per contact point, N/m
  double gravity = 9.81;

  Vec3 normal() const { return {0.0, -std::sin(plane_tilt), std::cos(plane_tilt)}; }
  Vec3 anchor() const { return {0.0, 0.0, plane_height}; }

  /// Penetration depth of a world point, zero when above the plane.
  double penetration(const Vec3& p_W) const {
    return std::max(0.0, normal().dot(anchor() - p_W));
  }

  void validate() const {
    if (!(contact_stiffness > 0.0)) throw ConfigError("contact stiffness must be positive");
  }
};

struct ContactResult {
  std::vector<double> lambda;  // per-point normal force, N
  double normal_force = 0.0;   // F_z = sum lambda_i
  double torque_x = 0.0;       // x component of sum r_i x lambda_i, about C in C
  SpatialForce external_T;     // contact + gravity load on C, about C, in T
};

struct EquilibriumOptions {
  int max_iterations = 200;
  double residual_tolerance = 1e-10;
  double accept_tolerance = 1e-8;
  double hessian_step = 1e-7;
};

struct Equilibrium {
  RigidTransform X_WC;
  RigidTransform X_TC;
  ContactResult contact;
  double residual = 0.0;
  double energy = 0.0;
  int iterations = 0;
};

namespace detail {

// Generalized coordinates q = (roll, pitch, yaw, x, y, z) of T X^C.
class ToolEnergy {
 public:
  ToolEnergy(const RigidTransform& X_WT, const ToolModel& tool, const EnvironmentModel& env,
             const StiffnessParams& k)
      : X_WT_(X_WT), tool_(tool), env_(env), k_(k) {}

  static RigidTransform relative(const Vec6& q) {
    return {RollPitchYaw(q.head<3>()), q.tail<3>(), Frame::kGripper, Frame::kTool};
  }

  double energy(const Vec6& q) const {
    const Vec3 th = q.head<3>(), x = q.tail<3>();
    double e = 0.5 * th.dot(k_.k_tau.cwiseProduct(th)) + 0.5 * x.dot(k_.k_f.cwiseProduct(x));
    const Mat3 R_WC = X_WT_.rotation() * rpy_to_rotation(RollPitchYaw(th));
    const Vec3 p_WC = X_WT_.translation() + X_WT_.rotation() * x;
    for (const Vec3& r : tool_.contact_points) {
      const double d = env_.penetration(p_WC + R_WC * r);
      e += 0.5 * env_.contact_stiffness * d * d;
    }
    if (tool_.mass > 0.0) e += tool_.mass * env_.gravity * (p_WC + R_WC * tool_.center_of_mass).z();
    return e;
  }

  /// External load on C (about C, in T) and per-point normal forces.
  ContactResult external(const Vec6& q) const {
    const Vec3 th = q.head<3>(), x = q.tail<3>();
    const Mat3 R_TC = rpy_to_rotation(RollPitchYaw(th));
    const Mat3 R_WC = X_WT_.rotation() * R_TC;
    const Mat3 R_TW = X_WT_.rotation().transpose();
    const Vec3 p_WC = X_WT_.translation() + X_WT_.rotation() * x;
    const Vec3 n = env_.normal();
    ContactResult c;
    Vec3 tau = Vec3::Zero(), f = Vec3::Zero(), tau_C = Vec3::Zero();
    for (const Vec3& r : tool_.contact_points) {
      const double lam = env_.contact_stiffness * env_.penetration(p_WC + R_WC * r);
      c.lambda.push_back(lam);
      c.normal_force += lam;
      const Vec3 F_T = R_TW * (lam * n);
      f += F_T;
      tau += (R_TC * r).cross(F_T);
      tau_C += r.cross(R_WC.transpose() * (lam * n));
    }
    if (tool_.mass > 0.0) {
      const Vec3 F_T = R_TW * Vec3(0.0, 0.0, -tool_.mass * env_.gravity);
      f += F_T;
      tau += (R_TC * tool_.center_of_mass).cross(F_T);
    }
    c.torque_x = tau_C.x();
    c.external_T = SpatialForce(tau, f, Frame::kGripper);
    return c;
  }

  Vec6 gradient(const Vec6& q) const {
    const RollPitchYaw rpy(q.head<3>());
    const SpatialForce ext = external(q).external_T;
    Vec6 g;
    g.head<3>() = k_.k_tau.cwiseProduct(q.head<3>()) - gimbal_rate_matrix(rpy).transpose() * ext.torque;
    g.tail<3>() = k_.k_f.cwiseProduct(q.tail<3>()) - ext.force;
    return g;
  }

  /// Bushing wrench minus external load, i.e. the static wrench imbalance.
  Vec6 wrench_residual(const Vec6& q) const {
    const SpatialForce ext = external(q).external_T;
    const SpatialForce bushing = stiffness_forward(RollPitchYaw(q.head<3>()), q.tail<3>(), k_);
    return bushing.vector() - ext.vector();
  }

  Mat6 hessian(const Vec6& q, double h) const {
    Mat6 H;
    for (int j = 0; j < 6; ++j) {
      Vec6 qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      H.col(j) = (gradient(qp) - gradient(qm)) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
  }

  const RigidTransform& X_WT() const { return X_WT_; }

 private:
  RigidTransform X_WT_;
  const ToolModel& tool_;
  const EnvironmentModel& env_;
  StiffnessParams k_;
};

inline std::string format_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", r);
  return buf;
}

inline bool pitch_admissible(const Vec6& q) {
  return std::abs(std::cos(q[1])) > 1e-3;
}

}  // namespace detail

/// Static equilibrium of the tool for gripper pose X_WT. Newton with a
/// backtracking line search, warm-started from `guess`.
inline Equilibrium solve_tool_equilibrium(const RigidTransform& X_WT, const ToolModel& tool,
                                          const EnvironmentModel& env, const StiffnessParams& k,
                                          const RigidTransform& guess = RigidTransform::identity(),
                                          const EquilibriumOptions& opt = {}) {
  const detail::ToolEnergy model(X_WT, tool, env, k);
  Vec6 q;
  q << guess.rpy().vector(), guess.translation();

  double residual = model.wrench_residual(q).norm();
  int it = 0;
  for (; it < opt.max_iterations && residual > opt.residual_tolerance; ++it) {
    const Vec6 g = model.gradient(q);
    const Mat6 H = model.hessian(q, opt.hessian_step);
    Eigen::SelfAdjointEigenSolver<Mat6> eig(H);
    Vec6 ev = eig.eigenvalues();
    const double floor = 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < 6; ++i) ev[i] = std::max(std::abs(ev[i]), floor);
    const Vec6 step = -(eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose() * g);

    // Full Newton steps are taken whenever they shrink the wrench imbalance.
    const Vec6 full = q + step;
    if (detail::pitch_admissible(full) && model.wrench_residual(full).norm() < residual) {
      q = full;
    } else {
      const double e0 = model.energy(q);
      const double slope = g.dot(step);
      double alpha = 0.5;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const Vec6 trial = q + alpha * step;
        if (!detail::pitch_admissible(trial)) continue;
        if (model.energy(trial) <= e0 + 1e-4 * alpha * slope) {
          q = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    residual = model.wrench_residual(q).norm();
  }

  if (std::abs(std::cos(q[1])) < 1e-3) {
    throw GimbalLock("tool equilibrium approaches |p| = pi/2");
  }
  if (!(residual <= opt.accept_tolerance)) {
    throw NoConvergence("tool equilibrium: residual " + detail::format_residual(residual) + " after " +
                        std::to_string(it) + " iterations");
  }

  Equilibrium out;
  out.X_TC = detail::ToolEnergy::relative(q);
  out.X_WC = (X_WT.with_frames(Frame::kWorld, Frame::kGripper) * out.X_TC);
  out.contact = model.external(q);
  out.residual = residual;
  out.energy = model.energy(q);
  out.iterations = it;
  return out;
}

/// Total potential energy at relative pose X_TC (used by tests and oracles).
inline double tool_energy(const RigidTransform& X_WT, const RigidTransform& X_TC,
                          const ToolModel& tool, const EnvironmentModel& env,
                          const StiffnessParams& k) {
  Vec6 q;
  q << X_TC.rpy().vector(), X_TC.translation();
  return detail::ToolEnergy(X_WT, tool, env, k).energy(q);
}

/// Contact forces for a tool rigidly attached at T (X_TC = identity).
inline ContactResult welded_contact(const RigidTransform& X_WT, const ToolModel& tool,
                                    const EnvironmentModel& env, const StiffnessParams& k) {
  return detail::ToolEnergy(X_WT, tool, env, k).external(Vec6::Zero());
}

// ---------------------------------------------------------------------------

struct PlantConfig {
  ToolModel tool;
  EnvironmentModel environment;
  StiffnessParams stiffness;
  bool welded = false;
  /// Per-axis standard deviation of the realized gripper position, m.
  double repeatability_sigma = 1e-4;
  EquilibriumOptions solver;
};

struct PlantState {
  RigidTransform X_WT_cmd = RigidTransform::identity(Frame::kWorld, Frame::kGripper);
  RigidTransform X_WT = RigidTransform::identity(Frame::kWorld, Frame::kGripper);
  RigidTransform X_TC = RigidTransform::identity(Frame::kGripper, Frame::kTool);
  RigidTransform X_WC = RigidTransform::identity(Frame::kWorld, Frame::kTool);
  ContactResult contact;
  double time = 0.0;
  std::mt19937_64 rng{0};
};

namespace detail {

// Box-Muller on top of mt19937_64 so noise sequences do not depend on the
// standard library's distribution implementation.
inline double standard_normal(std::mt19937_64& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(rng() >> 11) * kScale;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(rng() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

inline PlantState settle(PlantState s, const RigidTransform& X_WT, const PlantConfig& cfg) {
  s.X_WT = X_WT.with_frames(Frame::kWorld, Frame::kGripper);
  if (cfg.welded) {
    s.X_TC = RigidTransform::identity(Frame::kGripper, Frame::kTool);
    s.contact = welded_contact(s.X_WT, cfg.tool, cfg.environment, cfg.stiffness);
  } else {
    const Equilibrium eq = solve_tool_equilibrium(s.X_WT, cfg.tool, cfg.environment,
                                                  cfg.stiffness, s.X_TC, cfg.solver);
    s.X_TC = eq.X_TC;
    s.contact = eq.contact;
  }
  s.X_WC = s.X_WT * s.X_TC;
  return s;
}

inline PlantState initial_state(const RigidTransform& X_WT, const PlantConfig& cfg,
                                std::uint64_t seed) {
  PlantState s;
  s.rng.seed(seed);
  s.X_WT_cmd = X_WT.with_frames(Frame::kWorld, Frame::kGripper);
  const RigidTransform realized = s.X_WT_cmd;
  return settle(std::move(s), realized, cfg);
}

/// Applies a gripper command and returns the next equilibrium state.
inline PlantState step(PlantState s, const RigidTransform& X_WT_d, double dt,
                       const PlantConfig& cfg) {
  if (!X_WT_d.translation().allFinite() || !X_WT_d.rotation().allFinite()) {
    throw Error("plant step: command pose is not finite");
  }
  s.X_WT_cmd = X_WT_d.with_frames(Frame::kWorld, Frame::kGripper);
  Vec3 p = s.X_WT_cmd.translation();
  if (cfg.repeatability_sigma > 0.0) {
    for (int i = 0; i < 3; ++i) p[i] += cfg.repeatability_sigma * detail::standard_normal(s.rng);
  }
  const RigidTransform realized(s.X_WT_cmd.rotation(), p);
  s = settle(std::move(s), realized, cfg);
  s.time += dt;
  return s;
}

/// Exact relative pose feedback.
inline RigidTransform observe_relative_pose(const PlantState& s) {
  return s.X_TC.with_frames(Frame::kGripper, Frame::kTool);
}

}  // namespace seed6d
