#pragma once

// Stiffness identification from (relative pose, wrench) samples. Each axis is
// an independent one-parameter least-squares fit; rotational axes are fitted
// in gimbal-torque coordinates g = M(Θ)^T τ, where the bushing model is
// exactly linear (g = K_tau Θ).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "seed6d/config.hpp"
#include "seed6d/plant.hpp"
#include "seed6d/stiffness.hpp"

namespace seed6d {

inline constexpr std::array<const char*, 6> kSysIdAxisNames = {"roll", "pitch", "yaw",
                                                               "x",    "y",     "z"};

struct SysIdSample {
  RigidTransform X_TC;
  SpatialForce wrench;  // load on C, in T
};

struct SysIdOptions {
  double min_angle_range = 1.0 * M_PI / 180.0;  // rad
  double min_translation_range = 1e-4;          // m
  int bootstrap_resamples = 200;
  /// Weighted refits of the rotational axes after the unweighted start; 0
  /// gives plain least squares.
  int reweighting_passes = 3;
  std::uint64_t bootstrap_seed = 1;
};

struct AxisEstimate {
  std::string name;
  bool identifiable = false;
  double stiffness = std::numeric_limits<double>::quiet_NaN();
  double residual_rms = std::numeric_limits<double>::quiet_NaN();
  double bootstrap_std = std::numeric_limits<double>::quiet_NaN();
  double excitation_range = 0.0;
};

struct SysIdReport {
  std::array<AxisEstimate, 6> axes;

  bool all_identifiable() const {
    for (const AxisEstimate& a : axes) {
      if (!a.identifiable) return false;
    }
    return true;
  }

  /// Identified parameters; throws if any axis is unidentifiable.
  StiffnessParams params() const {
    if (!all_identifiable()) throw Error("sysid: not every axis is identifiable");
    return {Vec3(axes[0].stiffness, axes[1].stiffness, axes[2].stiffness),
            Vec3(axes[3].stiffness, axes[4].stiffness, axes[5].stiffness)};
  }

  Json to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    Json j = Json::array();
    for (const AxisEstimate& a : axes) {
      j.push_back({{"axis", a.name},
                   {"identifiable", a.identifiable},
                   {"stiffness", num(a.stiffness)},
                   {"residual_rms", num(a.residual_rms)},
                   {"bootstrap_std", num(a.bootstrap_std)},
                   {"excitation_range", a.excitation_range}});
    }
    return {{"axes", j}};
  }
};

namespace detail {

struct AxisData {
  std::vector<double> q;  // generalized coordinate
  std::vector<double> g;  // generalized force
  std::vector<double> w;  // least-squares weight
};

inline std::array<AxisData, 6> sysid_axis_data(const std::vector<SysIdSample>& samples) {
  std::array<AxisData, 6> d;
  for (const SysIdSample& s : samples) {
    const RollPitchYaw rpy = s.X_TC.rpy();
    const Vec3 g = gimbal_rate_matrix(rpy).transpose() * s.wrench.torque;
    const Vec3 th = rpy.vector();
    for (int a = 0; a < 3; ++a) {
      d[a].q.push_back(th[a]);
      d[a].g.push_back(g[a]);
      d[a].w.push_back(1.0);
      d[a + 3].q.push_back(s.X_TC.translation()[a]);
      d[a + 3].g.push_back(s.wrench.force[a]);
      d[a + 3].w.push_back(1.0);
    }
  }
  return d;
}

inline double fit_through_origin(const AxisData& d, const std::vector<std::size_t>* idx = nullptr) {
  double qq = 0.0, qg = 0.0;
  const std::size_t n = idx ? idx->size() : d.q.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = idx ? (*idx)[i] : i;
    qq += d.w[j] * d.q[j] * d.q[j];
    qg += d.w[j] * d.q[j] * d.g[j];
  }
  return qq > 0.0 ? qg / qq : std::numeric_limits<double>::quiet_NaN();
}

/// Reweights the rotational axes by the inverse predicted variance of each
/// generalized torque under relative wrench noise. Mixed poses let a stiff
/// axis leak through M^T into a soft one; those samples get small weight.
inline void reweight_rotational(std::array<AxisData, 6>& d, const std::vector<SysIdSample>& samples,
                                const Vec3& k_tau) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RollPitchYaw rpy = samples[i].X_TC.rpy();
    const Mat3 m = gimbal_rate_matrix(rpy);
    const Vec3 tau = gimbal_matrix(rpy).transpose() * k_tau.cwiseProduct(rpy.vector());
    for (int a = 0; a < 3; ++a) {
      const double var = m.col(a).cwiseProduct(tau).squaredNorm();
      d[a].w[i] = 1.0 / (var + 1e-12 * k_tau.squaredNorm());
    }
  }
}

}  // namespace detail

inline SysIdReport identify_stiffness(const std::vector<SysIdSample>& samples,
                                      const SysIdOptions& opt = {}) {
  SysIdReport report;
  const std::size_t n = samples.size();

  // One shared resampling plan so axes see the same bootstrap draws.
  std::vector<std::vector<std::size_t>> plans;
  if (n > 0) {
    std::mt19937_64 rng(opt.bootstrap_seed);
    plans.resize(static_cast<std::size_t>(std::max(0, opt.bootstrap_resamples)));
    for (auto& p : plans) {
      p.resize(n);
      for (auto& i : p) i = static_cast<std::size_t>(rng() % n);
    }
  }

  // Rotational weights come from the current estimate; a few passes settle.
  auto data = detail::sysid_axis_data(samples);
  // An unexcited axis has zero angle throughout and leaks nothing.
  auto positive = [](double k) { return std::isfinite(k) && k > 0.0 ? k : 0.0; };
  Vec3 k_tau;
  for (int a = 0; a < 3; ++a) k_tau[a] = positive(detail::fit_through_origin(data[a]));
  for (int pass = 0; n >= 2 && k_tau.maxCoeff() > 0.0 && pass < opt.reweighting_passes; ++pass) {
    detail::reweight_rotational(data, samples, k_tau);
    for (int a = 0; a < 3; ++a) k_tau[a] = positive(detail::fit_through_origin(data[a]));
  }

  for (int a = 0; a < 6; ++a) {
    AxisEstimate& est = report.axes[a];
    est.name = kSysIdAxisNames[a];
    const auto& q = data[a].q;
    const auto& g = data[a].g;
    if (n >= 2) {
      const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
      est.excitation_range = *hi - *lo;
    }
    const double min_range = a < 3 ? opt.min_angle_range : opt.min_translation_range;
    if (n < 2 || est.excitation_range < min_range) continue;

    est.identifiable = true;
    est.stiffness = detail::fit_through_origin(data[a]);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = g[i] - est.stiffness * q[i];
      ss += r * r;
    }
    est.residual_rms = std::sqrt(ss / static_cast<double>(n));

    if (plans.size() >= 2) {
      double sum = 0.0, sq = 0.0;
      int used = 0;
      for (const auto& p : plans) {
        const double k = detail::fit_through_origin(data[a], &p);
        if (!std::isfinite(k)) continue;
        sum += k;
        sq += k * k;
        ++used;
      }
      if (used >= 2) {
        const double mean = sum / used;
        est.bootstrap_std = std::sqrt(std::max(0.0, (sq - used * mean * mean) / (used - 1)));
      }
    }
  }
  return report;
}

struct ExcitationAmplitude {
  double angle = 15.0 * M_PI / 180.0;  // rad
  double translation = 0.01;           // m
};

/// Per-axis linspace ramps over [-amplitude, amplitude] (`count` points per
/// selected axis), followed by `count` mixed poses that excite every selected
/// axis at once on a deterministic low-discrepancy sequence.
inline std::vector<RigidTransform> generate_excitation(const std::vector<int>& axes,
                                                       const ExcitationAmplitude& amplitude,
                                                       int count) {
  if (amplitude.angle > M_PI / 3.0 + 1e-12) {
    throw OutOfRange("generate_excitation: angle amplitude exceeds pi/3");
  }
  for (int a : axes) {
    if (a < 0 || a > 5) throw ConfigError("generate_excitation: axis index out of range");
  }
  auto amp = [&](int a) { return a < 3 ? amplitude.angle : amplitude.translation; };
  auto make = [](const Vec6& v) {
    return RigidTransform(RollPitchYaw(Vec3(v.head<3>())), v.tail<3>(), Frame::kGripper,
                          Frame::kTool);
  };
  std::vector<RigidTransform> out;
  for (int a : axes) {
    for (int i = 0; i < count; ++i) {
      const double s = count == 1 ? 0.0 : -1.0 + 2.0 * i / (count - 1);
      Vec6 v = Vec6::Zero();
      v[a] = s * amp(a);
      out.push_back(make(v));
    }
  }
  if (axes.size() > 1) {
    // Additive recurrence with irrational steps per dimension.
    static constexpr std::array<double, 6> kSteps = {0.7548776662, 0.5698402910, 0.4301597090,
                                                     0.3247179572, 0.2451223338, 0.1839411937};
    for (int i = 0; i < count; ++i) {
      Vec6 v = Vec6::Zero();
      for (int a : axes) {
        const double u = std::fmod(0.5 + (i + 1) * kSteps[a], 1.0);
        v[a] = (2.0 * u - 1.0) * amp(a);
      }
      out.push_back(make(v));
    }
  }
  return out;
}

/// Forward-map samples with multiplicative Gaussian wrench noise of relative
/// standard deviation `noise`.
inline std::vector<SysIdSample> simulate_sysid_samples(const std::vector<RigidTransform>& poses,
                                                       const StiffnessParams& k, double noise,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SysIdSample> out;
  out.reserve(poses.size());
  for (const RigidTransform& X : poses) {
    SpatialForce F = stiffness_forward(X, k);
    if (noise > 0.0) {
      for (int i = 0; i < 3; ++i) {
        F.torque[i] *= 1.0 + noise * detail::standard_normal(rng);
        F.force[i] *= 1.0 + noise * detail::standard_normal(rng);
      }
    }
    out.push_back({X.with_frames(Frame::kGripper, Frame::kTool), F});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config-driven run

struct SysIdConfig {
  std::string name = "sysid";
  StiffnessParams truth;
  std::vector<int> axes = {0, 1, 2, 3, 4, 5};
  ExcitationAmplitude amplitude;
  int count = 40;
  double noise = 0.05;
  std::uint64_t seed = 1;
  SysIdOptions options;
};

inline SysIdConfig parse_sysid_config(const Json& j, const std::string& source = "config") {
  ConfigNode root(j, "", source);
  SysIdConfig c;
  c.name = root.string("name");
  c.truth = parse_stiffness(root.object("stiffness"));
  c.seed = root.unsigned_integer("seed", c.seed);
  c.noise = root.number("noise", c.noise);
  if (!(c.noise >= 0.0)) root.fail("noise", "must be non-negative");
  {
    ConfigNode e = root.object("excitation");
    if (e.has("axes")) c.axes = e.int_list("axes");
    c.amplitude.angle = degrees(e.number("angle_deg", 15.0));
    c.amplitude.translation = e.number("translation", c.amplitude.translation);
    c.count = static_cast<int>(e.unsigned_integer("count", 40));
    e.finish();
  }
  c.options.bootstrap_resamples = static_cast<int>(root.unsigned_integer("bootstrap", 200));
  c.options.bootstrap_seed = c.seed;
  c.options.min_angle_range = degrees(root.number("min_angle_range_deg", 1.0));
  c.options.min_translation_range =
      root.number("min_translation_range", c.options.min_translation_range);
  root.finish();
  return c;
}

inline SysIdReport run_sysid(const SysIdConfig& c) {
  const auto poses = generate_excitation(c.axes, c.amplitude, c.count);
  return identify_stiffness(simulate_sysid_samples(poses, c.truth, c.noise, c.seed), c.options);
}

}  // namespace seed6d
