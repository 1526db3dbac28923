// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seed6d/seed6d.hpp"
#include "test_support.hpp"

using namespace seed6d;

namespace {

const std::string kConfigs = SEED6D_CONFIG_DIR;
const std::string kData = SEED6D_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

StiffnessParams log_uniform_stiffness(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(std::log(0.1), std::log(100.0));
  StiffnessParams k;
  for (int i = 0; i < 3; ++i) {
    k.k_tau[i] = std::exp(u(rng));
    k.k_f[i] = std::exp(u(rng));
  }
  return k;
}

// ---------------------------------------------------------------------------

Outcome diffeomorphism() {
  Outcome o;
  Stopwatch clock;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(-M_PI / 3.0, M_PI / 3.0), pos(-0.05, 0.05);
  double round_trip = 0.0, det_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const StiffnessParams k = log_uniform_stiffness(rng);
    const RollPitchYaw rpy(angle(rng), angle(rng), angle(rng));
    const Vec3 x(pos(rng), pos(rng), pos(rng));
    const RelativePose back = stiffness_inverse(stiffness_forward(rpy, x, k), k);
    round_trip = std::max(round_trip, (back.rpy.vector() - rpy.vector()).norm());
    round_trip = std::max(round_trip, (back.translation - x).norm());

    Mat3 J;
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = h;
      const Vec3 tp = stiffness_forward(RollPitchYaw(Vec3(rpy.vector() + e)), Vec3::Zero(), k).torque;
      const Vec3 tm = stiffness_forward(RollPitchYaw(Vec3(rpy.vector() - e)), Vec3::Zero(), k).torque;
      J.col(j) = (tp - tm) / (2.0 * h);
    }
    const double closed = stiffness_jacobian_det(rpy, k);
    det_err = std::max(det_err, std::abs(J.determinant() - closed) / std::abs(closed));
  }
  const double t = clock.seconds();
  o.require(round_trip < 1e-9, fmt("round trip %.2e < 1e-9", round_trip));
  o.require(det_err < 1e-4, fmt("det rel err %.2e < 1e-4", det_err));
  o.require(t < 5.0, fmt("%.2f s < 5 s", t));
  return o;
}

Outcome power_balance() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> angle(-M_PI / 3.0, M_PI / 3.0), rate(-2.0, 2.0);
  double worst = 0.0, worst_fd = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const StiffnessParams k = log_uniform_stiffness(rng);
    const RollPitchYaw rpy(angle(rng), angle(rng), angle(rng));
    const Vec3 rates(rate(rng), rate(rng), rate(rng));
    const Vec3 gimbal_torque = k.k_tau.cwiseProduct(rpy.vector());
    const Vec3 tau = stiffness_forward(rpy, Vec3::Zero(), k).torque;
    const Vec3 omega = gimbal_rates_to_angular_velocity(rpy, rates);
    const double scale = gimbal_torque.norm() * rates.norm();
    worst = std::max(worst, std::abs(tau.dot(omega) - gimbal_torque.dot(rates)) / scale);
    // The kinematic map itself, against differentiated rotations.
    const Vec3 omega_fd = testing_support::fd_angular_velocity(rpy, rates, 1e-5);
    worst_fd = std::max(worst_fd, (omega_fd - omega).norm() / rates.norm());
  }
  o.require(worst < 1e-8, fmt("power rel err %.2e < 1e-8", worst));
  o.require(worst_fd < 1e-6, fmt("omega vs finite difference %.2e", worst_fd));
  return o;
}

Outcome sea_reference() {
  Outcome o;
  testing_support::SeaWallSim sim;
  sim.state.position = 0.01;
  const double f_d = 2.0;
  const int steps = static_cast<int>(std::lround(2.0 / sim.dt));
  double settle = -1.0;
  for (int i = 1; i <= steps; ++i) {
    sim.step(f_d);
    const bool inside = std::abs(sim.spring_force() - f_d) <= 0.01 * f_d;
    if (inside && settle < 0.0) settle = i * sim.dt;
    if (!inside) settle = -1.0;
  }
  const double err = std::abs(sim.spring_force() - f_d) / f_d;
  o.require(err < 0.01, fmt("steady error %.3f%% < 1%%", 100.0 * err));
  o.require(settle >= 0.0, fmt("inside band from t = %.3f s (< 2 s)", settle));
  return o;
}

ScenarioConfig pen(double f_d, double scale, double mismatch) {
  ScenarioConfig c = load_scenario(kConfigs + "/pen.json");
  c.task.force_target.z() = -f_d;
  c.controller.stiffness_estimate = c.plant.stiffness.scaled(scale);
  c.plant.stiffness = c.plant.stiffness.scaled(scale * mismatch);
  return c;
}

/// Count of steps after first contact where |F_z - f_d| grows by more than
/// rounding.
int monotonicity_violations(const ScenarioResult& r, double f_d) {
  int violations = 0;
  bool contact = false;
  double prev = 0.0;
  for (const TraceRecord& rec : r.records) {
    const double e = std::abs(rec.f_z - f_d);
    if (contact && e > prev + 1e-9 * (1.0 + f_d)) ++violations;
    contact = contact || rec.f_z > 0.0;
    prev = e;
  }
  return violations;
}

Outcome pen_force_control() {
  Outcome o;
  double exact = 0.0, mismatched = 0.0;
  int violations = 0;
  for (double scale : {0.5, 1.0, 3.0}) {
    for (double f_d : {2.0, 5.0, 10.0}) {
      exact = std::max(exact, run_scenario(pen(f_d, scale, 1.0)).summary.steady_fz_relative_error);
      for (double m : {0.8, 1.2}) {
        mismatched = std::max(mismatched, run_scenario(pen(f_d, scale, m)).summary.steady_fz_relative_error);
      }
      ScenarioConfig still = pen(f_d, scale, 1.0);
      still.plant.repeatability_sigma = 0.0;
      violations += monotonicity_violations(run_scenario(still), f_d);
    }
  }
  o.require(exact < 0.05, fmt("exact estimate worst %.3f%% < 5%%", 100.0 * exact));
  o.require(mismatched < 0.25, fmt("+-20%% mismatch worst %.2f%% < 25%%", 100.0 * mismatched));
  o.require(violations == 0, fmt("error increases after contact: %.0f", violations));
  return o;
}

Outcome squeegee() {
  Outcome o;
  ScenarioSummary s[3];
  const char* names[3] = {"welded", "open", "closed"};
  for (int i = 0; i < 3; ++i) {
    Stopwatch clock;
    const ScenarioConfig c = load_scenario(kConfigs + "/squeegee_" + names[i] + ".json");
    if (std::abs(c.plant.environment.plane_tilt - 5.0 * M_PI / 180.0) > 1e-12) {
      o.require(false, std::string(names[i]) + " tilt is not 5 deg");
    }
    s[i] = run_scenario(c).summary;
    const double t = clock.seconds();
    o.require(t < 30.0, fmt("%.2f s", t));
  }
  o.require(s[0].steady_abs_tau_x > s[1].steady_abs_tau_x && s[1].steady_abs_tau_x > s[2].steady_abs_tau_x,
            fmt("|tau_x| welded %.3g > open %.3g > closed %.3g", s[0].steady_abs_tau_x, s[1].steady_abs_tau_x,
                s[2].steady_abs_tau_x));
  o.require(s[2].steady_fz_relative_error < 0.05,
            fmt("closed F_z err %.2f%% < 5%%", 100.0 * s[2].steady_fz_relative_error));
  o.require(s[1].steady_fz_relative_error >= 0.05 && s[0].steady_fz_relative_error >= 0.05,
            fmt("open %.1f%%, welded %.1f%% miss F_z", 100.0 * s[1].steady_fz_relative_error,
                100.0 * s[0].steady_fz_relative_error));
  return o;
}

double worst_relative_error(const SysIdReport& r, const StiffnessParams& truth) {
  double worst = 0.0;
  for (int a = 0; a < 6; ++a) {
    const double k = a < 3 ? truth.k_tau[a] : truth.k_f[a - 3];
    worst = std::max(worst, r.axes[a].identifiable ? std::abs(r.axes[a].stiffness / k - 1.0) : INFINITY);
  }
  return worst;
}

Outcome sysid() {
  Outcome o;
  const SysIdConfig base = parse_sysid_config(load_json_file(kConfigs + "/sysid.json"));
  std::mt19937_64 rng(31);
  double noiseless = 0.0, noisy = 0.0;
  bool std_reported = true;
  for (int trial = 0; trial < 5; ++trial) {
    SysIdConfig c = base;
    if (trial > 0) c.truth = log_uniform_stiffness(rng);
    c.seed = base.seed + trial;
    c.options.bootstrap_seed = c.seed;
    SysIdConfig clean = c;
    clean.noise = 0.0;
    noiseless = std::max(noiseless, worst_relative_error(run_sysid(clean), c.truth));
    const SysIdReport r = run_sysid(c);
    noisy = std::max(noisy, worst_relative_error(r, c.truth));
    for (const AxisEstimate& a : r.axes) std_reported = std_reported && std::isfinite(a.bootstrap_std) && a.bootstrap_std > 0.0;
  }
  SysIdConfig partial = base;
  partial.axes = {0, 3, 4};
  const SysIdReport p = run_sysid(partial);
  const bool flags = p.axes[0].identifiable && p.axes[3].identifiable && p.axes[4].identifiable &&
                     !p.axes[1].identifiable && !p.axes[2].identifiable && !p.axes[5].identifiable;
  o.require(noiseless < 1e-3, fmt("noiseless worst %.2e < 0.1%%", noiseless));
  o.require(noisy < 0.02, fmt("5%% noise worst %.2f%% < 2%%", 100.0 * noisy));
  o.require(std_reported, "bootstrap std reported");
  o.require(flags, "rank-deficient excitation flags pitch, yaw, z");
  return o;
}

Outcome estimator() {
  Outcome o;
  Stopwatch clock;
  const CorpusConfig cfg = parse_corpus_config(load_json_file(kConfigs + "/estimator_eval.json"));
  const Corpus corpus = generate_corpus(cfg);
  const EstimatorReport r = evaluate_corpus(corpus, cfg.sweeps, cfg.estimator);
  const double t = clock.seconds();
  constexpr double kDeg = 180.0 / M_PI;
  const SweepReport* roll = r.sweep("roll");
  const SweepReport* pitch = r.sweep("pitch");
  const SweepReport* yaw = r.sweep("yaw");
  const SweepReport* y = r.sweep("y");
  if (!roll || !pitch || !yaw || !y) {
    o.require(false, "corpus lacks a roll, pitch, yaw or y sweep");
    return o;
  }
  o.require(r.frames == 200 && r.failures == 0, fmt("%.0f frames, %.0f failures", r.frames, r.failures));
  o.require(y->rms[4] < 1e-3 && r.overall_rms[4] < 1e-3,
            fmt("y RMS %.3f mm (sweep), %.3f mm (all)", y->rms[4] * 1e3, r.overall_rms[4] * 1e3));
  o.require(roll->rms[0] * kDeg < 1.0 && r.overall_rms[0] * kDeg < 1.0,
            fmt("roll RMS %.3f deg (sweep), %.3f deg (all)", roll->rms[0] * kDeg, r.overall_rms[0] * kDeg));
  o.require(pitch->rms[1] * kDeg < 2.0 && r.overall_rms[1] * kDeg < 2.0,
            fmt("pitch RMS %.3f deg (sweep), %.3f deg (all)", pitch->rms[1] * kDeg, r.overall_rms[1] * kDeg));
  o.require(yaw->signed_bias < 0.0, fmt("yaw bias %.3f deg < 0", yaw->signed_bias * kDeg));
  const SweepReport* x = r.sweep("x");
  const SweepReport* z = r.sweep("z");
  if (x && z) {
    o.detail += fmt("; x RMS %.2f mm, z RMS %.2f mm (not gated)", x->rms[3] * 1e3, z->rms[5] * 1e3);
  }
  o.require(t < 60.0, fmt("%.1f s < 60 s", t));
  return o;
}

std::string trace_of(const ScenarioConfig& c) {
  std::ostringstream out;
  run_scenario(c, &out);
  return out.str();
}

Outcome determinism() {
  Outcome o;
  for (const char* name : {"pen", "squeegee_closed", "squeegee_open", "squeegee_welded"}) {
    const ScenarioConfig c = load_scenario(kConfigs + "/" + name + ".json");
    const std::string a = trace_of(c), b = trace_of(c);
    o.require(a == b && !a.empty(), std::string(name) + (a == b ? " identical" : " differs"));
  }
  return o;
}

Outcome golden() {
  Outcome o;
  const std::string dir = kData + "/golden_squeegee/";
  const double dev = testing_support::max_trace_deviation(trace_of(load_scenario(dir + "config.json")),
                                                          testing_support::read_text(dir + "trace.csv"));
  o.require(dev < 1e-9, fmt("max field deviation %.2e < 1e-9", dev));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"diffeomorphism", diffeomorphism},
      {"power balance", power_balance},
      {"1D SEA reference", sea_reference},
      {"pen force control", pen_force_control},
      {"squeegee comparison", squeegee},
      {"system identification", sysid},
      {"estimator corpus", estimator},
      {"determinism", determinism},
      {"golden trace", golden},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
