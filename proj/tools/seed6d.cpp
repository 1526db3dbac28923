// seed6d: scenario runner and artifact entry point.
//
//   seed6d run <config>... [--out DIR] [--seed N] [--jobs N]
//   seed6d sysid <config> [--out DIR]
//   seed6d eval-estimator <config> [--out DIR] [--corpus DIR]
//   seed6d gen-corpus <config> [--out DIR] [--corpus DIR]
//
// Outputs land in <out>/<name>/; <out> defaults to $SEED6D_OUT, then "out".

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "seed6d/seed6d.hpp"

namespace fs = std::filesystem;
using namespace seed6d;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;

std::string default_out() {
  const char* env = std::getenv("SEED6D_OUT");
  return env && *env ? env : "out";
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

// Resolve a path from a config relative to the config's directory.
fs::path relative_to(const std::string& config, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : fs::path(config).parent_path() / q;
}

std::mutex g_log;

void log_line(std::ostream& os, const std::string& s) {
  std::lock_guard<std::mutex> lock(g_log);
  os << s << std::endl;
}

int report_error(const std::string& what, const std::exception& e) {
  log_line(std::cerr, "seed6d: " + what + ": " + e.what());
  return dynamic_cast<const ConfigError*>(&e) ? kExitConfig : kExitError;
}

// ---------------------------------------------------------------------------

int run_one(const std::string& path, const std::string& out_root, std::optional<std::uint64_t> seed) {
  try {
    ScenarioConfig cfg = load_scenario(path);
    if (seed) cfg.seed = *seed;
    const fs::path dir = prepare_dir(fs::path(out_root) / cfg.name);
    std::ofstream trace(dir / "trace.csv");
    if (!trace) throw IoError("cannot write '" + (dir / "trace.csv").string() + "'");
    const ScenarioResult r = run_scenario(cfg, &trace);
    write_json(dir / "summary.json", r.summary.to_json());
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-20s %-12s F_z %.4g / %.4g N (err %.2f%%)  |tau_x| %.3e N*m  -> %s",
                  cfg.name.c_str(), scenario_mode_name(cfg.mode).c_str(), r.summary.steady_fz,
                  r.summary.commanded_fz, 100.0 * r.summary.steady_fz_relative_error,
                  r.summary.steady_abs_tau_x, dir.string().c_str());
    log_line(std::cout, buf);
    return 0;
  } catch (const std::exception& e) {
    return report_error(path, e);
  }
}

int cmd_run(const std::vector<std::string>& configs, const std::string& out,
            std::optional<std::uint64_t> seed, int jobs) {
  std::vector<int> status(configs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) status[i] = run_one(configs[i], out, seed);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (int s : status) {
    if (s != 0) return s;
  }
  return 0;
}

int cmd_sysid(const std::string& path, const std::string& out) {
  try {
    const SysIdConfig cfg = parse_sysid_config(load_json_file(path), path);
    const SysIdReport r = run_sysid(cfg);
    const fs::path dir = prepare_dir(fs::path(out) / cfg.name);
    write_json(dir / "sysid_report.json", r.to_json());
    std::printf("%-6s %-6s %12s %12s %10s %12s\n", "axis", "ident", "estimate", "truth", "rel.err", "boot.std");
    for (int a = 0; a < 6; ++a) {
      const AxisEstimate& e = r.axes[a];
      const double truth = a < 3 ? cfg.truth.k_tau[a] : cfg.truth.k_f[a - 3];
      if (e.identifiable) {
        std::printf("%-6s %-6s %12.6g %12.6g %9.3f%% %12.4g\n", e.name.c_str(), "yes", e.stiffness, truth,
                    100.0 * (e.stiffness / truth - 1.0), e.bootstrap_std);
      } else {
        std::printf("%-6s %-6s %12s %12.6g %10s %12s\n", e.name.c_str(), "no", "-", truth, "-", "-");
      }
    }
    std::printf("report: %s\n", (dir / "sysid_report.json").string().c_str());
    return 0;
  } catch (const std::exception& e) {
    return report_error(path, e);
  }
}

fs::path corpus_location(const CorpusConfig& cfg, const std::string& config_path, const std::string& flag,
                         const std::string& out) {
  if (!flag.empty()) return flag;
  if (!cfg.corpus_dir.empty()) return relative_to(config_path, cfg.corpus_dir);
  return fs::path(out) / cfg.name / "corpus";
}

int cmd_gen_corpus(const std::string& path, const std::string& out, const std::string& corpus_flag) {
  try {
    const CorpusConfig cfg = parse_corpus_config(load_json_file(path), path);
    const fs::path dir = corpus_location(cfg, path, corpus_flag, out);
    const Corpus corpus = generate_corpus(cfg);
    save_corpus(corpus, prepare_dir(dir));
    std::printf("wrote %zu frames (k_curl %.6g) to %s\n", corpus.frames.size(), corpus.k_curl,
                dir.string().c_str());
    return 0;
  } catch (const std::exception& e) {
    return report_error(path, e);
  }
}

int cmd_eval(const std::string& path, const std::string& out, const std::string& corpus_flag) {
  try {
    const CorpusConfig cfg = parse_corpus_config(load_json_file(path), path);
    const bool from_disk = !corpus_flag.empty() || !cfg.corpus_dir.empty();
    const Corpus corpus = from_disk ? load_corpus(corpus_location(cfg, path, corpus_flag, out))
                                    : generate_corpus(cfg);
    const EstimatorReport r = evaluate_corpus(corpus, cfg.sweeps, cfg.estimator);
    const fs::path dir = prepare_dir(fs::path(out) / cfg.name);
    write_json(dir / "estimator_report.json", r.to_json());

    std::printf("%-6s %6s %4s | %9s %9s %9s | %8s %8s %8s | %12s\n", "sweep", "frames", "fail", "roll[deg]",
                "pitch", "yaw", "x[mm]", "y", "z", "signed bias");
    constexpr double kDeg = 180.0 / M_PI;
    for (std::size_t s = 0; s < r.sweeps.size(); ++s) {
      const SweepReport& w = r.sweeps[s];
      const bool angular = cfg.sweeps[s].axis < 3;
      std::printf("%-6s %6d %4d | %9.3f %9.3f %9.3f | %8.3f %8.3f %8.3f | %9.3f %s\n", w.axis.c_str(), w.frames,
                  w.failures, w.rms[0] * kDeg, w.rms[1] * kDeg, w.rms[2] * kDeg, w.rms[3] * 1e3, w.rms[4] * 1e3,
                  w.rms[5] * 1e3, w.signed_bias * (angular ? kDeg : 1e3), angular ? "deg" : "mm");
    }
    std::printf("(per-axis RMS error over each sweep; k_curl %.6g)\nreport: %s\n", r.k_curl,
                (dir / "estimator_report.json").string().c_str());
    return r.failures == 0 ? 0 : kExitError;
  } catch (const std::exception& e) {
    return report_error(path, e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SEED: series elastic end effector simulation, identification and estimation"};
  app.require_subcommand(1);
  std::string out = default_out();
  app.add_option("--out", out, "output root (default $SEED6D_OUT or ./out)");

  std::vector<std::string> run_configs;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "run scenario configs, writing trace.csv and summary.json");
  run->add_option("configs", run_configs, "scenario config files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output root");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--jobs", jobs, "scenarios run in parallel")->check(CLI::PositiveNumber);

  std::string config, corpus_dir;
  CLI::App* sysid = app.add_subcommand("sysid", "identify stiffness from simulated excitation");
  sysid->add_option("config", config, "sysid config")->required()->check(CLI::ExistingFile);
  sysid->add_option("--out", out, "output root");

  CLI::App* eval = app.add_subcommand("eval-estimator", "evaluate the pose estimator on a synthetic corpus");
  eval->add_option("config", config, "estimator config")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "output root");
  eval->add_option("--corpus", corpus_dir, "load the corpus from this directory instead of rendering");

  CLI::App* gen = app.add_subcommand("gen-corpus", "render the synthetic estimator corpus to disk");
  gen->add_option("config", config, "estimator config")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "output root");
  gen->add_option("--corpus", corpus_dir, "target directory (default <out>/<name>/corpus)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(run_configs, out, seed, jobs);
  if (*sysid) return cmd_sysid(config, out);
  if (*eval) return cmd_eval(config, out, corpus_dir);
  return cmd_gen_corpus(config, out, corpus_dir);
}
