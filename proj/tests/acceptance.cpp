// Release gate: every acceptance criterion in one binary, one [PASS]/[FAIL]
// line per criterion. The thresholds are pinned here on purpose -- they are
// the contract, not tunables. Criteria 7 and 8 exercise the installed CLI;
// pass its path as argv[1].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "handkin/alignment.hpp"
#include "handkin/config.hpp"
#include "handkin/harness.hpp"
#include "handkin/landmark_filter.hpp"
#include "handkin/linalg.hpp"
#include "handkin/metrics.hpp"
#include "handkin/random.hpp"
#include "handkin/se3.hpp"
#include "handkin/simulator.hpp"

namespace fs = std::filesystem;
using namespace handkin;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Gate {
  int failed = 0;

  void line(int idx, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Criterion 1: landmark-filter properties.
//   covariance symmetry/PSD after every step; zero-innovation fixed point;
//   monotone gating; predict-only covariance growth; loss trigger at
//   trace >= 0.3 exactly. Budget: < 10 s.
// ---------------------------------------------------------------------------
bool filter_properties(std::string& detail) {
  const PipelineConfig cfg;
  const double dt = 1.0 / 30.0;
  Rng rng(2024);

  // Symmetry/PSD through a long noisy run.
  LandmarkObservation seed_obs{0.0, 9, Vec3(0.1, 0.2, 0.3), 1.0};
  auto s = spawn_filter(seed_obs, cfg);
  for (int k = 1; k <= 300; ++k) {
    s = predict(s, dt, cfg);
    if (!is_symmetric(s.P, 1e-12) || !is_psd(s.P, 1e-9)) {
      detail = fmt("covariance lost symmetry/PSD at predict step %d", k);
      return false;
    }
    LandmarkObservation obs{k * dt, 9, s.position() + rng.gaussian3(0.01), 1.0};
    s = correct(s, obs, cfg).state;
    if (!is_symmetric(s.P, 1e-12) || !is_psd(s.P, 1e-9)) {
      detail = fmt("covariance lost symmetry/PSD at correct step %d", k);
      return false;
    }
  }

  // Zero innovation: the mean is a fixed point and uncertainty shrinks.
  auto p = predict(s, dt, cfg);
  LandmarkObservation at_mean{p.x(0), 9, p.position(), 1.0};
  at_mean.t = 301 * dt;
  const auto fixed = correct(p, at_mean, cfg);
  if (fixed.outcome != CorrectionOutcome::Corrected ||
      (fixed.state.x - p.x).cwiseAbs().maxCoeff() > 0.0 ||
      fixed.state.P.trace() >= p.P.trace()) {
    detail = "zero-innovation update moved the mean or grew the covariance";
    return false;
  }

  // Gating is monotone along a ray out of the prediction: admission flips
  // exactly once, and the Mahalanobis distance never decreases.
  int flips = 0;
  bool prev_admitted = true;
  double prev_d = -1.0;
  for (int i = 0; i <= 60; ++i) {
    LandmarkObservation obs{302 * dt, 9, p.position() + (0.005 * i) * Vec3::UnitX(), 1.0};
    const auto r = correct(p, obs, cfg);
    if (r.mahalanobis < prev_d) {
      detail = "Mahalanobis distance not monotone along a ray";
      return false;
    }
    prev_d = r.mahalanobis;
    const bool admitted = r.outcome == CorrectionOutcome::Corrected;
    if (admitted && !prev_admitted) {
      detail = "gate re-admitted a farther measurement";
      return false;
    }
    if (!admitted && prev_admitted) ++flips;
    prev_admitted = admitted;
  }
  if (flips != 1) {
    detail = fmt("gate flipped %d times along a ray (want 1)", flips);
    return false;
  }

  // Predict-only covariance growth is strictly monotone.
  auto g = spawn_filter(seed_obs, cfg);
  double prev_trace = g.P.trace();
  for (int k = 0; k < 50; ++k) {
    g = predict(g, dt, cfg);
    if (g.P.trace() <= prev_trace) {
      detail = "predict-only covariance trace failed to grow";
      return false;
    }
    prev_trace = g.P.trace();
  }

  // Loss bound: Active strictly below trace 0.3, Lost at exactly 0.3.
  auto near = spawn_filter(seed_obs, cfg);
  near.P.topLeftCorner<3, 3>() = (cfg.landmark_unc_thresh / 3.0 - 1e-12) * Mat3::Identity();
  auto at = near;
  at.P.topLeftCorner<3, 3>() = (cfg.landmark_unc_thresh / 3.0) * Mat3::Identity();
  if (check_lost(near, cfg).status != LandmarkStatus::Active ||
      check_lost(at, cfg).status != LandmarkStatus::Lost) {
    detail = "loss trigger does not sit exactly at trace >= 0.3";
    return false;
  }

  detail = "symmetry/PSD, fixed point, monotone gate, growth, loss bound";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 2: geometry oracles. exp/log round-trips (1e-9), rigid alignment
// recovery on noiseless data (1e-8), tangent vs finite difference (1e-5).
// Budget: < 10 s.
// ---------------------------------------------------------------------------
bool geometry_oracles(std::string& detail) {
  Rng rng(77);

  double worst_exp = 0.0, worst_rt = 0.0;
  for (int i = 0; i < 300; ++i) {
    Vec6 xi;
    xi.head<3>() = rng.gaussian3(0.5);
    xi.tail<3>() = rng.uniform(0.0, 3.0) * rng.unit_vector();
    if (xi.tail<3>().norm() >= std::numbers::pi - 1e-3) continue;
    const Pose6 pose = Pose6::from_vec(xi);

    Eigen::Matrix4d hat = Eigen::Matrix4d::Zero();
    const Vec3 w = pose.angular, v = pose.linear;
    hat(0, 1) = -w.z(); hat(0, 2) = w.y(); hat(1, 2) = -w.x();
    hat(1, 0) = w.z(); hat(2, 0) = -w.y(); hat(2, 1) = w.x();
    hat.block<3, 1>(0, 3) = v;
    const Eigen::Matrix4d ref = hat.exp();
    worst_exp = std::max(worst_exp,
                         (exp_map(pose).matrix() - ref).cwiseAbs().maxCoeff());
    worst_rt = std::max(worst_rt,
                        (log_map(exp_map(pose)).vec() - pose.vec()).cwiseAbs().maxCoeff());
  }
  if (worst_exp > 1e-9 || worst_rt > 1e-9) {
    detail = fmt("exp/log error %.2e / round-trip %.2e exceed 1e-9", worst_exp, worst_rt);
    return false;
  }

  double worst_align = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> src, dst;
    std::vector<double> w;
    Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
    T.linear() = Eigen::AngleAxisd(rng.uniform(0.1, 2.5), rng.unit_vector()).toRotationMatrix();
    T.translation() = 0.5 * rng.unit_vector();
    const int n = 4 + static_cast<int>(rng.uniform(0.0, 8.0));
    for (int i = 0; i < n; ++i) {
      src.push_back(rng.gaussian3(0.3));
      dst.push_back(T * src.back());
      w.push_back(1.0);
    }
    const auto fit = rigid_align(src, dst, w);
    if (!fit) {
      detail = "rigid alignment rejected a well-conditioned cloud";
      return false;
    }
    worst_align = std::max(worst_align, (fit->matrix() - T.matrix()).cwiseAbs().maxCoeff());
  }
  if (worst_align > 1e-8) {
    detail = fmt("rigid alignment recovery error %.2e exceeds 1e-8", worst_align);
    return false;
  }

  GroundTruthJoint rj;
  rj.type = JointType::Revolute;
  rj.axis_direction = Vec3(0.2, 0.5, 1.0).normalized();
  rj.axis_point = Vec3(-0.1, 0.0, 0.2);
  rj.q_max = std::numbers::pi / 2;
  GroundTruthJoint pj;
  pj.type = JointType::Prismatic;
  pj.axis_direction = Vec3(0.5, -1.0, 0.25).normalized();
  pj.q_max = 0.4;
  const Vec3 grasp(0.3, -0.2, 0.15);
  const double h = 1e-6;
  double worst_fd = 0.0;
  for (double q : {0.05, 0.3, 0.8, 1.2}) {
    for (const auto& j : {rj, pj}) {
      const Vec3 fd =
          ((articulated_point(j, q + h, grasp) - articulated_point(j, q - h, grasp)) /
           (2.0 * h))
              .normalized();
      worst_fd = std::max(worst_fd,
                          (tangent_at(j, q, grasp) - fd).cwiseAbs().maxCoeff());
    }
  }
  if (worst_fd > 1e-5) {
    detail = fmt("tangent vs finite-difference error %.2e exceeds 1e-5", worst_fd);
    return false;
  }

  detail = fmt("exp %.1e, round-trip %.1e, align %.1e, tangent-fd %.1e",
               worst_exp, worst_rt, worst_align, worst_fd);
  return true;
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-handkin-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  Gate gate;

  // --- Criterion 1 -----------------------------------------------------
  try {
    const auto t0 = Clock::now();
    std::string detail;
    const bool ok = filter_properties(detail);
    const double elapsed = seconds_since(t0);
    gate.line(1, ok && elapsed < 10.0,
              fmt("filter properties (%s) in %.2f s (budget 10 s)", detail.c_str(),
                  elapsed));
  } catch (const std::exception& e) {
    gate.line(1, false, fmt("filter properties threw: %s", e.what()));
  }

  // --- Criterion 2 -----------------------------------------------------
  try {
    const auto t0 = Clock::now();
    std::string detail;
    const bool ok = geometry_oracles(detail);
    const double elapsed = seconds_since(t0);
    gate.line(2, ok && elapsed < 10.0,
              fmt("geometry oracles (%s) in %.2f s (budget 10 s)", detail.c_str(),
                  elapsed));
  } catch (const std::exception& e) {
    gate.line(2, false, fmt("geometry oracles threw: %s", e.what()));
  }

  // --- Criteria 3-5 share the seeded noisy suite -----------------------
  const PipelineConfig cfg;
  std::vector<std::pair<std::string, SimulationResult>> sims;
  std::vector<double> full_errors;

  try {
    const auto t0 = Clock::now();
    for (const auto& [name, sc] : benchmark_suite("default")) {
      sims.emplace_back(name, generate(sc));
      const auto& sim = sims.back().second;
      PipelineOptions opt;
      opt.seed = sc.seed;
      const auto run = run_full_pipeline(sim, cfg, opt);
      if (!run.model) throw std::runtime_error(name + ": body tracking never initialized");
      full_errors.push_back(tangent_error_deg(*run.model, sim.joint));
    }
    const double elapsed = seconds_since(t0);
    const double mean = mean_of(full_errors);
    const double worst = *std::max_element(full_errors.begin(), full_errors.end());
    gate.line(3, mean <= 5.0 && worst <= 10.0 && elapsed < 60.0,
              fmt("10-scenario tangent error mean %.2f deg (<= 5), max %.2f deg (<= 10), "
                  "%.1f s (budget 60 s)",
                  mean, worst, elapsed));
  } catch (const std::exception& e) {
    gate.line(3, false, fmt("noisy suite threw: %s", e.what()));
  }

  // --- Criterion 4: ablation ordering ----------------------------------
  try {
    std::vector<double> ablated_errors;
    for (const auto& [name, sim] : sims) {
      PipelineOptions opt;
      opt.saliency_scaling = false;
      opt.landmark_gating = false;
      opt.body_gating = false;
      const auto run = run_full_pipeline(sim, cfg, opt);
      if (!run.model) throw std::runtime_error(name + ": ablated run never initialized");
      ablated_errors.push_back(tangent_error_deg(*run.model, sim.joint));
    }
    const double full_mean = mean_of(full_errors);
    const double ablated_mean = mean_of(ablated_errors);
    const double rel = (ablated_mean - full_mean) / full_mean;
    gate.line(4, ablated_mean > full_mean && rel >= 0.20,
              fmt("ablated mean %.2f deg vs full %.2f deg: +%.0f%% (need strictly worse "
                  "and >= 20%%)",
                  ablated_mean, full_mean, 100.0 * rel));
  } catch (const std::exception& e) {
    gate.line(4, false, fmt("ablation runs threw: %s", e.what()));
  }

  // --- Criterion 5: baseline ordering ----------------------------------
  try {
    std::vector<double> single_errors, rigid_errors;
    int single_failures = 0, rigid_failures = 0;
    for (const auto& [name, sim] : sims) {
      try {
        single_errors.push_back(
            tangent_error_deg(run_single_point_baseline(sim, cfg), sim.joint));
      } catch (const std::exception&) {
        ++single_failures;
      }
      try {
        rigid_errors.push_back(tangent_error_deg(run_rigid_hand_baseline(sim), sim.joint));
      } catch (const std::exception&) {
        ++rigid_failures;
      }
    }
    // A baseline that produces nothing at all cannot beat the pipeline.
    const double inf = std::numeric_limits<double>::infinity();
    const double single_mean = single_errors.empty() ? inf : mean_of(single_errors);
    const double rigid_mean = rigid_errors.empty() ? inf : mean_of(rigid_errors);
    const double full_mean = mean_of(full_errors);
    gate.line(5, full_mean < single_mean && full_mean < rigid_mean,
              fmt("full %.2f deg < single-point %.2f deg (%d failed) and < rigid-hand "
                  "%.2f deg (%d failed)",
                  full_mean, single_mean, single_failures, rigid_mean, rigid_failures));
  } catch (const std::exception& e) {
    gate.line(5, false, fmt("baseline runs threw: %s", e.what()));
  }

  // --- Criterion 6: outlier robustness ----------------------------------
  try {
    Scenario clean = default_scenario(JointType::Prismatic, 42);
    Scenario movers = clean;
    movers.independent_movers = {7, 14};

    PipelineOptions opt;
    opt.seed = clean.seed;
    const auto clean_sim = generate(clean);
    const auto mover_sim = generate(movers);
    const auto clean_run = run_full_pipeline(clean_sim, cfg, opt);
    const auto mover_run = run_full_pipeline(mover_sim, cfg, opt);
    if (!clean_run.model || !mover_run.model) {
      throw std::runtime_error("a run never initialized body tracking");
    }
    const double clean_err = tangent_error_deg(*clean_run.model, clean_sim.joint);
    const double mover_err = tangent_error_deg(*mover_run.model, mover_sim.joint);

    const std::vector<int> want = {7, 14};
    const bool flags_exact = mover_run.summary.flagged_outliers == want;
    const bool clean_flags_empty = clean_run.summary.flagged_outliers.empty();
    const double delta = mover_err - clean_err;

    std::ostringstream flag_str;
    for (int id : mover_run.summary.flagged_outliers) flag_str << id << " ";
    gate.line(6, flags_exact && clean_flags_empty && delta <= 2.0,
              fmt("flags [ %s] (want [ 7 14 ], clean twin %zu flags), extra error "
                  "%+.3f deg (<= 2)",
                  flag_str.str().c_str(), clean_run.summary.flagged_outliers.size(),
                  delta));
  } catch (const std::exception& e) {
    gate.line(6, false, fmt("outlier scenario threw: %s", e.what()));
  }

  // --- Criterion 7: throughput through the CLI --------------------------
  const fs::path work = fs::temp_directory_path() / "handkin_acceptance";
  try {
    fs::create_directories(work);
    const fs::path obs = work / "obs.jsonl";
    const fs::path gt = work / "gt.json";
    const fs::path est = work / "estimate.json";
    const fs::path cfg_path = work / "config.toml";
    save_config(PipelineConfig{}, cfg_path.string());

    if (run_cli(cli, "simulate --joint prismatic --duration 30 --rate 30 --seed 7 "
                     "--output " + obs.string() + " --gt-output " + gt.string()) != 0) {
      throw std::runtime_error("simulate command failed");
    }
    const auto t0 = Clock::now();
    const int rc = run_cli(cli, "estimate --input " + obs.string() + " --config " +
                                    cfg_path.string() + " --output " + est.string());
    const double elapsed = seconds_since(t0);
    gate.line(7, rc == 0 && elapsed < 1.0,
              fmt("30 s / 30 Hz / 20-landmark estimate in %.3f s wall (budget 1 s)",
                  elapsed));
  } catch (const std::exception& e) {
    gate.line(7, false, fmt("throughput check threw: %s", e.what()));
  }

  // --- Criterion 8: benchmark determinism -------------------------------
  try {
    const fs::path a = work / "bench_a.csv";
    const fs::path b = work / "bench_b.csv";
    if (run_cli(cli, "bench --suite mini --output-csv " + a.string()) != 0 ||
        run_cli(cli, "bench --suite mini --output-csv " + b.string()) != 0) {
      throw std::runtime_error("bench command failed");
    }
    const std::string ca = slurp(a), cb = slurp(b);
    gate.line(8, !ca.empty() && ca == cb,
              fmt("two bench runs produced byte-identical CSV (%zu bytes)", ca.size()));
  } catch (const std::exception& e) {
    gate.line(8, false, fmt("determinism check threw: %s", e.what()));
  }

  std::error_code ec;
  fs::remove_all(work, ec);

  std::printf("acceptance: %d/8 criteria passed\n", 8 - gate.failed);
  return gate.failed == 0 ? 0 : 1;
}
