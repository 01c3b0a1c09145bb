#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "handkin/harness.hpp"
#include "handkin/io.hpp"

namespace handkin::cli {

namespace {

const char* kMethods[] = {"full", "no_uncertainty", "single_point", "rigid_hand"};

void score(io::BenchRow& row, const JointModel& model, const GroundTruthJoint& gt) {
  row.joint_type = joint_type_name(model.type);
  row.tangent_error_deg = tangent_error_deg(model, gt);
}

void run_method(io::BenchRow& row, const Scenario& sc, const PipelineConfig& cfg,
                int method) {
  const SimulationResult sim = generate(sc);
  switch (method) {
    case 0:
    case 1: {
      const bool uncertainty = method == 0;
      PipelineOptions opt;
      opt.seed = sc.seed;
      opt.saliency_scaling = uncertainty;
      opt.landmark_gating = uncertainty;
      opt.body_gating = uncertainty;
      const ScenarioRun run = run_full_pipeline(sim, cfg, opt);
      if (!run.model) throw std::runtime_error("body tracking never initialized");
      score(row, *run.model, sim.joint);
      break;
    }
    case 2:
      score(row, run_single_point_baseline(sim, cfg), sim.joint);
      break;
    case 3:
      score(row, run_rigid_hand_baseline(sim), sim.joint);
      break;
  }
}

}  // namespace

int cmd_bench(const BenchArgs& args) {
  PipelineConfig cfg;
  try {
    if (!args.config.empty()) cfg = load_config(args.config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  std::vector<std::pair<std::string, Scenario>> suite;
  try {
    suite = benchmark_suite(args.suite);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  const int n_methods = 4;
  std::vector<io::BenchRow> rows(suite.size() * n_methods);

  // Scenario x method grid; every task is isolated and seed-deterministic,
  // so the row order (and therefore the CSV) is independent of scheduling.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      const auto& [name, sc] = suite[i / n_methods];
      const int method = static_cast<int>(i % n_methods);
      io::BenchRow& row = rows[i];
      row.scenario = name;
      row.method = kMethods[method];
      try {
        run_method(row, sc, cfg, method);
      } catch (const std::exception& e) {
        row.status = e.what();  // recorded per row; the run continues
      }
    }
  };

  unsigned jobs = args.jobs > 0 ? static_cast<unsigned>(args.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, rows.size());
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ofstream out(args.output_csv);
  if (!out) {
    std::cerr << "error: cannot write " << args.output_csv << "\n";
    return kExitInputError;
  }
  io::write_bench_csv(out, rows);

  // Console digest: mean error per method over the scenarios that succeeded.
  for (int m = 0; m < n_methods; ++m) {
    double sum = 0.0;
    int n = 0, failed = 0;
    for (std::size_t s = 0; s < suite.size(); ++s) {
      const auto& row = rows[s * n_methods + m];
      if (row.tangent_error_deg) {
        sum += *row.tangent_error_deg;
        ++n;
      } else {
        ++failed;
      }
    }
    char line[128];
    std::snprintf(line, sizeof line, "%-16s mean %6.2f deg over %d scenario(s), %d failed\n",
                  kMethods[m], n > 0 ? sum / n : 0.0, n, failed);
    std::cerr << line;
  }

  return kExitOk;
}

}  // namespace handkin::cli
