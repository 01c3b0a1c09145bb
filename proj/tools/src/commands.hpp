#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace handkin::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitConfigError = 4;

struct EstimateArgs {
  std::string input;         // empty with live=true: read stdin
  std::string config;        // empty: built-in defaults
  std::string output;
  std::string ground_truth;  // optional
  std::string beliefs;       // optional; default derives from output
  bool live = false;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string joint;
  double q_max = 0.0;  // 0: type default (0.3 m / 90 deg)
  double noise = 0.002;
  double outlier_rate = 0.05;
  double dropout_rate = 0.05;
  double duration = 10.0;
  double rate = 30.0;
  double hold = 1.0;
  double wobble_translation = 0.003;
  double wobble_rotation = 0.025;
  std::vector<int> movers;
  std::uint64_t seed = 0;
  std::string output;
  std::string gt_output;
};

struct BenchArgs {
  std::string suite = "default";  // default | noiseless | mini
  std::string output_csv;
  std::string config;
  int jobs = 0;  // 0: hardware concurrency
};

struct EvalArgs {
  std::string estimate;
  std::string ground_truth;
};

int cmd_estimate(const EstimateArgs& args);
int cmd_simulate(const SimulateArgs& args);
int cmd_bench(const BenchArgs& args);
int cmd_eval(const EvalArgs& args);

}  // namespace handkin::cli
