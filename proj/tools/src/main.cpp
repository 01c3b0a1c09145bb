#include <CLI11.hpp>

#include "commands.hpp"

using namespace handkin::cli;

int main(int argc, char** argv) {
  CLI::App app{"Articulation estimation from hand-landmark streams"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand(
      "estimate", "Run the three-level estimator over an observation stream");
  auto* input_opt =
      estimate->add_option("--input", est.input, "Observation JSONL file");
  estimate->add_option("--config", est.config, "Config TOML (defaults built in)");
  estimate->add_option("--output", est.output, "Report JSON path")->required();
  estimate->add_option("--ground-truth", est.ground_truth,
                       "Ground-truth JSON; adds tangent error to the report");
  estimate->add_option("--beliefs", est.beliefs,
                       "Per-frame belief JSONL path (default: <output>.beliefs.jsonl)");
  estimate->add_option("--seed", est.seed, "Initialization RANSAC seed");
  auto* live_flag =
      estimate->add_flag("--live", est.live, "Read observations from standard input");
  input_opt->excludes(live_flag);
  live_flag->excludes(input_opt);

  SimulateArgs sim;
  auto* simulate =
      app.add_subcommand("simulate", "Generate a synthetic manipulation sequence");
  simulate->add_option("--joint", sim.joint, "prismatic or revolute")->required();
  simulate->add_option("--q-max", sim.q_max, "Articulation range (m or rad)");
  simulate->add_option("--noise", sim.noise, "Base landmark noise sigma (m)");
  simulate->add_option("--outlier-rate", sim.outlier_rate, "Outlier probability");
  simulate->add_option("--dropout-rate", sim.dropout_rate, "Dropout probability");
  simulate->add_option("--duration", sim.duration, "Sequence length (s)");
  simulate->add_option("--rate", sim.rate, "Frame rate (Hz)");
  simulate->add_option("--hold", sim.hold, "Stationary hold at both ends (s)");
  simulate->add_option("--wobble-translation", sim.wobble_translation,
                       "Grip wobble translation amplitude (m)");
  simulate->add_option("--wobble-rotation", sim.wobble_rotation,
                       "Grip wobble rotation amplitude (rad)");
  simulate->add_option("--movers", sim.movers,
                       "Landmark ids that move independently of the body");
  simulate->add_option("--seed", sim.seed, "Scenario seed");
  simulate->add_option("--output", sim.output, "Observation JSONL path")->required();
  simulate->add_option("--gt-output", sim.gt_output, "Ground-truth JSON path");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand(
      "bench", "Run the scenario suite across methods and write a CSV");
  bench_cmd->add_option("--suite", bench.suite, "default, noiseless, or mini");
  bench_cmd->add_option("--output-csv", bench.output_csv, "Result CSV path")->required();
  bench_cmd->add_option("--config", bench.config, "Config TOML (defaults built in)");
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads (default: hardware)");

  EvalArgs eval;
  auto* eval_cmd =
      app.add_subcommand("eval", "Tangent error between an estimate and ground truth");
  eval_cmd->add_option("--estimate", eval.estimate, "Report or ground-truth JSON")
      ->required();
  eval_cmd->add_option("--ground-truth", eval.ground_truth, "Ground-truth JSON")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  if (estimate->parsed()) {
    if (est.input.empty() && !est.live) {
      std::cerr << "error: need --input or --live\n";
      return kExitInputError;
    }
    return cmd_estimate(est);
  }
  if (simulate->parsed()) return cmd_simulate(sim);
  if (bench_cmd->parsed()) return cmd_bench(bench);
  return cmd_eval(eval);
}
