#include <chrono>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "handkin/io.hpp"
#include "handkin/metrics.hpp"
#include "handkin/pipeline.hpp"

namespace handkin::cli {

int cmd_estimate(const EstimateArgs& args) {
  PipelineConfig cfg;
  try {
    if (!args.config.empty()) cfg = load_config(args.config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  std::optional<GroundTruthJoint> gt;
  if (!args.ground_truth.empty()) {
    try {
      gt = io::read_ground_truth(args.ground_truth);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInputError;
    }
  }

  std::ifstream file;
  std::istream* in = &std::cin;
  if (!args.live) {
    file.open(args.input);
    if (!file) {
      std::cerr << "error: cannot open " << args.input << "\n";
      return kExitInputError;
    }
    in = &file;
  }

  const std::string beliefs_path =
      args.beliefs.empty() ? args.output + ".beliefs.jsonl" : args.beliefs;
  std::ofstream beliefs(beliefs_path);
  if (!beliefs) {
    std::cerr << "error: cannot write " << beliefs_path << "\n";
    return kExitInputError;
  }

  PipelineOptions options;
  options.seed = args.seed;
  Pipeline pipeline(cfg, options);

  int frames = 0;
  double t_first = 0.0, t_last = 0.0;
  const auto wall_start = std::chrono::steady_clock::now();
  try {
    io::ObservationReader reader(*in);
    while (const auto rec = reader.next()) {
      const auto belief = pipeline.step(rec->t, rec->landmarks);
      io::write_belief_line(beliefs, belief);
      if (args.live) beliefs.flush();  // emit before the next frame is read
      if (frames == 0) t_first = rec->t;
      t_last = rec->t;
      ++frames;
    }
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - wall_start;

  if (frames == 0) {
    std::cerr << "error: no frames\n";
    return kExitInputError;
  }

  const auto summary = pipeline.summary();

  io::EstimateReport report;
  report.joint_type = summary.type;
  report.axis_direction = summary.axis_direction;
  report.axis_point = summary.axis_point;
  report.q_max_observed = summary.q_max_observed;
  report.frames = frames;
  report.frames_per_second =
      (frames > 1 && t_last > t_first) ? (frames - 1) / (t_last - t_first) : 0.0;
  report.flagged_outliers = summary.flagged_outliers;
  report.beliefs_file = beliefs_path;

  if (gt && pipeline.joint()) {
    try {
      report.tangent_error_deg = tangent_error_deg(pipeline.joint()->current(), *gt);
    } catch (const std::exception&) {
      // No axis to score (rigid/disconnected); the joint_type field tells why.
    }
  }

  try {
    io::write_report(args.output, report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  std::cerr << "processed " << frames << " frames in " << wall.count() << " s ("
            << (wall.count() > 0.0 ? frames / wall.count() : 0.0) << " fps wall clock)\n";
  std::cout << "joint: " << joint_type_name(summary.type);
  if (report.tangent_error_deg) {
    std::cout << ", tangent error " << *report.tangent_error_deg << " deg";
  }
  std::cout << "\n";

  return summary.type == JointType::Disconnected ? kExitNotConverged : kExitOk;
}

}  // namespace handkin::cli
