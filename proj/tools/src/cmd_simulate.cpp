#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "handkin/io.hpp"
#include "handkin/simulator.hpp"

namespace handkin::cli {

int cmd_simulate(const SimulateArgs& args) {
  JointType type;
  if (args.joint == "prismatic") {
    type = JointType::Prismatic;
  } else if (args.joint == "revolute") {
    type = JointType::Revolute;
  } else {
    std::cerr << "error: --joint must be prismatic or revolute\n";
    return kExitInputError;
  }

  Scenario sc = default_scenario(type, args.seed);
  if (args.q_max > 0.0) sc.joint.q_max = args.q_max;
  sc.noise_sigma = class_scaled_sigma(args.noise);
  sc.outlier_rate = args.outlier_rate;
  sc.dropout_rate = args.dropout_rate;
  sc.duration = args.duration;
  sc.rate = args.rate;
  sc.hold_seconds = args.hold;
  sc.wobble_translation = args.wobble_translation;
  sc.wobble_rotation = args.wobble_rotation;
  sc.independent_movers.insert(args.movers.begin(), args.movers.end());

  SimulationResult result;
  try {
    result = generate(sc);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  std::ofstream out(args.output);
  if (!out) {
    std::cerr << "error: cannot write " << args.output << "\n";
    return kExitInputError;
  }
  for (const auto& frame : result.frames) {
    io::write_observation_line(out, frame.t, frame.landmarks);
  }

  if (!args.gt_output.empty()) {
    try {
      io::write_ground_truth(args.gt_output, result.joint);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInputError;
    }
  }

  std::cerr << "wrote " << result.frames.size() << " frames (" << joint_type_name(type)
            << ", q_max " << result.joint.q_max << ")\n";
  return kExitOk;
}

}  // namespace handkin::cli
