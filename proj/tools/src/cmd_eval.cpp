#include <cstdio>
#include <iostream>

#include "commands.hpp"
#include "handkin/io.hpp"
#include "handkin/metrics.hpp"

namespace handkin::cli {

int cmd_eval(const EvalArgs& args) {
  io::EstimateReport est;
  GroundTruthJoint gt;
  try {
    est = io::read_estimate(args.estimate);
    gt = io::read_ground_truth(args.ground_truth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  if (est.joint_type != gt.type) {
    std::cerr << "note: joint type mismatch (estimate " << joint_type_name(est.joint_type)
              << ", ground truth " << joint_type_name(gt.type)
              << "); error computed on tangents\n";
  }

  GroundTruthJoint est_axes;
  est_axes.type = est.joint_type;
  if (est.axis_direction) est_axes.axis_direction = *est.axis_direction;
  if (est.axis_point) est_axes.axis_point = *est.axis_point;
  est_axes.q_max = gt.q_max;  // the range is always the demonstration's

  double error;
  try {
    error = tangent_error_deg(est_axes, gt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  char line[32];
  std::snprintf(line, sizeof line, "%.1f\n", error);
  std::cout << line;
  return kExitOk;
}

}  // namespace handkin::cli
