#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "handkin/metrics.hpp"
#include "handkin/pipeline.hpp"
#include "handkin/simulator.hpp"

namespace handkin {

/*
 * Scenario-level runners shared by the benchmark command and the acceptance
 * checks: each one consumes a generated simulation and produces the final
 * joint estimate a given method arrives at. Keeping them in the library
 * guarantees the numbers quoted by `bench` and the ones the tests gate on
 * come from the same code.
 */

struct ScenarioRun {
  PipelineSummary summary;
  // Final selected model; empty when body tracking never initialized.
  std::optional<JointModel> model;
};

ScenarioRun run_full_pipeline(const SimulationResult& sim, const PipelineConfig& cfg,
                              const PipelineOptions& options);

// Single-landmark screw fit: landmark-level filtering and outlier rejection
// stay on (the fair comparison), then the trajectory with the most
// observation-backed samples is fitted in isolation.
// Throws std::runtime_error when no usable track exists.
JointModel run_single_point_baseline(const SimulationResult& sim, const PipelineConfig& cfg);

// Rigid-hand screw fit: unweighted, ungated rigid alignment of the raw
// observations against the first usable frame, then a screw fit to the pose
// stream. Throws std::domain_error on insufficient motion.
JointModel run_rigid_hand_baseline(const SimulationResult& sim);

// Named benchmark suites ("default", "noiseless", "mini").
// Throws std::invalid_argument for unknown names.
std::vector<std::pair<std::string, Scenario>> benchmark_suite(const std::string& name);

}  // namespace handkin
