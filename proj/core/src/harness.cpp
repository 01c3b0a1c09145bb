#include "handkin/harness.hpp"

#include <map>
#include <stdexcept>

#include "handkin/alignment.hpp"

namespace handkin {

ScenarioRun run_full_pipeline(const SimulationResult& sim, const PipelineConfig& cfg,
                              const PipelineOptions& options) {
  Pipeline pipeline(cfg, options);
  for (const auto& frame : sim.frames) pipeline.step(frame.t, frame.landmarks);

  ScenarioRun run;
  run.summary = pipeline.summary();
  if (pipeline.joint()) run.model = pipeline.joint()->current();
  return run;
}

JointModel run_single_point_baseline(const SimulationResult& sim, const PipelineConfig& cfg) {
  LandmarkFilterBank bank(&cfg);
  std::map<int, std::vector<TrackPoint>> tracks;
  for (const auto& frame : sim.frames) {
    bank.step(frame.t, frame.landmarks);
    for (const auto& [id, filter] : bank.filters()) {
      if (filter.missed_updates == 0) tracks[id].push_back({frame.t, filter.position()});
    }
  }
  if (tracks.empty()) throw std::runtime_error("no usable landmark tracks");

  const std::vector<TrackPoint>* best = nullptr;
  for (const auto& [id, track] : tracks) {
    if (!best || track.size() > best->size()) best = &track;
  }
  return baseline_single_point(*best);
}

JointModel run_rigid_hand_baseline(const SimulationResult& sim) {
  std::map<int, Vec3> ref;
  std::vector<PoseSample> poses;
  for (const auto& frame : sim.frames) {
    if (ref.empty()) {
      if (frame.landmarks.size() >= 3) {
        for (const auto& obs : frame.landmarks) ref[obs.id] = obs.pos;
      }
      continue;
    }
    std::vector<Vec3> from, to;
    for (const auto& obs : frame.landmarks) {
      if (const auto it = ref.find(obs.id); it != ref.end()) {
        from.push_back(it->second);
        to.push_back(obs.pos);
      }
    }
    if (from.size() < 3) continue;
    if (const auto T = rigid_align(from, to)) poses.push_back({frame.t, log_map(*T)});
  }
  return baseline_rigid_hand(poses);
}

std::vector<std::pair<std::string, Scenario>> benchmark_suite(const std::string& name) {
  std::vector<std::pair<std::string, Scenario>> suite;
  auto add = [&suite](JointType type, std::uint64_t seed) {
    Scenario sc = default_scenario(type, seed);
    suite.emplace_back(std::string(joint_type_name(type)) + "_s" + std::to_string(seed),
                       std::move(sc));
  };

  if (name == "default" || name == "noiseless") {
    for (std::uint64_t s = 1; s <= 5; ++s) add(JointType::Prismatic, s);
    for (std::uint64_t s = 6; s <= 10; ++s) add(JointType::Revolute, s);
  } else if (name == "mini") {
    add(JointType::Prismatic, 1);
    add(JointType::Revolute, 6);
    for (auto& [n, sc] : suite) sc.duration = 4.0;
  } else {
    throw std::invalid_argument("unknown suite \"" + name + "\"");
  }

  if (name == "noiseless") {
    for (auto& [n, sc] : suite) {
      sc.noise_sigma.clear();
      sc.outlier_rate = 0.0;
      sc.dropout_rate = 0.0;
      sc.wobble_translation = 0.0;
      sc.wobble_rotation = 0.0;
    }
  }
  return suite;
}

}  // namespace handkin
