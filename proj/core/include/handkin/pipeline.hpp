#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "handkin/body_estimator.hpp"
#include "handkin/config.hpp"
#include "handkin/joint_estimator.hpp"
#include "handkin/landmark_filter.hpp"

namespace handkin {

/*
 * Switches for the uncertainty machinery, exposed so the benchmark can run
 * the ablated variant: saliency scaling forced to 1 and/or the Mahalanobis
 * gates opened (threshold = +infinity). Applied as a config transform after
 * validation; the estimation code paths are identical either way.
 */
struct PipelineOptions {
  bool saliency_scaling = true;
  bool landmark_gating = true;
  bool body_gating = true;
  std::uint64_t seed = 0;
};

// Per-frame belief snapshot, emitted after the frame is processed.
struct FrameBelief {
  double t = 0.0;
  bool body_tracking = false;
  std::optional<MotionModelTag> body_model;
  int gated_landmarks = 0;

  JointType joint_type = JointType::Rigid;
  std::optional<double> rigid_ll;      // per-frame measurement log-likelihoods
  std::optional<double> prismatic_ll;
  std::optional<double> revolute_ll;
  std::optional<double> q;             // configuration under the selected model
};

struct PipelineSummary {
  JointType type = JointType::Disconnected;
  std::optional<Vec3> axis_direction;
  std::optional<Vec3> axis_point;
  double q_max_observed = 0.0;  // largest |q| seen under the final model type
  std::vector<int> flagged_outliers;
  int frames = 0;
};

/*
 * The full three-level estimator: landmark filter bank feeding a rigid-body
 * tracker feeding the joint-model filters, with the joint estimate fed back
 * as the body level's kinematic motion prior. Strictly online: one frame in,
 * one belief out, O(1) memory in sequence length.
 */
class Pipeline {
 public:
  Pipeline(const PipelineConfig& cfg, const PipelineOptions& options = {});

  FrameBelief step(double t, std::span<const LandmarkObservation> observations);

  PipelineSummary summary() const;

  const PipelineConfig& effective_config() const { return cfg_; }
  const BodyEstimator& body() const { return body_; }
  const JointEstimator* joint() const { return joint_ ? &*joint_ : nullptr; }

 private:
  PipelineConfig cfg_;
  LandmarkFilterBank bank_;
  BodyEstimator body_;
  std::optional<JointEstimator> joint_;
  double q_max_by_type_[4] = {0.0, 0.0, 0.0, 0.0};
  int frames_ = 0;
};

}  // namespace handkin
