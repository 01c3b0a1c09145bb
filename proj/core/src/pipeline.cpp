#include "handkin/pipeline.hpp"

#include <cmath>
#include <limits>

namespace handkin {

namespace {

PipelineConfig apply_options(PipelineConfig cfg, const PipelineOptions& options) {
  if (!options.saliency_scaling) {
    cfg.saliency = {1.0, 1.0, 1.0, 1.0, 1.0};
  }
  if (!options.landmark_gating) {
    cfg.maha_lm_thresh = std::numeric_limits<double>::infinity();
  }
  if (!options.body_gating) {
    cfg.maha_rb_thresh = std::numeric_limits<double>::infinity();
  }
  return cfg;
}

}  // namespace

Pipeline::Pipeline(const PipelineConfig& cfg, const PipelineOptions& options)
    : cfg_(apply_options(cfg, options)), bank_(&cfg_), body_(&cfg_, options.seed) {}

FrameBelief Pipeline::step(double t, std::span<const LandmarkObservation> observations) {
  FrameBelief belief;
  belief.t = t;
  ++frames_;

  bank_.step(t, observations);
  const auto measurements = bank_.measurements();

  const JointModel* hint = joint_ ? &joint_->current() : nullptr;
  const auto body_out = body_.step(t, measurements, hint);

  belief.body_tracking = body_out.tracking;
  belief.body_model = body_out.model;
  belief.gated_landmarks = static_cast<int>(body_out.gated_ids.size());

  if (body_out.world_pose && body_out.world_pose_cov) {
    if (!joint_) {
      joint_.emplace(&cfg_, body_.rest_anchor());
    }
    const auto joint_out = joint_->step(t, *body_out.world_pose, *body_out.world_pose_cov);
    belief.joint_type = joint_out.selected.type;
    belief.rigid_ll = joint_out.rigid_ll;
    belief.prismatic_ll = joint_out.prismatic_ll;
    belief.revolute_ll = joint_out.revolute_ll;
    if (joint_out.selected.type == JointType::Prismatic ||
        joint_out.selected.type == JointType::Revolute) {
      belief.q = joint_out.selected.q();
      auto& qmax = q_max_by_type_[static_cast<int>(joint_out.selected.type)];
      qmax = std::max(qmax, std::abs(*belief.q));
    }
  } else if (joint_) {
    belief.joint_type = joint_->current().type;
  }

  return belief;
}

PipelineSummary Pipeline::summary() const {
  PipelineSummary s;
  s.frames = frames_;
  const auto& outliers = body_.flagged_outliers();
  s.flagged_outliers.assign(outliers.begin(), outliers.end());

  if (!joint_) {
    s.type = JointType::Disconnected;
    return s;
  }
  const JointModel& m = joint_->current();
  s.type = m.type;
  if (const auto d = m.axis_direction()) s.axis_direction = *d;
  if (const auto a = m.axis_point()) s.axis_point = *a;
  s.q_max_observed = q_max_by_type_[static_cast<int>(m.type)];
  return s;
}

}  // namespace handkin
