#pragma once

#include <deque>
#include <optional>
#include <variant>

#include "handkin/axis.hpp"
#include "handkin/config.hpp"
#include "handkin/se3.hpp"

namespace handkin {

enum class JointType { Rigid, Prismatic, Revolute, Disconnected };

const char* joint_type_name(JointType t);

/*
 * Joint filters estimate a single-dof constraint between the tracked body
 * and the world from the stream of body pose measurements. State layouts
 * follow the covariance block order in PipelineConfig:
 *   prismatic: (phi, theta, q, q_dot)               axis through the origin
 *   revolute:  (phi, theta, px, py, pz, q, q_dot)   axis through point p
 * The measured pose is compared against the pose the joint predicts relative
 * to a fixed reference pose (the body pose at joint-estimator start).
 */
struct PrismaticState {
  AxisSpherical axis;
  double q = 0.0;
  double q_dot = 0.0;
  Mat4 P = Mat4::Identity();
};

struct RevoluteState {
  AxisSpherical axis;
  Vec3 point = Vec3::Zero();
  double q = 0.0;
  double q_dot = 0.0;
  Mat7 P = Mat7::Identity();
};

// Predicted body pose for a joint configuration.
Pose6 prismatic_pose(const PrismaticState& s, const Pose6& reference);
Pose6 revolute_pose(const RevoluteState& s, const Pose6& reference);

// Constant joint velocity propagation; P += Q * (dt / (1/30)).
// Throws std::invalid_argument for dt <= 0.
PrismaticState predict_joint(const PrismaticState& s, double dt, const PipelineConfig& cfg);
RevoluteState predict_joint(const RevoluteState& s, double dt, const PipelineConfig& cfg);

template <typename State>
struct JointCorrection {
  State state;
  // Per-frame measurement log-likelihood; empty when the correction was
  // skipped because the relative rotation sat on the log branch cut.
  std::optional<double> log_likelihood;
  bool skipped_branch_cut = false;
};

// EKF update against a measured body pose with covariance meas_cov (in the
// 6-dim exponential-coordinate chart of the measurement). The innovation is
// log(prediction^-1 * measurement); Jacobians are central differences.
JointCorrection<PrismaticState> correct_joint(const PrismaticState& s, const Pose6& measured,
                                              const Mat6& meas_cov, const Pose6& reference,
                                              const PipelineConfig& cfg);
JointCorrection<RevoluteState> correct_joint(const RevoluteState& s, const Pose6& measured,
                                             const Mat6& meas_cov, const Pose6& reference,
                                             const PipelineConfig& cfg);

// Selected joint hypothesis, as reported and as fed back to the body level.
struct JointModel {
  JointType type = JointType::Rigid;
  std::variant<std::monostate, PrismaticState, RevoluteState> params;
  double log_likelihood_window = 0.0;

  // Canonical direction (first nonzero component >= 0); empty for
  // Rigid/Disconnected. q/q_dot are sign-flipped to match.
  std::optional<Vec3> axis_direction() const;
  std::optional<Vec3> axis_point() const;  // revolute only
  double q() const;
  double q_dot() const;
};

// Pose + spatial twist the joint predicts dt ahead, used as the body level's
// KinematicPrior motion model. Empty for Disconnected.
std::optional<std::pair<Pose6, Velocity6>> joint_prediction_for_body(
    const JointModel& model, const Pose6& reference, double dt);

// Windowed-likelihood evidence for the model selector.
struct ModelEvidence {
  std::optional<double> rigid_mean_ll;
  std::optional<double> prismatic_mean_ll;
  std::optional<double> revolute_mean_ll;
  const PrismaticState* prismatic = nullptr;
  const RevoluteState* revolute = nullptr;
};

// Argmax of windowed mean log-likelihood with a parsimony penalty (simpler
// models win ties), a revolute->prismatic demotion when the estimated radius
// about `body_anchor` exceeds cfg.model_select.revolute_radius_cap, and a
// Disconnected verdict when every window mean sits below the evidence floor.
JointModel select_model(const ModelEvidence& evidence, const Vec3& body_anchor,
                        const PipelineConfig& cfg);

/*
 * Orchestration for one articulation: consumes the body pose stream, spawns
 * the prismatic filter once translation-from-reference is measurable and the
 * revolute filter once rotation is, maintains per-model likelihood windows,
 * and re-selects the model each frame. The reference pose is the identity:
 * body poses arrive expressed relative to the tracking start.
 */
class JointEstimator {
 public:
  JointEstimator(const PipelineConfig* cfg, const Vec3& body_anchor);

  struct StepResult {
    JointModel selected;
    std::optional<double> rigid_ll;
    std::optional<double> prismatic_ll;
    std::optional<double> revolute_ll;
    bool branch_cut_skip = false;
  };

  StepResult step(double t, const Pose6& measured_pose, const Mat6& pose_cov);

  const JointModel& current() const { return current_; }
  const Pose6& reference() const { return reference_; }

  // Feedback for the body level's KinematicPrior model.
  std::optional<std::pair<Pose6, Velocity6>> prediction_for_body(double dt) const;

 private:
  double window_mean(const std::deque<double>& w) const;
  void push_window(std::deque<double>& w, double v);

  const PipelineConfig* cfg_;
  Vec3 body_anchor_;
  Pose6 reference_;  // identity: poses are measured relative to tracking start

  std::optional<PrismaticState> pris_;
  std::optional<RevoluteState> rev_;
  std::deque<double> rigid_window_, pris_window_, rev_window_;

  JointModel current_;
  double last_t_ = 0.0;
  bool started_ = false;
};

}  // namespace handkin
