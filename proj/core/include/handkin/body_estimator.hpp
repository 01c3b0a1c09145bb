#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "handkin/config.hpp"
#include "handkin/joint_estimator.hpp"
#include "handkin/landmark_filter.hpp"
#include "handkin/se3.hpp"

namespace handkin {

/*
 * Rigid-body belief over the hand/object compound: pose + spatial velocity
 * twist in exponential coordinates (12-dim state, covariance blocks ordered
 * pose-linear, pose-angular, velocity-linear, velocity-angular), plus the
 * rigid reference geometry the pose is measured against. The pose maps
 * reference positions (world coordinates at t_ref) to current positions.
 */
struct BodyState {
  Pose6 pose;
  Velocity6 velocity;
  Mat12 P = Mat12::Identity();
  std::map<int, Vec3> ref_landmarks;
  double t_ref = 0.0;

  Vec12 x() const {
    Vec12 v;
    v << pose.vec(), velocity.vec();
    return v;
  }
};

// One landmark's motion across the initialization window.
struct TrackSample {
  int id = 0;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  Mat3 cov = Mat3::Identity();  // current measurement noise, drives weighting
};

enum class RansacOutcome { Success, InsufficientData, NoConsensus };

struct RansacInit {
  RansacOutcome outcome = RansacOutcome::InsufficientData;
  BodyState state;                 // pose = recovered start->end transform
  std::vector<int> inlier_ids;
  std::vector<int> outlier_ids;    // tracks inconsistent with the rigid motion
};

// Uncertainty-weighted RANSAC over minimal 3-track samples: sampling
// probability proportional to 1/trace(cov), residuals scored in the
// inverse-covariance metric and capped at the inlier threshold, closed-form
// rigid alignment, final refit on the inlier set. Deterministic per seed.
RansacInit init_ransac(std::span<const TrackSample> tracks, const PipelineConfig& cfg,
                       std::uint64_t rng_seed);

enum class MotionModelTag { Static, ConstantVelocity, KinematicPrior };

const char* motion_model_name(MotionModelTag tag);

// One prediction step under the given motion model. KinematicPrior requires
// a joint hint (throws std::invalid_argument without one); its mean comes
// from the joint-level feedback while covariance grows as for Static.
// Process noise: Q_step = Q_rb * dt (per-second rates).
BodyState predict_body(const BodyState& s, double dt, MotionModelTag model,
                       const JointModel* joint_hint, const PipelineConfig& cfg);

struct BodyCorrection {
  BodyState state;
  MotionModelTag chosen = MotionModelTag::Static;
  bool corrected = false;  // false: fewer than 3 usable measurements
  struct PerLandmark {
    int id = 0;
    double mahalanobis = 0.0;
    bool gated = false;
  };
  std::vector<PerLandmark> landmarks;
  // Log-likelihood of the measurement set under each prediction, indexed by
  // MotionModelTag; empty slot = model not offered this frame.
  std::array<std::optional<double>, 3> model_log_likelihood{};
};

// Picks the most likely motion model for the frame, gates per-landmark
// innovations at cfg.maha_rb_thresh (gated ids are reported back as
// body-level outliers), and runs an iterated EKF update on the survivors.
BodyCorrection correct_body(std::span<const std::pair<MotionModelTag, BodyState>> predictions,
                            std::span<const BodyMeasurement> measurements,
                            const PipelineConfig& cfg);

// Pose belief handed upward to the joint filters.
std::pair<Pose6, Mat6> body_pose_measurement(const BodyState& s);

/*
 * Frame-to-frame body tracking. Starts in an acquisition phase that snapshots
 * landmark positions and waits for enough common motion, then initializes via
 * RANSAC and tracks. Poses are reported in a fixed world frame: when tracking
 * collapses (most reference landmarks lost) the current pose is folded into
 * an anchor and acquisition restarts, so downstream consumers see one
 * continuous pose stream with q = 0 at the original rest configuration.
 */
class BodyEstimator {
 public:
  BodyEstimator(const PipelineConfig* cfg, std::uint64_t rng_seed);

  struct StepOutput {
    bool tracking = false;
    bool initialized_this_frame = false;
    std::optional<MotionModelTag> model;
    std::array<std::optional<double>, 3> model_ll{};
    std::vector<int> gated_ids;
    std::optional<Pose6> world_pose;
    std::optional<Mat6> world_pose_cov;
  };

  StepOutput step(double t, std::span<const BodyMeasurement> measurements,
                  const JointModel* joint_hint);

  bool tracking() const { return phase_ == Phase::Tracking; }
  const BodyState& state() const { return state_; }
  const std::set<int>& flagged_outliers() const { return blacklist_; }
  // Centroid of the reference landmarks: the body's representative point in
  // the rest configuration (joint-level radius computations key off it).
  Vec3 rest_anchor() const;

 private:
  enum class Phase { Acquiring, Tracking };

  void begin_acquisition(double t);
  bool try_initialize(double t, std::span<const BodyMeasurement> measurements);
  StepOutput track(double t, std::span<const BodyMeasurement> measurements,
                   const JointModel* joint_hint);

  const PipelineConfig* cfg_;
  std::uint64_t seed_;
  int init_epoch_ = 0;

  Phase phase_ = Phase::Acquiring;
  Pose6 anchor_;  // composed world offset accumulated across re-inits
  BodyState state_;

  std::map<int, Vec3> snapshot_;
  double t_snapshot_ = 0.0;
  int frames_since_snapshot_ = 0;

  std::set<int> blacklist_;
  std::map<int, int> consecutive_gated_;

  // Blacklisted ids earn their way back by moving rigidly with the body for a
  // sustained stretch; `ref` is the body-frame position the streak is measured
  // against. Keeps a transient glitch (bad spawn, outlier burst) from flagging
  // a landmark as an independent mover forever.
  struct Probation {
    Vec3 ref = Vec3::Zero();
    int streak = 0;
  };
  std::map<int, Probation> probation_;

  double last_t_ = 0.0;
  bool started_ = false;
};

}  // namespace handkin
