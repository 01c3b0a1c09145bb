#pragma once

#include <map>
#include <span>
#include <vector>

#include "handkin/config.hpp"
#include "handkin/gaussian.hpp"
#include "handkin/linalg.hpp"

namespace handkin {

// Hand-landmark topology (21 points, MediaPipe indexing). The wrist carries
// no grasp information and is excluded from tracking; the remaining classes
// carry per-class saliency weights reflecting how reliably each joint type
// is detected and how rigidly it follows the grasped object.
enum class LandmarkClass { Wrist, Thumb, Mcp, Pip, Dip, Tip };

inline constexpr int kNumLandmarkIds = 21;

// Throws std::out_of_range for ids outside [0, 20].
LandmarkClass landmark_class_of(int id);

double saliency_score(LandmarkClass cls, const PipelineConfig::Saliency& s);

struct LandmarkObservation {
  double t = 0.0;
  int id = 0;
  Vec3 pos = Vec3::Zero();
  double vis = 1.0;  // detector visibility/confidence in [0, 1]
};

enum class IngestOutcome { Accepted, RejectedLowVisibility, RejectedExcludedClass };

// Pure admission gate; no filter state involved.
IngestOutcome ingest(const LandmarkObservation& obs, const PipelineConfig& cfg);

enum class LandmarkStatus { Active, Lost };

// Constant-velocity Kalman state for one landmark: x = (position, velocity).
struct LandmarkFilterState {
  int id = 0;
  LandmarkClass cls = LandmarkClass::Tip;
  Vec6 x = Vec6::Zero();
  Mat6 P = Mat6::Zero();
  int missed_updates = 0;
  LandmarkStatus status = LandmarkStatus::Active;

  Vec3 position() const { return x.head<3>(); }
  Vec3 velocity() const { return x.tail<3>(); }
  Mat3 position_cov() const { return P.topLeftCorner<3, 3>(); }
};

// New filter pinned at the observation with zero velocity and P0.
LandmarkFilterState spawn_filter(const LandmarkObservation& obs, const PipelineConfig& cfg);

// Constant-velocity propagation. Process noise is scaled linearly in time
// against the 30 Hz reference step: Q_step = Q * (dt / (1/30)).
// Throws std::invalid_argument for dt <= 0.
LandmarkFilterState predict(const LandmarkFilterState& s, double dt, const PipelineConfig& cfg);

enum class CorrectionOutcome { Corrected, GatedOutlier };

struct CorrectionResult {
  LandmarkFilterState state;
  CorrectionOutcome outcome = CorrectionOutcome::Corrected;
  double mahalanobis = 0.0;
};

// Position-measurement update with Mahalanobis admission: distances at or
// above cfg.maha_lm_thresh leave the state untouched (missed_updates += 1).
CorrectionResult correct(const LandmarkFilterState& s, const LandmarkObservation& obs,
                         const PipelineConfig& cfg);

// Marks the filter Lost when the position-block covariance trace reaches
// cfg.landmark_unc_thresh. Idempotent; Lost is terminal for this instance
// (the bank spawns a fresh filter if the id reappears).
LandmarkFilterState check_lost(const LandmarkFilterState& s, const PipelineConfig& cfg);

// Saliency-scaled position covariance handed to the body level as that
// landmark's measurement noise: R = s_class * P_position.
Mat3 adjusted_covariance(const LandmarkFilterState& s, const PipelineConfig& cfg);

// Position measurement + noise the body estimator consumes.
struct BodyMeasurement {
  int id = 0;
  Vec3 pos = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

/*
 * Per-frame orchestration of the filter bank: predicts every active filter,
 * corrects the ones with admitted observations, spawns filters for new ids,
 * and retires filters whose uncertainty outgrew the loss bound. Lost ids may
 * respawn on a later observation. Deterministic: filters are stepped in id
 * order and nothing here draws randomness.
 */
class LandmarkFilterBank {
 public:
  explicit LandmarkFilterBank(const PipelineConfig* cfg) : cfg_(cfg) {}

  struct FrameStats {
    int accepted = 0;
    int rejected_low_vis = 0;
    int rejected_class = 0;
    int corrected = 0;
    int gated = 0;
    int spawned = 0;
    int lost = 0;
  };

  // Advances the bank to time t. First frame sets the clock without predicting.
  FrameStats step(double t, std::span<const LandmarkObservation> observations);

  const std::map<int, LandmarkFilterState>& filters() const { return filters_; }

  // Active filters as body-level measurements. `saliency_scaling` off uses the
  // raw position covariance (ablation hook).
  std::vector<BodyMeasurement> measurements(bool saliency_scaling = true) const;

  double last_time() const { return last_t_; }

 private:
  const PipelineConfig* cfg_;
  std::map<int, LandmarkFilterState> filters_;
  double last_t_ = 0.0;
  bool started_ = false;
};

}  // namespace handkin
