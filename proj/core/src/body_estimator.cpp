#include "handkin/body_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "handkin/alignment.hpp"
#include "handkin/gaussian.hpp"
#include "handkin/random.hpp"

namespace handkin {

namespace {

constexpr int kIekfIterations = 3;
// Acquisition triggers: enough common rigid motion to separate inliers from
// coincidence, or a frame cap so near-static scenes still initialize.
constexpr double kInitMotionFactor = 2.0;  // x inlier threshold, median track motion
constexpr int kMaxAcquisitionFrames = 30;
// A landmark gated this many frames in a row is no longer explained by the
// rigid body; evict it from the reference set.
constexpr int kConsecutiveGateEvict = 5;
// Half a second at 30 Hz: long enough that an independent mover parked at a
// motion extremum cannot sit still through a whole streak.
constexpr int kReadmitStreak = 15;

double weighted_residual(const Vec3& r, const Mat3& cov) {
  return r.dot(cov.llt().solve(r));
}

// Residual cap in the inverse-covariance metric: the value a residual of
// Euclidean norm = threshold would score against this track's (isotropic
// equivalent) noise. Keeps the MSAC score commensurable across tracks with
// different weights.
double residual_cap(double threshold, const Mat3& cov) {
  return threshold * threshold * 3.0 / cov.trace();
}

// Local pose belief lifted into the world frame through the (deterministic)
// anchor composition; covariance mapped through the chart numerically.
std::pair<Pose6, Mat6> world_pose_with_cov(const Pose6& anchor, const BodyState& s) {
  const auto [local_pose, local_cov] = body_pose_measurement(s);
  auto chart = [&anchor](const VecX& p) -> VecX {
    return compose(anchor, Pose6::from_vec(p)).vec();
  };
  const MatX Jc = numeric_jacobian(chart, VecX(local_pose.vec()));
  Mat6 cov = Jc * local_cov * Jc.transpose();
  symmetrize_in_place(cov);
  return {compose(anchor, local_pose), cov};
}

// d(T * ref_i)/d(pose chart), stacked 3k x 6, by central differences shared
// across landmarks (12 transform evaluations total).
MatX stacked_point_jacobian(const Pose6& pose, const std::vector<Vec3>& refs,
                            double step = 1e-6) {
  MatX J(3 * refs.size(), 6);
  Vec6 p = pose.vec();
  for (int j = 0; j < 6; ++j) {
    Vec6 hi = p, lo = p;
    hi(j) += step;
    lo(j) -= step;
    const Eigen::Isometry3d Thi = exp_map(Pose6::from_vec(hi));
    const Eigen::Isometry3d Tlo = exp_map(Pose6::from_vec(lo));
    for (std::size_t i = 0; i < refs.size(); ++i) {
      J.block<3, 1>(3 * static_cast<int>(i), j) =
          (Thi * refs[i] - Tlo * refs[i]) / (2.0 * step);
    }
  }
  return J;
}

}  // namespace

const char* motion_model_name(MotionModelTag tag) {
  switch (tag) {
    case MotionModelTag::Static: return "static";
    case MotionModelTag::ConstantVelocity: return "constant_velocity";
    case MotionModelTag::KinematicPrior: return "kinematic_prior";
  }
  return "unknown";
}

RansacInit init_ransac(std::span<const TrackSample> tracks, const PipelineConfig& cfg,
                       std::uint64_t rng_seed) {
  RansacInit out;
  const int n = static_cast<int>(tracks.size());
  if (n < 3) {
    out.outcome = RansacOutcome::InsufficientData;
    return out;
  }

  std::vector<double> weights(n);
  std::vector<double> caps(n);
  for (int i = 0; i < n; ++i) {
    weights[i] = 1.0 / tracks[i].cov.trace();
    caps[i] = residual_cap(cfg.ransac.inlier_threshold, tracks[i].cov);
  }

  Rng rng(rng_seed);
  const int iterations = static_cast<int>(cfg.ransac.iterations);
  const int min_inliers = static_cast<int>(cfg.ransac.min_inliers);

  double best_score = std::numeric_limits<double>::infinity();
  std::optional<Eigen::Isometry3d> best_T;

  std::vector<double> draw = weights;
  for (int it = 0; it < iterations; ++it) {
    // Weighted sample of 3 distinct tracks (certain tracks get picked more).
    std::copy(weights.begin(), weights.end(), draw.begin());
    std::array<int, 3> sample{};
    for (int k = 0; k < 3; ++k) {
      const auto idx = rng.weighted_index(draw);
      sample[k] = static_cast<int>(idx);
      draw[idx] = 0.0;
    }

    const std::array<Vec3, 3> from{tracks[sample[0]].start, tracks[sample[1]].start,
                                   tracks[sample[2]].start};
    const std::array<Vec3, 3> to{tracks[sample[0]].end, tracks[sample[1]].end,
                                 tracks[sample[2]].end};
    const auto T = rigid_align(from, to);
    if (!T) continue;  // collinear triplet or reflection: resample

    double score = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec3 r = *T * tracks[i].start - tracks[i].end;
      score += std::min(weighted_residual(r, tracks[i].cov), caps[i]);
    }
    if (score < best_score) {
      best_score = score;
      best_T = T;
    }
  }

  auto inliers_of = [&](const Eigen::Isometry3d& T) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      const Vec3 r = T * tracks[i].start - tracks[i].end;
      if (weighted_residual(r, tracks[i].cov) < caps[i]) idx.push_back(i);
    }
    return idx;
  };

  std::vector<int> inliers = best_T ? inliers_of(*best_T) : std::vector<int>{};
  if (!best_T || static_cast<int>(inliers.size()) < min_inliers) {
    out.outcome = RansacOutcome::NoConsensus;
    return out;
  }

  // Refit on the consensus set with inverse-trace weighting, then re-gate.
  {
    std::vector<Vec3> from, to;
    std::vector<double> w;
    for (int i : inliers) {
      from.push_back(tracks[i].start);
      to.push_back(tracks[i].end);
      w.push_back(weights[i]);
    }
    if (const auto refit = rigid_align(from, to, w)) {
      const auto refined = inliers_of(*refit);
      if (static_cast<int>(refined.size()) >= min_inliers) {
        best_T = refit;
        inliers = refined;
      }
    }
  }

  out.outcome = RansacOutcome::Success;
  out.state.pose = log_map(*best_T);
  out.state.P = cfg.p0_rb_mat();
  std::vector<char> is_inlier(n, 0);
  for (int i : inliers) is_inlier[i] = 1;
  for (int i = 0; i < n; ++i) {
    if (is_inlier[i]) {
      out.inlier_ids.push_back(tracks[i].id);
      out.state.ref_landmarks[tracks[i].id] = tracks[i].start;
    } else {
      out.outlier_ids.push_back(tracks[i].id);
    }
  }
  return out;
}

BodyState predict_body(const BodyState& s, double dt, MotionModelTag model,
                       const JointModel* joint_hint, const PipelineConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("predict_body: dt must be > 0");
  BodyState out = s;
  const Mat12 Q_step = dt * cfg.q_rb_mat();

  switch (model) {
    case MotionModelTag::Static: {
      out.P = s.P + Q_step;
      break;
    }
    case MotionModelTag::ConstantVelocity: {
      // Spatial twist integration: T(t+dt) = exp(dt * eta) * T(t), so a body
      // on a constant screw (fixed-axis joint) is propagated exactly.
      auto flow = [dt](const VecX& x) -> VecX {
        const Pose6 p = Pose6::from_vec(x.head<6>());
        const Vec6 eta = x.tail<6>();
        const Pose6 moved =
            log_map(exp_map(Pose6::from_vec(dt * eta)) * exp_map(p));
        VecX y(12);
        y << moved.vec(), eta;
        return y;
      };
      const VecX x1 = flow(s.x());
      const MatX F = numeric_jacobian(flow, s.x());
      out.pose = Pose6::from_vec(x1.head<6>());
      out.P = F * s.P * F.transpose() + Q_step;
      break;
    }
    case MotionModelTag::KinematicPrior: {
      if (!joint_hint) {
        throw std::invalid_argument("predict_body: KinematicPrior requires a joint hint");
      }
      // Reference is the identity: body poses are tracked relative to rest.
      const auto pred = joint_prediction_for_body(*joint_hint, Pose6{}, dt);
      if (!pred) {
        throw std::invalid_argument("predict_body: joint hint carries no prediction");
      }
      out.pose = pred->first;
      out.velocity = pred->second;
      out.P = s.P + Q_step;  // mean from the prior, spread as for Static
      break;
    }
  }
  symmetrize_in_place(out.P);
  return out;
}

BodyCorrection correct_body(std::span<const std::pair<MotionModelTag, BodyState>> predictions,
                            std::span<const BodyMeasurement> measurements,
                            const PipelineConfig& cfg) {
  if (predictions.empty()) {
    throw std::invalid_argument("correct_body: at least one prediction required");
  }

  BodyCorrection out;

  // Measurements usable for the update: ids with reference geometry.
  const auto& refs = predictions.front().second.ref_landmarks;
  std::vector<const BodyMeasurement*> usable;
  std::vector<Vec3> ref_pts;
  for (const auto& m : measurements) {
    const auto it = refs.find(m.id);
    if (it == refs.end()) continue;
    usable.push_back(&m);
    ref_pts.push_back(it->second);
  }
  const int k = static_cast<int>(usable.size());

  // Score every offered model against the measurement set. The score is the
  // Gaussian log-likelihood of the stacked innovations under the measurement
  // noise alone, which keeps the ranking invariant to any common rescaling
  // of the landmark covariances.
  int best = 0;
  if (k > 0) {
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < predictions.size(); ++m) {
      const auto& [tag, state] = predictions[m];
      double ll = 0.0;
      for (int i = 0; i < k; ++i) {
        const Vec3 nu = usable[i]->pos - transform_point(state.pose, ref_pts[i]);
        ll += gaussian_log_likelihood(nu, usable[i]->cov);
      }
      out.model_log_likelihood[static_cast<int>(tag)] = ll;
      if (ll > best_ll) {  // strict: ties keep the earlier (simpler) model
        best_ll = ll;
        best = static_cast<int>(m);
      }
    }
  }

  const auto& [chosen_tag, chosen] = predictions[best];
  out.chosen = chosen_tag;
  out.state = chosen;

  if (k < 3) return out;  // not enough geometry to correct a 6-dof pose

  // Per-landmark admission against the predicted innovation covariance.
  const MatX Jpose = stacked_point_jacobian(chosen.pose, ref_pts);
  std::vector<int> admitted;
  for (int i = 0; i < k; ++i) {
    MatX Hi = MatX::Zero(3, 12);
    Hi.leftCols<6>() = Jpose.middleRows<3>(3 * i);
    const Mat3 Si = Hi * chosen.P * Hi.transpose() + usable[i]->cov;
    const Vec3 pred = transform_point(chosen.pose, ref_pts[i]);
    const double m = mahalanobis(usable[i]->pos, pred, Si);
    const bool gated = m >= cfg.maha_rb_thresh;
    out.landmarks.push_back({usable[i]->id, m, gated});
    if (!gated) admitted.push_back(i);
  }

  const int ka = static_cast<int>(admitted.size());
  if (ka < 3) return out;

  VecX z(3 * ka);
  MatX R = MatX::Zero(3 * ka, 3 * ka);
  std::vector<Vec3> arefs(ka);
  for (int i = 0; i < ka; ++i) {
    z.segment<3>(3 * i) = usable[admitted[i]]->pos;
    R.block<3, 3>(3 * i, 3 * i) = usable[admitted[i]]->cov;
    arefs[i] = ref_pts[admitted[i]];
  }

  // Iterated EKF: relinearize the point-projection around each new iterate.
  const Vec12 x_pred = chosen.x();
  Vec12 x_i = x_pred;
  MatX H(3 * ka, 12);
  MatX K;
  for (int iter = 0; iter < kIekfIterations; ++iter) {
    const Pose6 pose_i = Pose6::from_vec(x_i.head<6>());
    H.setZero();
    H.leftCols<6>() = stacked_point_jacobian(pose_i, arefs);
    VecX h(3 * ka);
    const Eigen::Isometry3d T_i = exp_map(pose_i);
    for (int i = 0; i < ka; ++i) h.segment<3>(3 * i) = T_i * arefs[i];

    MatX S = H * chosen.P * H.transpose() + R;
    symmetrize_in_place(S);
    K = chosen.P * H.transpose() * S.llt().solve(MatX::Identity(3 * ka, 3 * ka));
    const Vec12 x_next = x_pred + K * (z - h - H * (x_pred - x_i));
    const double step = (x_next - x_i).norm();
    x_i = x_next;
    if (step < 1e-12) break;
  }

  const Mat12 IKH = Mat12::Identity() - K * H;
  Mat12 P1 = IKH * chosen.P * IKH.transpose() + K * R * K.transpose();
  symmetrize_in_place(P1);

  out.state.pose = Pose6::from_vec(x_i.head<6>());
  out.state.velocity = Velocity6::from_vec(x_i.tail<6>());
  out.state.P = P1;
  out.corrected = true;
  return out;
}

std::pair<Pose6, Mat6> body_pose_measurement(const BodyState& s) {
  return {s.pose, Mat6(s.P.topLeftCorner<6, 6>())};
}

BodyEstimator::BodyEstimator(const PipelineConfig* cfg, std::uint64_t rng_seed)
    : cfg_(cfg), seed_(rng_seed) {}

Vec3 BodyEstimator::rest_anchor() const {
  Vec3 c = Vec3::Zero();
  if (state_.ref_landmarks.empty()) return c;
  for (const auto& [id, p] : state_.ref_landmarks) c += p;
  return c / static_cast<double>(state_.ref_landmarks.size());
}

void BodyEstimator::begin_acquisition(double t) {
  phase_ = Phase::Acquiring;
  snapshot_.clear();
  t_snapshot_ = t;
  frames_since_snapshot_ = 0;
  // Probation refs live in the (now stale) body frame.
  probation_.clear();
}

bool BodyEstimator::try_initialize(double t, std::span<const BodyMeasurement> measurements) {
  if (snapshot_.empty()) {
    for (const auto& m : measurements) snapshot_[m.id] = m.pos;
    t_snapshot_ = t;
    frames_since_snapshot_ = 0;
    return false;
  }
  ++frames_since_snapshot_;

  std::vector<TrackSample> tracks;
  std::vector<double> motion;
  for (const auto& m : measurements) {
    const auto it = snapshot_.find(m.id);
    if (it == snapshot_.end()) continue;
    tracks.push_back({m.id, it->second, m.pos, m.cov});
    motion.push_back((m.pos - it->second).norm());
  }

  const int min_inliers = static_cast<int>(cfg_->ransac.min_inliers);
  if (static_cast<int>(tracks.size()) < min_inliers) {
    // Too much churn since the snapshot; start over from current geometry.
    snapshot_.clear();
    return false;
  }

  std::nth_element(motion.begin(), motion.begin() + motion.size() / 2, motion.end());
  const double median_motion = motion[motion.size() / 2];
  const bool moved = median_motion >= kInitMotionFactor * cfg_->ransac.inlier_threshold;
  const bool waited = frames_since_snapshot_ >= kMaxAcquisitionFrames;
  if (!moved && !waited) return false;

  const std::uint64_t seed = seed_ + 1000003ull * static_cast<std::uint64_t>(init_epoch_);
  auto init = init_ransac(tracks, *cfg_, seed);
  ++init_epoch_;
  if (init.outcome != RansacOutcome::Success) {
    if (waited) snapshot_.clear();
    return false;
  }

  state_ = std::move(init.state);
  state_.t_ref = t_snapshot_;
  // Average twist over the initialization window seeds the velocity.
  const double span = t - t_snapshot_;
  state_.velocity =
      span > 0.0 ? Velocity6::from_vec(state_.pose.vec() / span) : Velocity6{};

  blacklist_.clear();
  blacklist_.insert(init.outlier_ids.begin(), init.outlier_ids.end());
  consecutive_gated_.clear();
  probation_.clear();
  phase_ = Phase::Tracking;
  return true;
}

BodyEstimator::StepOutput BodyEstimator::track(double t,
                                               std::span<const BodyMeasurement> measurements,
                                               const JointModel* joint_hint) {
  StepOutput out;
  const double dt = t - last_t_;

  std::vector<std::pair<MotionModelTag, BodyState>> predictions;
  predictions.emplace_back(MotionModelTag::Static,
                           predict_body(state_, dt, MotionModelTag::Static, nullptr, *cfg_));
  predictions.emplace_back(
      MotionModelTag::ConstantVelocity,
      predict_body(state_, dt, MotionModelTag::ConstantVelocity, nullptr, *cfg_));
  if (joint_hint && joint_hint->type != JointType::Disconnected) {
    predictions.emplace_back(
        MotionModelTag::KinematicPrior,
        predict_body(state_, dt, MotionModelTag::KinematicPrior, joint_hint, *cfg_));
  }

  std::vector<BodyMeasurement> candidate;
  for (const auto& m : measurements) {
    if (!blacklist_.count(m.id)) candidate.push_back(m);
  }

  auto correction = correct_body(predictions, candidate, *cfg_);
  state_ = correction.state;

  for (const auto& lm : correction.landmarks) {
    if (lm.gated) {
      out.gated_ids.push_back(lm.id);
      if (++consecutive_gated_[lm.id] >= kConsecutiveGateEvict) {
        // Persistently off the rigid body: stop trusting this id entirely.
        state_.ref_landmarks.erase(lm.id);
        blacklist_.insert(lm.id);
        consecutive_gated_.erase(lm.id);
      }
    } else {
      consecutive_gated_[lm.id] = 0;
    }
  }

  // Register landmarks that (re)appeared: they join the reference set at the
  // position the current pose maps them back to.
  if (correction.corrected) {
    for (const auto& m : candidate) {
      if (!state_.ref_landmarks.count(m.id)) {
        state_.ref_landmarks[m.id] = inverse_transform_point(state_.pose, m.pos);
      }
    }
  }

  // Probation: a blacklisted id that stays where the rigid motion says it
  // should for kReadmitStreak consecutive frames rejoins the reference set.
  // Genuine independent movers keep drifting in the body frame and never
  // complete a streak.
  if (correction.corrected) {
    for (const auto& m : measurements) {
      if (!blacklist_.count(m.id)) continue;
      auto [it, fresh] = probation_.try_emplace(m.id);
      Probation& p = it->second;
      const bool consistent =
          !fresh && (m.pos - transform_point(state_.pose, p.ref)).norm() <
                        cfg_->ransac.inlier_threshold;
      if (consistent) {
        ++p.streak;
      } else {
        p.ref = inverse_transform_point(state_.pose, m.pos);
        p.streak = 1;
      }
      if (p.streak >= kReadmitStreak) {
        blacklist_.erase(m.id);
        consecutive_gated_.erase(m.id);
        state_.ref_landmarks[m.id] = inverse_transform_point(state_.pose, m.pos);
        probation_.erase(it);
      }
    }
  }

  // Re-initialize when the reference set has mostly died (occlusion etc.).
  std::size_t present = 0;
  for (const auto& [id, ref] : state_.ref_landmarks) {
    for (const auto& m : measurements) {
      if (m.id == id) {
        ++present;
        break;
      }
    }
  }
  if (!state_.ref_landmarks.empty() &&
      present * 2 < state_.ref_landmarks.size()) {
    anchor_ = compose(anchor_, state_.pose);
    begin_acquisition(t);
    out.tracking = false;
    return out;
  }

  out.tracking = true;
  out.model = correction.chosen;
  out.model_ll = correction.model_log_likelihood;

  const auto [world, world_cov] = world_pose_with_cov(anchor_, state_);
  out.world_pose = world;
  out.world_pose_cov = world_cov;
  return out;
}

BodyEstimator::StepOutput BodyEstimator::step(double t,
                                              std::span<const BodyMeasurement> measurements,
                                              const JointModel* joint_hint) {
  StepOutput out;
  if (started_ && t <= last_t_) {
    throw std::invalid_argument("body step: timestamps must increase");
  }

  if (phase_ == Phase::Acquiring) {
    out.initialized_this_frame = try_initialize(t, measurements);
    if (out.initialized_this_frame) {
      out.tracking = true;
      const auto [world, world_cov] = world_pose_with_cov(anchor_, state_);
      out.world_pose = world;
      out.world_pose_cov = world_cov;
    }
  } else {
    const double dt = started_ ? t - last_t_ : 0.0;
    if (dt > 0.0) {
      out = track(t, measurements, joint_hint);
    }
  }

  started_ = true;
  last_t_ = t;
  return out;
}

}  // namespace handkin
