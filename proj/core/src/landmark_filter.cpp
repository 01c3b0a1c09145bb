#include "handkin/landmark_filter.hpp"

#include <stdexcept>

namespace handkin {

namespace {

constexpr double kReferenceDt = 1.0 / 30.0;

Eigen::Matrix<double, 3, 6> position_measurement_matrix() {
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.topLeftCorner<3, 3>() = Mat3::Identity();
  return H;
}

}  // namespace

LandmarkClass landmark_class_of(int id) {
  if (id < 0 || id >= kNumLandmarkIds) {
    throw std::out_of_range("landmark id " + std::to_string(id) + " outside [0, 20]");
  }
  if (id == 0) return LandmarkClass::Wrist;
  if (id <= 4) return LandmarkClass::Thumb;  // CMC, MCP, IP, tip
  switch ((id - 5) % 4) {
    case 0: return LandmarkClass::Mcp;
    case 1: return LandmarkClass::Pip;
    case 2: return LandmarkClass::Dip;
    default: return LandmarkClass::Tip;
  }
}

double saliency_score(LandmarkClass cls, const PipelineConfig::Saliency& s) {
  switch (cls) {
    case LandmarkClass::Thumb: return s.thumb;
    case LandmarkClass::Mcp: return s.mcp;
    case LandmarkClass::Pip: return s.pip;
    case LandmarkClass::Dip: return s.dip;
    case LandmarkClass::Tip: return s.tip;
    case LandmarkClass::Wrist: break;
  }
  throw std::invalid_argument("wrist has no saliency score");
}

IngestOutcome ingest(const LandmarkObservation& obs, const PipelineConfig& cfg) {
  if (landmark_class_of(obs.id) == LandmarkClass::Wrist) {
    return IngestOutcome::RejectedExcludedClass;
  }
  if (obs.vis < cfg.vis_thresh) return IngestOutcome::RejectedLowVisibility;
  return IngestOutcome::Accepted;
}

LandmarkFilterState spawn_filter(const LandmarkObservation& obs, const PipelineConfig& cfg) {
  LandmarkFilterState s;
  s.id = obs.id;
  s.cls = landmark_class_of(obs.id);
  s.x.head<3>() = obs.pos;
  s.P = cfg.p0_lm_mat();
  return s;
}

LandmarkFilterState predict(const LandmarkFilterState& s, double dt,
                            const PipelineConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("predict: dt must be > 0");
  LandmarkFilterState out = s;
  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>() = dt * Mat3::Identity();
  out.x = F * s.x;
  out.P = F * s.P * F.transpose() + (dt / kReferenceDt) * cfg.q_lm_mat();
  symmetrize_in_place(out.P);
  return out;
}

CorrectionResult correct(const LandmarkFilterState& s, const LandmarkObservation& obs,
                         const PipelineConfig& cfg) {
  const auto H = position_measurement_matrix();
  const Mat3 S = H * s.P * H.transpose() + cfg.r_lm_mat();
  const double m = mahalanobis(obs.pos, s.position(), S);

  CorrectionResult res;
  res.mahalanobis = m;
  res.state = s;
  if (m >= cfg.maha_lm_thresh) {
    res.outcome = CorrectionOutcome::GatedOutlier;
    res.state.missed_updates += 1;
    return res;
  }

  const Eigen::Matrix<double, 6, 3> K =
      s.P * H.transpose() * S.llt().solve(Mat3::Identity());
  res.state.x = s.x + K * (obs.pos - s.position());
  // Joseph form: keeps P PSD even with an aggressive gain.
  const Mat6 IKH = Mat6::Identity() - K * H;
  res.state.P = IKH * s.P * IKH.transpose() + K * cfg.r_lm_mat() * K.transpose();
  symmetrize_in_place(res.state.P);
  res.state.missed_updates = 0;
  res.outcome = CorrectionOutcome::Corrected;
  return res;
}

LandmarkFilterState check_lost(const LandmarkFilterState& s, const PipelineConfig& cfg) {
  LandmarkFilterState out = s;
  if (out.position_cov().trace() >= cfg.landmark_unc_thresh) {
    out.status = LandmarkStatus::Lost;
  }
  return out;
}

Mat3 adjusted_covariance(const LandmarkFilterState& s, const PipelineConfig& cfg) {
  return saliency_score(s.cls, cfg.saliency) * s.position_cov();
}

LandmarkFilterBank::FrameStats LandmarkFilterBank::step(
    double t, std::span<const LandmarkObservation> observations) {
  FrameStats stats;

  if (started_) {
    const double dt = t - last_t_;
    if (dt <= 0.0) throw std::invalid_argument("bank step: timestamps must increase");
    for (auto& [id, f] : filters_) {
      f = predict(f, dt, *cfg_);
    }
  }
  started_ = true;
  last_t_ = t;

  for (const auto& obs : observations) {
    switch (ingest(obs, *cfg_)) {
      case IngestOutcome::RejectedLowVisibility:
        ++stats.rejected_low_vis;
        continue;
      case IngestOutcome::RejectedExcludedClass:
        ++stats.rejected_class;
        continue;
      case IngestOutcome::Accepted:
        ++stats.accepted;
        break;
    }
    auto it = filters_.find(obs.id);
    if (it == filters_.end()) {
      filters_.emplace(obs.id, spawn_filter(obs, *cfg_));
      ++stats.spawned;
      continue;
    }
    auto res = correct(it->second, obs, *cfg_);
    it->second = res.state;
    res.outcome == CorrectionOutcome::Corrected ? ++stats.corrected : ++stats.gated;
  }

  for (auto it = filters_.begin(); it != filters_.end();) {
    const auto checked = check_lost(it->second, *cfg_);
    if (checked.status == LandmarkStatus::Lost) {
      ++stats.lost;
      it = filters_.erase(it);  // id may respawn on a later observation
    } else {
      it->second = checked;
      ++it;
    }
  }
  return stats;
}

std::vector<BodyMeasurement> LandmarkFilterBank::measurements(bool saliency_scaling) const {
  std::vector<BodyMeasurement> out;
  out.reserve(filters_.size());
  for (const auto& [id, f] : filters_) {
    BodyMeasurement m;
    m.id = id;
    m.pos = f.position();
    m.cov = saliency_scaling ? adjusted_covariance(f, *cfg_) : Mat3(f.position_cov());
    out.push_back(m);
  }
  return out;
}

}  // namespace handkin
