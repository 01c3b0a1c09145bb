#include "handkin/joint_estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "handkin/gaussian.hpp"

namespace handkin {

namespace {

constexpr double kReferenceDt = 1.0 / 30.0;
constexpr double kJacobianStep = 1e-6;

// Bootstrap thresholds: below these the axis parameters are unobservable and
// spawning a filter would just burn its covariance on noise.
constexpr double kMinTranslationForInit = 5e-3;   // m
constexpr double kMinRotationForInit = 8.7e-3;    // rad (~0.5 deg)
constexpr double kMaxInitAxisPointNorm = 1e3;     // m; degenerate twist guard

// Model-selection constants. The parsimony penalty is charged per state
// dimension and only needs to break near-ties; the evidence floor is the
// per-frame mean log-likelihood below which a hypothesis is considered to
// not explain the motion at all (calibrated on simulated sequences: well
// fitting models sit around +5..+15, broken ones below -10^2).
constexpr double kParsimonyPenalty = 0.05;
constexpr double kDisconnectedFloor = -50.0;

int state_dim(JointType t) {
  switch (t) {
    case JointType::Prismatic: return 4;
    case JointType::Revolute: return 7;
    default: return 0;
  }
}

}  // namespace

const char* joint_type_name(JointType t) {
  switch (t) {
    case JointType::Rigid: return "rigid";
    case JointType::Prismatic: return "prismatic";
    case JointType::Revolute: return "revolute";
    case JointType::Disconnected: return "disconnected";
  }
  return "unknown";
}

Pose6 prismatic_pose(const PrismaticState& s, const Pose6& reference) {
  Eigen::Isometry3d T = exp_map(reference);
  T.translation() += s.q * axis_direction(s.axis);
  return log_map(T);
}

Pose6 revolute_pose(const RevoluteState& s, const Pose6& reference) {
  return log_map(rotation_about_axis(axis_direction(s.axis), s.point, s.q) *
                 exp_map(reference));
}

namespace {

template <typename State>
State advance(const State& s, double dt) {
  State out = s;
  out.q += dt * s.q_dot;
  return out;
}

}  // namespace

PrismaticState predict_joint(const PrismaticState& s, double dt, const PipelineConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("predict_joint: dt must be > 0");
  PrismaticState out = advance(s, dt);
  Mat4 F = Mat4::Identity();
  F(2, 3) = dt;
  out.P = F * s.P * F.transpose() + (dt / kReferenceDt) * cfg.q_pris_mat();
  symmetrize_in_place(out.P);
  return out;
}

RevoluteState predict_joint(const RevoluteState& s, double dt, const PipelineConfig& cfg) {
  if (dt <= 0.0) throw std::invalid_argument("predict_joint: dt must be > 0");
  RevoluteState out = advance(s, dt);
  Mat7 F = Mat7::Identity();
  F(5, 6) = dt;
  out.P = F * s.P * F.transpose() + (dt / kReferenceDt) * cfg.q_rev_mat();
  symmetrize_in_place(out.P);
  return out;
}

namespace {

VecX pris_to_vec(const PrismaticState& s) {
  VecX x(4);
  x << s.axis.phi, s.axis.theta, s.q, s.q_dot;
  return x;
}

PrismaticState pris_from_vec(const VecX& x, const Mat4& P) {
  PrismaticState s;
  s.axis = {x(0), x(1)};
  s.q = x(2);
  s.q_dot = x(3);
  s.P = P;
  return s;
}

VecX rev_to_vec(const RevoluteState& s) {
  VecX x(7);
  x << s.axis.phi, s.axis.theta, s.point.x(), s.point.y(), s.point.z(), s.q, s.q_dot;
  return x;
}

RevoluteState rev_from_vec(const VecX& x, const Mat7& P) {
  RevoluteState s;
  s.axis = {x(0), x(1)};
  s.point = x.segment<3>(2);
  s.q = x(5);
  s.q_dot = x(6);
  s.P = P;
  return s;
}

// Shared EKF machinery over the 6-dim pose residual
//   y(x) = log(h(x)^-1 * T_meas),
// linearized by central differences in both the state and the measurement
// chart (the latter maps meas_cov into residual space).
template <typename State, typename ToVec, typename FromVec, typename PoseFn>
JointCorrection<State> correct_impl(const State& s, const Pose6& measured,
                                    const Mat6& meas_cov, ToVec to_vec, FromVec from_vec,
                                    PoseFn pose_fn) {
  JointCorrection<State> out{s, std::nullopt, false};

  const Eigen::Isometry3d T_meas = exp_map(measured);
  const VecX x0 = to_vec(s);

  auto residual_of_state = [&](const VecX& x) -> VecX {
    return log_map(exp_map(pose_fn(x)).inverse() * T_meas).vec();
  };

  const LogMapResult rel = log_map_full(exp_map(pose_fn(x0)).inverse() * T_meas);
  if (rel.near_branch_cut) {
    out.skipped_branch_cut = true;
    return out;
  }
  const VecX nu = rel.pose.vec();

  const MatX H = numeric_jacobian(residual_of_state, x0, kJacobianStep);

  // Measurement chart -> residual chart.
  const Eigen::Isometry3d T_pred_inv = exp_map(pose_fn(x0)).inverse();
  auto residual_of_meas = [&](const VecX& p) -> VecX {
    return log_map(T_pred_inv * exp_map(Pose6::from_vec(p))).vec();
  };
  const MatX J = numeric_jacobian(residual_of_meas, measured.vec(), kJacobianStep);

  MatX R_chart = J * meas_cov * J.transpose();
  symmetrize_in_place(R_chart);
  MatX S = H * s.P * H.transpose() + R_chart;
  symmetrize_in_place(S);

  // Score the fit against the measurement noise alone, the same yardstick the
  // rigid candidate uses. Folding each model's own state uncertainty into the
  // score would hand sharp-but-wrong predictions a log-det discount over
  // vague-but-right ones, and the ranking would flip with the overall
  // covariance scale.
  out.log_likelihood = gaussian_log_likelihood(nu, R_chart);

  const MatX K = s.P * H.transpose() * S.llt().solve(MatX::Identity(6, 6));
  const VecX x1 = x0 - K * nu;
  MatX IKH = MatX::Identity(x0.size(), x0.size()) - K * H;
  MatX P1 = IKH * s.P * IKH.transpose() +
            K * (J * meas_cov * J.transpose()) * K.transpose();
  symmetrize_in_place(P1);

  out.state = from_vec(x1, P1);
  return out;
}

}  // namespace

JointCorrection<PrismaticState> correct_joint(const PrismaticState& s, const Pose6& measured,
                                              const Mat6& meas_cov, const Pose6& reference,
                                              const PipelineConfig& cfg) {
  (void)cfg;
  auto res = correct_impl(
      s, measured, meas_cov, pris_to_vec,
      [](const VecX& x, const MatX& P) { return pris_from_vec(x, Mat4(P)); },
      [&](const VecX& x) { return prismatic_pose(pris_from_vec(x, Mat4::Identity()), reference); });
  res.state.axis = axis_normalized(res.state.axis);
  return res;
}

JointCorrection<RevoluteState> correct_joint(const RevoluteState& s, const Pose6& measured,
                                             const Mat6& meas_cov, const Pose6& reference,
                                             const PipelineConfig& cfg) {
  (void)cfg;
  auto res = correct_impl(
      s, measured, meas_cov, rev_to_vec,
      [](const VecX& x, const MatX& P) { return rev_from_vec(x, Mat7(P)); },
      [&](const VecX& x) { return revolute_pose(rev_from_vec(x, Mat7::Identity()), reference); });
  res.state.axis = axis_normalized(res.state.axis);
  // Gauge fix: the axis point is only defined up to sliding along the axis;
  // pin it to the point closest to the reference-pose origin.
  const Vec3 d = axis_direction(res.state.axis);
  res.state.point -= d.dot(res.state.point) * d;
  return res;
}

std::optional<Vec3> JointModel::axis_direction() const {
  if (const auto* p = std::get_if<PrismaticState>(&params)) {
    return canonical_direction(handkin::axis_direction(p->axis));
  }
  if (const auto* r = std::get_if<RevoluteState>(&params)) {
    return canonical_direction(handkin::axis_direction(r->axis));
  }
  return std::nullopt;
}

std::optional<Vec3> JointModel::axis_point() const {
  if (const auto* r = std::get_if<RevoluteState>(&params)) return r->point;
  return std::nullopt;
}

namespace {

// q is reported in the canonical-direction convention; flip with the axis.
double sign_for_canonical(const Vec3& raw_dir) {
  const Vec3 canon = canonical_direction(raw_dir);
  return canon.dot(raw_dir) < 0.0 ? -1.0 : 1.0;
}

}  // namespace

double JointModel::q() const {
  if (const auto* p = std::get_if<PrismaticState>(&params)) {
    return sign_for_canonical(handkin::axis_direction(p->axis)) * p->q;
  }
  if (const auto* r = std::get_if<RevoluteState>(&params)) {
    return sign_for_canonical(handkin::axis_direction(r->axis)) * r->q;
  }
  return 0.0;
}

double JointModel::q_dot() const {
  if (const auto* p = std::get_if<PrismaticState>(&params)) {
    return sign_for_canonical(handkin::axis_direction(p->axis)) * p->q_dot;
  }
  if (const auto* r = std::get_if<RevoluteState>(&params)) {
    return sign_for_canonical(handkin::axis_direction(r->axis)) * r->q_dot;
  }
  return 0.0;
}

std::optional<std::pair<Pose6, Velocity6>> joint_prediction_for_body(
    const JointModel& model, const Pose6& reference, double dt) {
  if (model.type == JointType::Disconnected) return std::nullopt;
  if (model.type == JointType::Rigid) {
    return std::make_pair(reference, Velocity6{});
  }
  if (const auto* p = std::get_if<PrismaticState>(&model.params)) {
    const PrismaticState adv = advance(*p, dt);
    const Vec3 d = axis_direction(adv.axis);
    Velocity6 vel;
    vel.linear = adv.q_dot * d;
    return std::make_pair(prismatic_pose(adv, reference), vel);
  }
  const auto* r = std::get_if<RevoluteState>(&model.params);
  if (!r) return std::nullopt;
  const RevoluteState adv = advance(*r, dt);
  const Vec3 d = axis_direction(adv.axis);
  Velocity6 vel;
  vel.angular = adv.q_dot * d;
  vel.linear = adv.q_dot * r->point.cross(d);  // spatial twist of the screw
  return std::make_pair(revolute_pose(adv, reference), vel);
}

JointModel select_model(const ModelEvidence& evidence, const Vec3& body_anchor,
                        const PipelineConfig& cfg) {
  struct Candidate {
    JointType type;
    double mean_ll;
  };
  std::vector<Candidate> candidates;
  if (evidence.rigid_mean_ll) candidates.push_back({JointType::Rigid, *evidence.rigid_mean_ll});
  if (evidence.prismatic_mean_ll && evidence.prismatic) {
    candidates.push_back({JointType::Prismatic, *evidence.prismatic_mean_ll});
  }
  if (evidence.revolute_mean_ll && evidence.revolute) {
    candidates.push_back({JointType::Revolute, *evidence.revolute_mean_ll});
  }

  JointModel out;
  if (candidates.empty()) {
    out.type = JointType::Disconnected;
    return out;
  }

  // Candidates are ordered simple->complex, and strict inequality on the
  // penalized score means ties go to the simpler model.
  const Candidate* best = &candidates.front();
  auto score = [](const Candidate& c) {
    return c.mean_ll - kParsimonyPenalty * state_dim(c.type);
  };
  for (const auto& c : candidates) {
    if (score(c) > score(*best)) best = &c;
  }

  if (best->mean_ll < kDisconnectedFloor) {
    out.type = JointType::Disconnected;
    return out;
  }

  JointType chosen = best->type;
  if (chosen == JointType::Revolute) {
    const Vec3 d = axis_direction(evidence.revolute->axis);
    const Vec3 rel = body_anchor - evidence.revolute->point;
    const double radius = (rel - rel.dot(d) * d).norm();
    if (radius > cfg.model_select.revolute_radius_cap) {
      // A hinge this far away is indistinguishable from sliding; report the
      // prismatic hypothesis if it exists, otherwise stay revolute-as-fitted.
      if (evidence.prismatic && evidence.prismatic_mean_ll) {
        chosen = JointType::Prismatic;
      }
    }
  }

  out.type = chosen;
  if (chosen == JointType::Prismatic) {
    out.params = *evidence.prismatic;
    out.log_likelihood_window = *evidence.prismatic_mean_ll;
  } else if (chosen == JointType::Revolute) {
    out.params = *evidence.revolute;
    out.log_likelihood_window = *evidence.revolute_mean_ll;
  } else {
    out.log_likelihood_window = *evidence.rigid_mean_ll;
  }
  return out;
}

JointEstimator::JointEstimator(const PipelineConfig* cfg, const Vec3& body_anchor)
    : cfg_(cfg), body_anchor_(body_anchor) {}

double JointEstimator::window_mean(const std::deque<double>& w) const {
  double sum = 0.0;
  for (double v : w) sum += v;
  return sum / static_cast<double>(w.size());
}

void JointEstimator::push_window(std::deque<double>& w, double v) {
  w.push_back(v);
  const auto cap = static_cast<std::size_t>(cfg_->model_select.window);
  while (w.size() > cap) w.pop_front();
}

JointEstimator::StepResult JointEstimator::step(double t, const Pose6& measured_pose,
                                                const Mat6& pose_cov) {
  StepResult result;
  const double dt = started_ ? t - last_t_ : 0.0;
  if (started_ && dt <= 0.0) {
    throw std::invalid_argument("joint step: timestamps must increase");
  }
  started_ = true;
  last_t_ = t;

  // Rigid hypothesis: the body never left the reference pose, so the residual
  // is the measured pose itself and its covariance is the measurement's.
  result.rigid_ll = gaussian_log_likelihood(measured_pose.vec(), pose_cov);
  push_window(rigid_window_, *result.rigid_ll);

  const Eigen::Isometry3d T_rel = exp_map(measured_pose);

  if (!pris_ && T_rel.translation().norm() >= kMinTranslationForInit) {
    PrismaticState s;
    const Vec3 tr = T_rel.translation();
    s.axis = axis_from_direction(tr.normalized());
    s.q = tr.norm();
    s.P = cfg_->p0_pris_mat();
    pris_ = s;  // initialized from this measurement; first correction next frame
  } else if (pris_ && dt > 0.0) {
    auto corrected = correct_joint(predict_joint(*pris_, dt, *cfg_), measured_pose,
                                   pose_cov, reference_, *cfg_);
    *pris_ = corrected.state;
    result.prismatic_ll = corrected.log_likelihood;
    result.branch_cut_skip |= corrected.skipped_branch_cut;
    if (corrected.log_likelihood) push_window(pris_window_, *corrected.log_likelihood);
  }

  const double rot_angle = measured_pose.angular.norm();
  if (!rev_ && rot_angle >= kMinRotationForInit) {
    const Vec3 w = measured_pose.angular;
    const Vec3 v = measured_pose.linear;
    const Vec3 point = w.cross(v) / (rot_angle * rot_angle);
    if (point.norm() < kMaxInitAxisPointNorm) {
      RevoluteState s;
      s.axis = axis_from_direction(w / rot_angle);
      s.point = point;
      s.q = rot_angle;
      s.P = cfg_->p0_rev_mat();
      rev_ = s;
    }
  } else if (rev_ && dt > 0.0) {
    auto corrected = correct_joint(predict_joint(*rev_, dt, *cfg_), measured_pose,
                                   pose_cov, reference_, *cfg_);
    *rev_ = corrected.state;
    result.revolute_ll = corrected.log_likelihood;
    result.branch_cut_skip |= corrected.skipped_branch_cut;
    if (corrected.log_likelihood) push_window(rev_window_, *corrected.log_likelihood);
  }

  ModelEvidence evidence;
  evidence.rigid_mean_ll = window_mean(rigid_window_);
  if (pris_ && !pris_window_.empty()) {
    evidence.prismatic_mean_ll = window_mean(pris_window_);
    evidence.prismatic = &*pris_;
  }
  if (rev_ && !rev_window_.empty()) {
    evidence.revolute_mean_ll = window_mean(rev_window_);
    evidence.revolute = &*rev_;
  }
  current_ = select_model(evidence, body_anchor_, *cfg_);
  result.selected = current_;
  return result;
}

std::optional<std::pair<Pose6, Velocity6>> JointEstimator::prediction_for_body(
    double dt) const {
  return joint_prediction_for_body(current_, reference_, dt);
}

}  // namespace handkin
