#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "handkin/body_estimator.hpp"
#include "handkin/random.hpp"
#include "handkin/simulator.hpp"

using namespace handkin;

namespace {

// A well-conditioned 10-point cloud.
std::vector<Vec3> test_cloud(Rng& rng, int n = 10) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.push_back(rng.gaussian3(0.25));
  return pts;
}

Eigen::Isometry3d random_transform(Rng& rng, double angle, double trans) {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = Eigen::AngleAxisd(angle, rng.unit_vector()).toRotationMatrix();
  T.translation() = trans * rng.unit_vector();
  return T;
}

std::vector<TrackSample> tracks_for(const std::vector<Vec3>& pts,
                                    const Eigen::Isometry3d& T, double cov_scale = 1e-4) {
  std::vector<TrackSample> tracks;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    tracks.push_back({static_cast<int>(i + 1), pts[i], T * pts[i],
                      cov_scale * Mat3::Identity()});
  }
  return tracks;
}

}  // namespace

TEST_CASE("RANSAC recovers a noiseless rigid motion to 1e-8 with all inliers") {
  Rng rng(41);
  PipelineConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = test_cloud(rng);
    const auto T = random_transform(rng, rng.uniform(0.2, 1.8), 0.4);
    const auto init = init_ransac(tracks_for(pts, T), cfg, 7 + trial);
    REQUIRE(init.outcome == RansacOutcome::Success);
    CHECK(init.inlier_ids.size() == pts.size());
    CHECK(init.outlier_ids.empty());
    CHECK((exp_map(init.state.pose).matrix() - T.matrix()).cwiseAbs().maxCoeff() < 1e-8);
    // Reference geometry is the start configuration.
    CHECK(init.state.ref_landmarks.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK((init.state.ref_landmarks.at(static_cast<int>(i + 1)) - pts[i]).norm() < 1e-12);
    }
  }
}

TEST_CASE("RANSAC flags independently moving tracks as outliers") {
  Rng rng(42);
  PipelineConfig cfg;
  const auto pts = test_cloud(rng);
  const auto T = random_transform(rng, 0.7, 0.3);
  auto tracks = tracks_for(pts, T);
  // Two tracks wander off on their own.
  tracks[3].end += Vec3(0.15, -0.08, 0.12);
  tracks[7].end += Vec3(-0.1, 0.2, 0.05);

  const auto init = init_ransac(tracks, cfg, 99);
  REQUIRE(init.outcome == RansacOutcome::Success);
  CHECK(init.outlier_ids == std::vector<int>{4, 8});
  CHECK(init.inlier_ids.size() == 8);
  CHECK((exp_map(init.state.pose).matrix() - T.matrix()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("RANSAC on static tracks yields the identity with zero velocity") {
  Rng rng(43);
  PipelineConfig cfg;
  const auto pts = test_cloud(rng);
  const auto init = init_ransac(tracks_for(pts, Eigen::Isometry3d::Identity()), cfg, 3);
  REQUIRE(init.outcome == RansacOutcome::Success);
  CHECK(init.state.pose.vec().cwiseAbs().maxCoeff() < 1e-10);
  CHECK(init.state.velocity.vec().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("RANSAC needs at least three tracks and a consensus") {
  PipelineConfig cfg;
  Rng rng(44);
  const auto pts = test_cloud(rng, 2);
  CHECK(init_ransac(tracks_for(pts, Eigen::Isometry3d::Identity()), cfg, 1).outcome ==
        RansacOutcome::InsufficientData);

  // Every track moves its own way: no rigid consensus of min_inliers size.
  std::vector<TrackSample> chaos;
  for (int i = 0; i < 8; ++i) {
    const Vec3 start = rng.gaussian3(0.3);
    chaos.push_back({i + 1, start, start + rng.gaussian3(0.3), 1e-4 * Mat3::Identity()});
  }
  CHECK(init_ransac(chaos, cfg, 1).outcome == RansacOutcome::NoConsensus);
}

TEST_CASE("RANSAC weighting survives a high-variance poisoned track") {
  Rng rng(45);
  PipelineConfig cfg;
  const auto pts = test_cloud(rng);
  const auto T = random_transform(rng, 0.9, 0.25);
  auto tracks = tracks_for(pts, T);
  // A corrupted correspondence that announces its own unreliability: the
  // sampler should practically never build a hypothesis from it.
  tracks[0].end += Vec3(0.4, 0.4, -0.3);
  tracks[0].cov = 0.09 * Mat3::Identity();

  const auto init = init_ransac(tracks, cfg, 5);
  REQUIRE(init.outcome == RansacOutcome::Success);
  CHECK((exp_map(init.state.pose).matrix() - T.matrix()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::find(init.outlier_ids.begin(), init.outlier_ids.end(), 1) !=
        init.outlier_ids.end());
}

TEST_CASE("predict_body: Static keeps the mean, ConstantVelocity integrates the twist") {
  PipelineConfig cfg;
  BodyState s;
  s.pose = Pose6(Vec3(0.1, 0.0, 0.0), Vec3::Zero());
  s.velocity = Velocity6::from_vec((Vec6() << 0.1, 0, 0, 0, 0, 0).finished());
  s.P = cfg.p0_rb_mat();

  const auto stat = predict_body(s, 0.5, MotionModelTag::Static, nullptr, cfg);
  CHECK((stat.pose.vec() - s.pose.vec()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((stat.velocity.vec() - s.velocity.vec()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(stat.P.trace() > s.P.trace());

  const auto cv = predict_body(s, 1.0, MotionModelTag::ConstantVelocity, nullptr, cfg);
  CHECK((cv.pose.linear - Vec3(0.2, 0.0, 0.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cv.pose.angular.cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(predict_body(s, 0.1, MotionModelTag::KinematicPrior, nullptr, cfg),
                  std::invalid_argument);
}

TEST_CASE("predict_body: KinematicPrior follows the joint's circle") {
  PipelineConfig cfg;
  // A revolute hint: axis z through (0.5, 0, 0), q = 30 deg, q_dot = 1 rad/s.
  RevoluteState rs;
  rs.axis = axis_from_direction(Vec3::UnitZ());
  rs.point = Vec3(0.5, 0.0, 0.0);
  rs.q = std::numbers::pi / 6;
  rs.q_dot = 1.0;
  JointModel hint;
  hint.type = JointType::Revolute;
  hint.params = rs;

  BodyState s;
  s.P = cfg.p0_rb_mat();
  const double dt = 0.25;
  const auto pred = predict_body(s, dt, MotionModelTag::KinematicPrior, &hint, cfg);

  // The predicted pose must equal the joint pose at q + dt*q_dot.
  RevoluteState advanced = rs;
  advanced.q += dt * rs.q_dot;
  const Pose6 expect = revolute_pose(advanced, Pose6{});
  CHECK((pred.pose.vec() - expect.vec()).cwiseAbs().maxCoeff() < 1e-9);

  // Landmarks riding that pose stay at constant distance from the axis.
  const Vec3 lm(0.3, 0.2, 0.1);
  const auto radius = [&](const Pose6& p) {
    const Vec3 moved = transform_point(p, lm);
    const Vec3 rel = moved - rs.point;
    return (rel - Vec3::UnitZ().dot(rel) * Vec3::UnitZ()).norm();
  };
  CHECK(radius(pred.pose) == doctest::Approx(radius(s.pose)).epsilon(1e-9));
}

TEST_CASE("correct_body: zero innovation picks Static and fixes the mean") {
  PipelineConfig cfg;
  Rng rng(46);
  BodyState s;
  s.P = cfg.p0_rb_mat();
  std::vector<BodyMeasurement> meas;
  for (int i = 0; i < 6; ++i) {
    const Vec3 p = rng.gaussian3(0.2);
    s.ref_landmarks[i + 1] = p;
    meas.push_back({i + 1, p, 1e-4 * Mat3::Identity()});
  }

  std::vector<std::pair<MotionModelTag, BodyState>> preds = {
      {MotionModelTag::Static, s}};
  const auto corr = correct_body(preds, meas, cfg);
  CHECK(corr.corrected);
  CHECK(corr.chosen == MotionModelTag::Static);
  CHECK(corr.state.pose.vec().cwiseAbs().maxCoeff() < 1e-9);
  for (const auto& lm : corr.landmarks) CHECK_FALSE(lm.gated);
  CHECK(is_psd(corr.state.P));
}

TEST_CASE("correct_body: model choice prefers the prediction that explains the frame") {
  PipelineConfig cfg;
  Rng rng(47);
  BodyState at_rest;
  at_rest.P = cfg.p0_rb_mat();
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    pts.push_back(rng.gaussian3(0.2));
    at_rest.ref_landmarks[i + 1] = pts[i];
  }

  // The body actually moved: measurements at a displaced pose.
  const Pose6 moved(Vec3(0.05, 0.02, 0.0), Vec3(0.0, 0.0, 0.1));
  std::vector<BodyMeasurement> meas;
  for (int i = 0; i < 8; ++i) {
    meas.push_back({i + 1, transform_point(moved, pts[i]), 1e-4 * Mat3::Identity()});
  }

  BodyState at_moved = at_rest;
  at_moved.pose = moved;

  std::vector<std::pair<MotionModelTag, BodyState>> preds = {
      {MotionModelTag::Static, at_rest}, {MotionModelTag::ConstantVelocity, at_moved}};
  const auto corr = correct_body(preds, meas, cfg);
  CHECK(corr.chosen == MotionModelTag::ConstantVelocity);
  REQUIRE(corr.model_log_likelihood[0].has_value());
  REQUIRE(corr.model_log_likelihood[1].has_value());
  CHECK(*corr.model_log_likelihood[1] > *corr.model_log_likelihood[0]);

  // Scale invariance of the choice: inflating every measurement covariance by
  // a common factor must not change the ranking.
  auto scaled = meas;
  for (auto& m : scaled) m.cov *= 50.0;
  const auto corr2 = correct_body(preds, scaled, cfg);
  CHECK(corr2.chosen == corr.chosen);
}

TEST_CASE("correct_body: fewer than three usable measurements skips the update") {
  PipelineConfig cfg;
  BodyState s;
  s.P = cfg.p0_rb_mat();
  s.ref_landmarks[1] = Vec3(0.1, 0, 0);
  s.ref_landmarks[2] = Vec3(0, 0.1, 0);

  std::vector<BodyMeasurement> meas = {{1, Vec3(0.1, 0, 0), 1e-4 * Mat3::Identity()},
                                       {2, Vec3(0, 0.1, 0), 1e-4 * Mat3::Identity()},
                                       {9, Vec3(0.5, 0.5, 0.5), 1e-4 * Mat3::Identity()}};
  std::vector<std::pair<MotionModelTag, BodyState>> preds = {{MotionModelTag::Static, s}};
  const auto corr = correct_body(preds, meas, cfg);
  CHECK_FALSE(corr.corrected);  // id 9 has no reference; only 2 usable
  CHECK((corr.state.x() - s.x()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correct_body: an off-body measurement is gated, not absorbed") {
  PipelineConfig cfg;
  Rng rng(48);
  BodyState s;
  s.P = cfg.p0_rb_mat();
  std::vector<BodyMeasurement> meas;
  for (int i = 0; i < 8; ++i) {
    const Vec3 p = rng.gaussian3(0.2);
    s.ref_landmarks[i + 1] = p;
    meas.push_back({i + 1, p, 1e-4 * Mat3::Identity()});
  }
  meas[4].pos += Vec3(0.25, -0.2, 0.15);  // far off the rigid prediction

  std::vector<std::pair<MotionModelTag, BodyState>> preds = {{MotionModelTag::Static, s}};
  const auto corr = correct_body(preds, meas, cfg);
  CHECK(corr.corrected);
  int gated = 0;
  for (const auto& lm : corr.landmarks) {
    if (lm.gated) {
      ++gated;
      CHECK(lm.id == meas[4].id);
    }
  }
  CHECK(gated == 1);
  // The survivors keep the pose pinned at identity.
  CHECK(corr.state.pose.vec().cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("body estimator tracks a simulated rigid motion with sane covariances") {
  PipelineConfig cfg;
  Scenario sc = default_scenario(JointType::Prismatic, 123);
  sc.duration = 4.0;
  sc.outlier_rate = 0.0;
  sc.dropout_rate = 0.0;
  const auto sim = generate(sc);

  LandmarkFilterBank bank(&cfg);
  BodyEstimator body(&cfg, 9);
  bool ever_tracked = false;
  for (const auto& frame : sim.frames) {
    bank.step(frame.t, frame.landmarks);
    const auto meas = bank.measurements();
    const auto out = body.step(frame.t, meas, nullptr);
    if (out.tracking) {
      ever_tracked = true;
      CHECK(is_symmetric(body.state().P, 1e-9));
      CHECK(is_psd(body.state().P, 1e-6));
      REQUIRE(out.world_pose.has_value());
      REQUIRE(out.world_pose_cov.has_value());
      CHECK(is_psd(*out.world_pose_cov, 1e-6));
    }
  }
  CHECK(ever_tracked);
  CHECK(body.flagged_outliers().empty());

  // The final pose should place the reference landmarks near the final clean
  // configuration: compare against ground truth within a few centimeters.
  const Pose6 truth_final = sim.truth.back().pose;
  const Pose6 est_final = body.state().pose;  // anchor is identity here
  CHECK((est_final.vec() - truth_final.vec()).norm() < 0.05);

  // Timestamps must strictly increase.
  CHECK_THROWS_AS(body.step(0.0, std::vector<BodyMeasurement>{}, nullptr),
                  std::invalid_argument);
}

TEST_CASE("body estimator evicts persistent movers and reports them") {
  PipelineConfig cfg;
  Scenario sc = default_scenario(JointType::Prismatic, 321);
  sc.independent_movers = {6, 15};
  const auto sim = generate(sc);

  LandmarkFilterBank bank(&cfg);
  BodyEstimator body(&cfg, 17);
  JointEstimator joints(&cfg, Vec3::Zero());
  for (const auto& frame : sim.frames) {
    bank.step(frame.t, frame.landmarks);
    body.step(frame.t, bank.measurements(), nullptr);
  }
  CHECK(body.flagged_outliers() == std::set<int>{6, 15});
}
