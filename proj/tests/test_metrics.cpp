#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "handkin/metrics.hpp"
#include "handkin/random.hpp"

using namespace handkin;

namespace {

constexpr double kPi = std::numbers::pi;

GroundTruthJoint prismatic_gt(const Vec3& dir, double q_max,
                              const Vec3& grasp = Vec3::Zero()) {
  GroundTruthJoint j;
  j.type = JointType::Prismatic;
  j.axis_direction = dir.normalized();
  j.q_max = q_max;
  j.grasp_point = grasp;
  return j;
}

GroundTruthJoint revolute_gt(const Vec3& dir, const Vec3& point, double q_max,
                             const Vec3& grasp) {
  GroundTruthJoint j;
  j.type = JointType::Revolute;
  j.axis_direction = dir.normalized();
  j.axis_point = point;
  j.q_max = q_max;
  j.grasp_point = grasp;
  return j;
}

}  // namespace

TEST_CASE("articulated_point moves on the joint's orbit") {
  const Vec3 grasp(0.4, 0.1, -0.2);

  const auto pj = prismatic_gt(Vec3(1, 1, 0), 0.3, grasp);
  CHECK((articulated_point(pj, 0.0, grasp) - grasp).cwiseAbs().maxCoeff() < 1e-12);
  const Vec3 moved = articulated_point(pj, 0.2, grasp);
  CHECK((moved - (grasp + 0.2 * pj.axis_direction)).cwiseAbs().maxCoeff() < 1e-12);

  const auto rj = revolute_gt(Vec3::UnitZ(), Vec3(0.1, 0.1, 0.0), kPi / 2, grasp);
  CHECK((articulated_point(rj, 0.0, grasp) - grasp).cwiseAbs().maxCoeff() < 1e-12);
  // Distance to the axis is invariant along the whole orbit.
  const auto radius = [&](const Vec3& p) {
    const Vec3 rel = p - rj.axis_point;
    return (rel - rj.axis_direction.dot(rel) * rj.axis_direction).norm();
  };
  const double r0 = radius(grasp);
  for (double q : {0.1, 0.7, 1.3}) {
    CHECK(radius(articulated_point(rj, q, grasp)) == doctest::Approx(r0).epsilon(1e-12));
  }
}

TEST_CASE("tangent_at matches a finite-difference derivative of the orbit") {
  const Vec3 grasp(0.3, -0.2, 0.15);
  const auto rj = revolute_gt(Vec3(0.2, 0.5, 1.0), Vec3(-0.1, 0.0, 0.2), kPi / 2, grasp);
  const auto pj = prismatic_gt(Vec3(0.5, -1.0, 0.25), 0.4, grasp);

  const double h = 1e-6;
  for (double q : {0.05, 0.4, 1.1}) {
    for (const auto& j : {rj, pj}) {
      const Vec3 fd = (articulated_point(j, q + h, grasp) -
                       articulated_point(j, q - h, grasp)) /
                      (2.0 * h);
      const Vec3 tangent = tangent_at(j, q, grasp);
      CHECK(tangent.norm() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK((tangent - fd.normalized()).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("tangent_at rejects a grasp point on the revolute axis") {
  const Vec3 on_axis(0.1, 0.1, 0.5);
  const auto rj = revolute_gt(Vec3::UnitZ(), Vec3(0.1, 0.1, 0.0), kPi / 2, on_axis);
  CHECK_THROWS_AS(tangent_at(rj, 0.3, on_axis), std::domain_error);
}

TEST_CASE("tangent_error_deg reports exact angles for prismatic pairs") {
  const Vec3 grasp(0.2, 0.0, 0.0);
  const auto gt = prismatic_gt(Vec3::UnitX(), 0.3, grasp);

  CHECK(tangent_error_deg(prismatic_gt(Vec3::UnitX(), 0.3, grasp), gt) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tangent_error_deg(prismatic_gt(Vec3::UnitY(), 0.3, grasp), gt) ==
        doctest::Approx(90.0).epsilon(1e-9));
  // Sign of the axis is a gauge: antiparallel scores zero, not 180.
  CHECK(tangent_error_deg(prismatic_gt(-Vec3::UnitX(), 0.3, grasp), gt) ==
        doctest::Approx(0.0).epsilon(1e-9));

  const Vec3 tilted = (std::cos(5.0 * kPi / 180.0) * Vec3::UnitX() +
                       std::sin(5.0 * kPi / 180.0) * Vec3::UnitY());
  CHECK(tangent_error_deg(prismatic_gt(tilted, 0.3, grasp), gt) ==
        doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("tangent_error_deg averages along a revolute orbit and converges") {
  const Vec3 grasp(0.5, 0.0, 0.0);
  const auto gt = revolute_gt(Vec3::UnitZ(), Vec3::Zero(), kPi / 2, grasp);

  // Same circle, same tangents: zero error.
  CHECK(tangent_error_deg(gt, gt) == doctest::Approx(0.0).epsilon(1e-12));

  // Tilting the estimated axis by 5 degrees produces a small mean error of
  // the same order; the quadrature must already be converged at the default
  // node count.
  const Vec3 tilt_dir = (std::cos(5.0 * kPi / 180.0) * Vec3::UnitZ() +
                         std::sin(5.0 * kPi / 180.0) * Vec3::UnitX());
  const auto est = revolute_gt(tilt_dir, Vec3::Zero(), kPi / 2, grasp);
  const double coarse = tangent_error_deg(est, gt, 100);
  const double fine = tangent_error_deg(est, gt, 2000);
  CHECK(coarse > 0.5);
  CHECK(coarse < 10.0);
  CHECK(std::abs(coarse - fine) < 0.01);

  // A JointModel estimate goes through the same scoring path.
  RevoluteState rs;
  rs.axis = axis_from_direction(Vec3::UnitZ());
  rs.point = Vec3::Zero();
  JointModel m;
  m.type = JointType::Revolute;
  m.params = rs;
  CHECK(tangent_error_deg(m, gt) == doctest::Approx(0.0).epsilon(1e-9));

  JointModel rigid;
  rigid.type = JointType::Rigid;
  CHECK_THROWS_AS(tangent_error_deg(rigid, gt), std::invalid_argument);
}

TEST_CASE("prismatic estimate against revolute truth scores the tangent drift") {
  // A prismatic axis aligned with the initial tangent of a quarter-circle
  // orbit: the instantaneous error is q itself (the true tangent rotates away
  // from the fixed line), so the mean over a 90-degree sweep is 45 degrees.
  const Vec3 grasp(0.5, 0.0, 0.0);
  const auto gt = revolute_gt(Vec3::UnitZ(), Vec3::Zero(), kPi / 2, grasp);
  const auto est = prismatic_gt(Vec3::UnitY(), 0.5, grasp);
  const double err = tangent_error_deg(est, gt);
  CHECK(err == doctest::Approx(45.0).epsilon(0.001));
}

TEST_CASE("single-point baseline recovers a circle and a line") {
  SUBCASE("exact quarter circle -> revolute with the right axis") {
    std::vector<TrackPoint> track;
    const Vec3 center(0.2, -0.1, 0.4);
    const Vec3 u = Vec3::UnitX(), v = Vec3::UnitY();  // circle plane normal +z
    for (int k = 0; k <= 40; ++k) {
      const double q = (kPi / 2) * k / 40.0;
      track.push_back({k * 0.033, center + 0.5 * (std::cos(q) * u + std::sin(q) * v)});
    }
    const auto m = baseline_single_point(track);
    CHECK(m.type == JointType::Revolute);
    REQUIRE(m.axis_direction().has_value());
    CHECK(std::abs(std::abs(m.axis_direction()->dot(Vec3::UnitZ())) - 1.0) < 1e-6);
    REQUIRE(m.axis_point().has_value());
    const Vec3 dp = *m.axis_point() - center;
    CHECK((dp - Vec3::UnitZ().dot(dp) * Vec3::UnitZ()).norm() < 1e-6);
  }

  SUBCASE("exact straight slide -> prismatic along the line") {
    std::vector<TrackPoint> track;
    const Vec3 d = Vec3(1.0, 0.5, -0.25).normalized();
    for (int k = 0; k <= 30; ++k) {
      track.push_back({k * 0.033, Vec3(0.1, 0.2, 0.3) + (0.3 * k / 30.0) * d});
    }
    const auto m = baseline_single_point(track);
    CHECK(m.type == JointType::Prismatic);
    REQUIRE(m.axis_direction().has_value());
    CHECK(std::abs(std::abs(m.axis_direction()->dot(d)) - 1.0) < 1e-9);
  }

  SUBCASE("implausibly large circles fall back to prismatic") {
    // 0.3 m of arc on a 20 m circle: the circle fit is exact but the radius
    // is far beyond anything a hand articulates, so the fit is read as a
    // line. Without the cap, every gentle arc would be called revolute.
    std::vector<TrackPoint> track;
    const double R = 20.0;
    for (int k = 0; k <= 30; ++k) {
      const double q = (0.3 / R) * k / 30.0;
      track.push_back({k * 0.033, Vec3(R * std::sin(q), R * (1.0 - std::cos(q)), 0.0)});
    }
    const auto m = baseline_single_point(track);
    CHECK(m.type == JointType::Prismatic);
    REQUIRE(m.axis_direction().has_value());
    // The line direction is the arc's chord direction, essentially +x here.
    CHECK(std::abs(std::abs(m.axis_direction()->dot(Vec3::UnitX())) - 1.0) < 1e-4);
  }

  SUBCASE("degenerate input throws") {
    std::vector<TrackPoint> two = {{0.0, Vec3::Zero()}, {0.1, Vec3::UnitX()}};
    CHECK_THROWS_AS(baseline_single_point(two), std::invalid_argument);

    std::vector<TrackPoint> coincident(10, TrackPoint{0.0, Vec3(0.1, 0.2, 0.3)});
    for (int k = 0; k < 10; ++k) coincident[k].t = 0.033 * k;
    CHECK_THROWS_AS(baseline_single_point(coincident), std::domain_error);
  }
}

TEST_CASE("rigid-hand baseline recovers screws from relative pose sequences") {
  SUBCASE("pure rotation -> revolute with axis and point") {
    const Vec3 d = Vec3(0.0, 0.6, 0.8).normalized();
    const Vec3 c(0.3, 0.0, -0.1);
    std::vector<PoseSample> poses;
    for (int k = 0; k <= 50; ++k) {
      const double q = (kPi / 2) * k / 50.0;
      poses.push_back({k * 0.033, log_map(rotation_about_axis(d, c, q))});
    }
    const auto m = baseline_rigid_hand(poses);
    CHECK(m.type == JointType::Revolute);
    REQUIRE(m.axis_direction().has_value());
    CHECK(std::abs(std::abs(m.axis_direction()->dot(d)) - 1.0) < 1e-6);
    REQUIRE(m.axis_point().has_value());
    const Vec3 dp = *m.axis_point() - c;
    CHECK((dp - d.dot(dp) * d).norm() < 1e-6);
  }

  SUBCASE("pure translation -> prismatic") {
    const Vec3 d = Vec3(1.0, -2.0, 0.5).normalized();
    std::vector<PoseSample> poses;
    for (int k = 0; k <= 50; ++k) {
      poses.push_back({k * 0.033, Pose6((0.25 * k / 50.0) * d, Vec3::Zero())});
    }
    const auto m = baseline_rigid_hand(poses);
    CHECK(m.type == JointType::Prismatic);
    REQUIRE(m.axis_direction().has_value());
    CHECK(std::abs(std::abs(m.axis_direction()->dot(d)) - 1.0) < 1e-9);
  }

  SUBCASE("a static sequence has no screw to fit") {
    std::vector<PoseSample> poses(20);
    for (int k = 0; k < 20; ++k) poses[k].t = 0.033 * k;
    CHECK_THROWS_AS(baseline_rigid_hand(poses), std::domain_error);
  }
}
