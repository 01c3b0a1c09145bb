#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "handkin/landmark_filter.hpp"
#include "handkin/metrics.hpp"
#include "handkin/se3.hpp"

namespace handkin {

/*
 * Synthetic hand-manipulation scenario: a rigid landmark constellation rides
 * an articulated grasp, with configurable observation corruption. Everything
 * is deterministic under `seed`; per-landmark noise comes from independent
 * substreams, so scenarios differing only in the mover set produce
 * bit-identical observations for the landmarks they share.
 */
struct Scenario {
  GroundTruthJoint joint;

  // id -> rest position (world frame). The rigid set; ids 1..20 by default.
  std::map<int, Vec3> constellation;
  // Emit a wrist record (id 0) riding the same body. Ingestion drops it by
  // class, so it exercises the rejection path without affecting estimates.
  bool include_wrist_decoy = false;

  double duration = 10.0;  // seconds
  double rate = 30.0;      // Hz
  // Stationary grip segments of this length at both ends of the ramp.
  double hold_seconds = 0.0;

  // Observation corruption. Noise is per landmark class (meters, std dev);
  // absent classes get zero noise.
  std::map<LandmarkClass, double> noise_sigma;
  double outlier_rate = 0.0;      // probability an observation is replaced
  double outlier_magnitude = 0.3; // meters, offset norm of replaced positions
  double dropout_rate = 0.0;      // probability a landmark goes unusable;
                                  // realized half as omission, half as a
                                  // below-threshold visibility score

  // Grip compliance: a smooth rigid perturbation of the whole hand about the
  // grasp centroid (zero at t = 0). Models that the hand does not follow the
  // object's constraint exactly.
  double wobble_translation = 0.0;  // meters, amplitude scale
  double wobble_rotation = 0.0;     // radians, amplitude scale

  // Landmarks that ignore the body and follow their own smooth motion.
  std::set<int> independent_movers;
  double mover_amplitude = 0.1;  // meters

  std::uint64_t seed = 0;
};

struct SimFrame {
  double t = 0.0;
  std::vector<LandmarkObservation> landmarks;
};

// Noise-free body state per frame: pose/velocity of the hand relative to its
// rest configuration (world frame, spatial twist), and the articulation q.
struct TruthFrame {
  double t = 0.0;
  Pose6 pose;
  Velocity6 velocity;
  double q = 0.0;
};

struct SimulationResult {
  std::vector<SimFrame> frames;
  GroundTruthJoint joint;  // grasp_point set to the constellation rest centroid
  std::vector<TruthFrame> truth;
};

// point articulated to configuration q about the joint (identity at q = 0).
Vec3 articulate(const GroundTruthJoint& joint, double q, const Vec3& point);

// Default 20-landmark adult-hand layout (ids 1..20, ~0.18 m span, fingers
// curled out of plane so rigid alignment is well conditioned).
std::map<int, Vec3> default_hand_constellation();

// Per-class noise map proportional to the landmark saliency scores (tips
// most precise), scaled so the PIP class gets exactly `base_sigma`.
std::map<LandmarkClass, double> class_scaled_sigma(double base_sigma);

// Throws std::invalid_argument on invalid parameters (see Scenario fields).
SimulationResult generate(const Scenario& scenario);

// The benchmark scenario family: default constellation around a randomized
// axis (revolute axes pass 0.3-0.6 m from the grasp), q_max = 0.3 m or 90
// degrees, 2 mm class-scaled noise, 5% outliers, 5% dropout, mild grip
// wobble, 1 s holds at both ends.
Scenario default_scenario(JointType type, std::uint64_t seed);

}  // namespace handkin
