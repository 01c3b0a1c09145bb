#include "handkin/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "handkin/random.hpp"

namespace handkin {

namespace {

// splitmix64 finalizer: decorrelates the per-landmark and global substreams
// derived from one scenario seed.
std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t kGlobalSalt = 1u << 16;
constexpr std::uint64_t kGeometrySalt = 1u << 17;

struct Harmonic {
  Vec3 axis = Vec3::UnitX();
  double freq = 0.0;   // Hz
  double phase = 0.0;  // radians
  double amp = 0.0;
};

// Sum of harmonics, offset so the value vanishes at t = 0.
Vec3 evaluate(const std::vector<Harmonic>& hs, double t) {
  Vec3 v = Vec3::Zero();
  for (const auto& h : hs) {
    v += h.amp * (std::sin(2.0 * std::numbers::pi * h.freq * t + h.phase) -
                  std::sin(h.phase)) *
         h.axis;
  }
  return v;
}

std::vector<Harmonic> draw_harmonics(Rng& rng, int count, double amp_scale) {
  std::vector<Harmonic> hs(count);
  for (auto& h : hs) {
    h.axis = rng.unit_vector();
    h.freq = rng.uniform(0.3, 1.0);
    h.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    h.amp = amp_scale * rng.uniform(0.5, 1.0);
  }
  return hs;
}

double smooth_step_q(double t, double hold, double span, double q_max) {
  const double u = std::clamp((t - hold) / span, 0.0, 1.0);
  return q_max * u * u * (3.0 - 2.0 * u);
}

void validate(const Scenario& sc) {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("scenario: ") + msg); };
  if (!(sc.rate > 0.0)) fail("rate must be > 0");
  if (!(sc.duration > 0.0)) fail("duration must be > 0");
  if (sc.hold_seconds < 0.0) fail("hold_seconds must be >= 0");
  if (!(sc.duration - 2.0 * sc.hold_seconds > 0.0)) fail("holds leave no time to articulate");
  for (double p : {sc.outlier_rate, sc.dropout_rate}) {
    if (p < 0.0 || p > 1.0) fail("probabilities must be in [0, 1]");
  }
  if (sc.outlier_magnitude < 0.0) fail("outlier_magnitude must be >= 0");
  if (sc.wobble_translation < 0.0 || sc.wobble_rotation < 0.0) fail("wobble must be >= 0");
  if (sc.mover_amplitude < 0.0) fail("mover_amplitude must be >= 0");
  for (auto s : sc.noise_sigma) {
    if (s.second < 0.0) fail("noise sigma must be >= 0");
  }
  if (sc.joint.type != JointType::Prismatic && sc.joint.type != JointType::Revolute) {
    fail("joint type must be prismatic or revolute");
  }
  if (!(sc.joint.q_max > 0.0)) fail("q_max must be > 0");
  if (!(sc.joint.axis_direction.norm() > 0.0)) fail("axis direction must be nonzero");

  for (const auto& [id, pos] : sc.constellation) {
    if (id < 1 || id > 20) fail("constellation ids must be in 1..20");
    if (!pos.allFinite()) fail("constellation positions must be finite");
  }
  for (int id : sc.independent_movers) {
    if (!sc.constellation.count(id)) fail("independent mover id not in constellation");
  }

  // The rigid set (constellation minus movers) must support a pose fit.
  std::vector<Vec3> rigid;
  for (const auto& [id, pos] : sc.constellation) {
    if (!sc.independent_movers.count(id)) rigid.push_back(pos);
  }
  if (rigid.size() < 3) fail("degenerate constellation: fewer than 3 rigid landmarks");
  Vec3 c = Vec3::Zero();
  for (const auto& p : rigid) c += p;
  c /= static_cast<double>(rigid.size());
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : rigid) scatter += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  if (es.eigenvalues()(1) <= 1e-12 * std::max(1.0, es.eigenvalues()(2))) {
    fail("degenerate constellation: rigid landmarks are collinear");
  }
}

}  // namespace

Vec3 articulate(const GroundTruthJoint& joint, double q, const Vec3& point) {
  return articulated_point(joint, q, point);
}

std::map<int, Vec3> default_hand_constellation() {
  // Rough right-hand layout (meters): palm in the xy plane, fingers along +y,
  // thumb toward -x, finger joints curling out of plane along -z.
  return {
      {1, {-0.030, -0.050, 0.005}},  {2, {-0.050, -0.020, 0.000}},
      {3, {-0.062, 0.005, -0.005}},  {4, {-0.070, 0.025, -0.010}},
      {5, {-0.025, 0.000, 0.000}},   {6, {-0.028, 0.030, -0.005}},
      {7, {-0.030, 0.050, -0.012}},  {8, {-0.031, 0.065, -0.020}},
      {9, {0.000, 0.005, 0.000}},    {10, {0.000, 0.040, -0.006}},
      {11, {0.000, 0.062, -0.015}},  {12, {0.000, 0.078, -0.025}},
      {13, {0.022, 0.000, 0.000}},   {14, {0.024, 0.035, -0.006}},
      {15, {0.026, 0.055, -0.014}},  {16, {0.027, 0.070, -0.022}},
      {17, {0.042, -0.008, 0.002}},  {18, {0.046, 0.018, -0.004}},
      {19, {0.049, 0.035, -0.010}},  {20, {0.051, 0.048, -0.016}},
  };
}

std::map<LandmarkClass, double> class_scaled_sigma(double base_sigma) {
  return {
      {LandmarkClass::Wrist, base_sigma},
      {LandmarkClass::Thumb, 1.5 * base_sigma},
      {LandmarkClass::Mcp, 1.5 * base_sigma},
      {LandmarkClass::Pip, 1.0 * base_sigma},
      {LandmarkClass::Dip, 1.5 * base_sigma},
      {LandmarkClass::Tip, 0.5 * base_sigma},
  };
}

SimulationResult generate(const Scenario& scenario) {
  validate(scenario);

  SimulationResult out;
  out.joint = scenario.joint;
  out.joint.axis_direction.normalize();

  // The grasp pivot is a property of the hand layout alone. Excluding movers
  // here would couple the wobble field to the corruption settings and break
  // the bit-identical-twins guarantee.
  Vec3 centroid = Vec3::Zero();
  for (const auto& [id, pos] : scenario.constellation) centroid += pos;
  centroid /= static_cast<double>(scenario.constellation.size());
  out.joint.grasp_point = centroid;

  // Grip wobble parameters come from the global substream.
  Rng global(mix(scenario.seed, kGlobalSalt));
  const auto wobble_trans = draw_harmonics(global, 2, scenario.wobble_translation);
  const auto wobble_rot = draw_harmonics(global, 2, scenario.wobble_rotation);

  // Per-landmark substreams: mover parameters first, then observation draws.
  std::map<int, Rng> streams;
  std::map<int, std::vector<Harmonic>> mover_motion;
  std::vector<int> ids;
  if (scenario.include_wrist_decoy) ids.push_back(0);
  for (const auto& [id, pos] : scenario.constellation) ids.push_back(id);
  for (int id : ids) {
    auto res = streams.emplace(id, Rng(mix(scenario.seed, static_cast<std::uint64_t>(id))));
    if (scenario.independent_movers.count(id)) {
      mover_motion[id] = draw_harmonics(res.first->second, 2, scenario.mover_amplitude);
    }
  }

  const int n_frames = static_cast<int>(std::lround(scenario.duration * scenario.rate));
  if (n_frames < 2) throw std::invalid_argument("scenario: too short for two frames");
  const double dt = 1.0 / scenario.rate;
  const double ramp_span = scenario.duration - 2.0 * scenario.hold_seconds;

  // Hand pose per frame: articulation then grip wobble about the grasp.
  std::vector<Eigen::Isometry3d> hand(n_frames);
  std::vector<double> qs(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    const double t = i * dt;
    const double q = smooth_step_q(t, scenario.hold_seconds, ramp_span, out.joint.q_max);
    qs[i] = q;

    Eigen::Isometry3d A;
    if (out.joint.type == JointType::Prismatic) {
      A = Eigen::Isometry3d(Eigen::Translation3d(q * out.joint.axis_direction));
    } else {
      A = rotation_about_axis(out.joint.axis_direction, out.joint.axis_point, q);
    }

    const Mat3 R = rodrigues(evaluate(wobble_rot, t));
    Eigen::Isometry3d W = Eigen::Isometry3d::Identity();
    W.linear() = R;
    W.translation() = centroid - R * centroid + R * evaluate(wobble_trans, t);

    hand[i] = A * W;
  }

  out.truth.resize(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    out.truth[i].t = i * dt;
    out.truth[i].q = qs[i];
    out.truth[i].pose = log_map(hand[i]);
    if (i + 1 < n_frames) {
      out.truth[i].velocity =
          Velocity6::from_vec(log_map(hand[i + 1] * hand[i].inverse()).vec() / dt);
    } else {
      out.truth[i].velocity = out.truth[i - 1].velocity;
    }
  }

  out.frames.resize(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    const double t = i * dt;
    auto& frame = out.frames[i];
    frame.t = t;

    for (int id : ids) {
      Rng& rng = streams.at(id);

      Vec3 clean;
      if (const auto mv = mover_motion.find(id); mv != mover_motion.end()) {
        clean = scenario.constellation.at(id) + evaluate(mv->second, t);
      } else if (id == 0) {
        clean = hand[i] * Vec3(0.0, -0.090, 0.010);  // wrist rides the body
      } else {
        clean = hand[i] * scenario.constellation.at(id);
      }

      double vis;
      bool emit = true;
      if (rng.uniform01() < scenario.dropout_rate) {
        if (rng.uniform01() < 0.5) {
          emit = false;
          vis = 0.0;
        } else {
          vis = rng.uniform(0.0, 0.003);  // occlusion: present but untrusted
        }
      } else {
        vis = rng.uniform(0.5, 1.0);
      }
      if (!emit) continue;

      Vec3 pos;
      if (rng.uniform01() < scenario.outlier_rate) {
        pos = clean + scenario.outlier_magnitude * rng.unit_vector();
      } else {
        double sigma = 0.0;
        const auto cls = landmark_class_of(id);
        if (const auto it = scenario.noise_sigma.find(cls); it != scenario.noise_sigma.end()) {
          sigma = it->second;
        }
        pos = clean + rng.gaussian3(sigma);
      }

      frame.landmarks.push_back({t, id, pos, vis});
    }
  }

  return out;
}

Scenario default_scenario(JointType type, std::uint64_t seed) {
  Scenario sc;
  sc.constellation = default_hand_constellation();
  sc.include_wrist_decoy = true;
  sc.duration = 10.0;
  sc.rate = 30.0;
  sc.hold_seconds = 1.0;
  sc.noise_sigma = class_scaled_sigma(0.002);
  sc.outlier_rate = 0.05;
  sc.outlier_magnitude = 0.3;
  sc.dropout_rate = 0.05;
  sc.wobble_translation = 0.003;
  sc.wobble_rotation = 0.025;
  sc.seed = seed;

  Vec3 centroid = Vec3::Zero();
  for (const auto& [id, pos] : sc.constellation) centroid += pos;
  centroid /= static_cast<double>(sc.constellation.size());

  Rng rng(mix(seed, kGeometrySalt));
  sc.joint.type = type;
  sc.joint.axis_direction = rng.unit_vector();
  if (type == JointType::Prismatic) {
    sc.joint.q_max = 0.3;
  } else {
    // Axis offset 0.3-0.6 m from the grasp, perpendicular to the direction.
    Vec3 perp;
    do {
      const Vec3 u = rng.unit_vector();
      perp = u - u.dot(sc.joint.axis_direction) * sc.joint.axis_direction;
    } while (perp.norm() < 0.1);
    sc.joint.axis_point = centroid + rng.uniform(0.3, 0.6) * perp.normalized();
    sc.joint.q_max = std::numbers::pi / 2.0;
  }
  return sc;
}

}  // namespace handkin
