// Microbenchmarks for the hot paths: chart maps, alignment, the filter
// levels, and a whole pipeline frame. Inputs are fixed and pre-generated so
// the numbers track code changes, not RNG drift.

#include <benchmark/benchmark.h>

#include <vector>

#include "handkin/alignment.hpp"
#include "handkin/body_estimator.hpp"
#include "handkin/pipeline.hpp"
#include "handkin/random.hpp"
#include "handkin/se3.hpp"
#include "handkin/simulator.hpp"

using namespace handkin;

namespace {

std::vector<Pose6> sample_poses(int n) {
  Rng rng(17);
  std::vector<Pose6> poses;
  poses.reserve(n);
  for (int i = 0; i < n; ++i) {
    poses.emplace_back(rng.gaussian3(0.4), rng.uniform(0.0, 2.8) * rng.unit_vector());
  }
  return poses;
}

void BM_ExpMap(benchmark::State& state) {
  const auto poses = sample_poses(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_map(poses[i++ & 255]));
  }
}
BENCHMARK(BM_ExpMap);

void BM_LogMap(benchmark::State& state) {
  const auto poses = sample_poses(256);
  std::vector<Eigen::Isometry3d> ts;
  ts.reserve(poses.size());
  for (const auto& p : poses) ts.push_back(exp_map(p));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_map(ts[i++ & 255]));
  }
}
BENCHMARK(BM_LogMap);

void BM_RigidAlign(benchmark::State& state) {
  Rng rng(5);
  const int n = static_cast<int>(state.range(0));
  std::vector<Vec3> src, dst;
  std::vector<double> w(n, 1.0);
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = Eigen::AngleAxisd(0.8, rng.unit_vector()).toRotationMatrix();
  T.translation() = Vec3(0.2, -0.1, 0.3);
  for (int i = 0; i < n; ++i) {
    src.push_back(rng.gaussian3(0.2));
    dst.push_back(T * src.back() + rng.gaussian3(0.002));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rigid_align(src, dst, w));
  }
}
BENCHMARK(BM_RigidAlign)->Arg(10)->Arg(20);

void BM_RansacInit(benchmark::State& state) {
  PipelineConfig cfg;
  Rng rng(11);
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = Eigen::AngleAxisd(0.5, rng.unit_vector()).toRotationMatrix();
  T.translation() = Vec3(0.1, 0.05, -0.1);
  std::vector<TrackSample> tracks;
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = rng.gaussian3(0.08);
    Vec3 end = T * p + rng.gaussian3(0.002);
    if (i == 3 || i == 13) end += Vec3(0.2, -0.1, 0.15);  // two contaminants
    tracks.push_back({i + 1, p, end, 1e-4 * Mat3::Identity()});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(init_ransac(tracks, cfg, 7));
  }
}
BENCHMARK(BM_RansacInit);

void BM_LandmarkBankStep(benchmark::State& state) {
  PipelineConfig cfg;
  Scenario sc = default_scenario(JointType::Prismatic, 31);
  sc.duration = 4.0;
  const auto sim = generate(sc);

  LandmarkFilterBank bank(&cfg);
  double t = 0.0;
  std::size_t i = 0;
  const double dt = 1.0 / sc.rate;
  for (auto _ : state) {
    // Recycle recorded frames under a strictly increasing clock so the bank
    // runs at steady state instead of re-acquiring every iteration.
    benchmark::DoNotOptimize(bank.step(t, sim.frames[i % sim.frames.size()].landmarks));
    t += dt;
    ++i;
  }
}
BENCHMARK(BM_LandmarkBankStep);

void BM_BodyCorrect(benchmark::State& state) {
  PipelineConfig cfg;
  Rng rng(23);
  BodyState s;
  s.P = cfg.p0_rb_mat();
  std::vector<BodyMeasurement> meas;
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = rng.gaussian3(0.08);
    s.ref_landmarks[i + 1] = p;
    meas.push_back({i + 1, p + rng.gaussian3(0.002), 1e-4 * Mat3::Identity()});
  }
  const std::vector<std::pair<MotionModelTag, BodyState>> preds = {
      {MotionModelTag::Static, s}, {MotionModelTag::ConstantVelocity, s}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(correct_body(preds, meas, cfg));
  }
}
BENCHMARK(BM_BodyCorrect);

void BM_PipelineFrame(benchmark::State& state) {
  PipelineConfig cfg;
  Scenario sc = default_scenario(JointType::Revolute, 47);
  sc.duration = 6.0;
  const auto sim = generate(sc);

  Pipeline pipe(cfg);
  double t = 0.0;
  std::size_t i = 0;
  const double dt = 1.0 / sc.rate;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pipe.step(t, sim.frames[i % sim.frames.size()].landmarks));
    t += dt;
    ++i;
  }
}
BENCHMARK(BM_PipelineFrame);

}  // namespace

BENCHMARK_MAIN();
