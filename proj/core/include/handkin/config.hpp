#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "handkin/linalg.hpp"

namespace handkin {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/*
 * Pipeline tuning constants. Defaults are the tuned operating point; every
 * value can be overridden from a small TOML file (see load_config). Block
 * covariances are stored as per-block scales in state order and materialized
 * with the *_mat() accessors:
 *   landmark state  (position, velocity)                    -> 2 blocks of 3
 *   body state      (pose lin, pose ang, vel lin, vel ang)  -> 4 blocks of 3
 *   prismatic state (axis phi/theta, q, q_dot)              -> blocks 2,1,1
 *   revolute state  (axis phi/theta, axis point, q, q_dot)  -> blocks 2,3,1,1
 */
struct PipelineConfig {
  // Landmark level.
  std::array<double, 2> p0_lm{0.09, 0.06};
  std::array<double, 2> q_lm{0.13, 0.05};
  double r_lm = 0.05;
  double landmark_unc_thresh = 0.3;  // loss bound on trace of the position block
  double vis_thresh = 0.006;
  double maha_lm_thresh = 0.19;

  // Body level.
  std::array<double, 4> p0_rb{0.05, 0.2, 0.1, 0.2};
  std::array<double, 4> q_rb{0.75, 3.0, 2.4, 4.8};
  double maha_rb_thresh = 0.25;

  // Joint level.
  double p0_pris = 3.0;
  std::array<double, 3> q_pris{2.55, 0.7, 75.0};
  double p0_rev = 1.0;
  std::array<double, 4> q_rev{2.55, 0.3, 5.1, 75.0};

  struct Saliency {
    double thumb = 1.5;
    double mcp = 1.5;
    double pip = 1.0;
    double dip = 1.5;
    double tip = 0.5;
    bool operator==(const Saliency&) const = default;
  } saliency;

  struct Ransac {
    double iterations = 200;
    double inlier_threshold = 0.01;  // meters
    double min_inliers = 6;
    bool operator==(const Ransac&) const = default;
  } ransac;

  struct ModelSelect {
    double window = 30;  // frames of log-likelihood history
    double revolute_radius_cap = 5.0;  // meters; beyond this, call it prismatic
    bool operator==(const ModelSelect&) const = default;
  } model_select;

  Mat6 p0_lm_mat() const;
  Mat6 q_lm_mat() const;
  Mat3 r_lm_mat() const;
  Mat12 p0_rb_mat() const;
  Mat12 q_rb_mat() const;
  Mat4 p0_pris_mat() const;
  Mat4 q_pris_mat() const;
  Mat7 p0_rev_mat() const;
  Mat7 q_rev_mat() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Throws ConfigError naming the offending field (e.g. "r_lm not positive
// definite", "ransac.min_inliers must be >= 3").
void validate_config(const PipelineConfig& cfg);

// Parse overrides from TOML text on top of defaults, then validate.
// Unknown keys are errors — silent typos in tuning files are worse than noise.
PipelineConfig parse_config(const std::string& text);

// parse_config over the contents of `path`; empty file -> defaults.
PipelineConfig load_config(const std::string& path);

// Exact round-trip: parse_config(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& cfg);
void save_config(const PipelineConfig& cfg, const std::string& path);

}  // namespace handkin
