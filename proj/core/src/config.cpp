#include "handkin/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "handkin/toml_lite.hpp"

namespace handkin {

namespace {

template <std::size_t N>
Eigen::Matrix<double, 3 * N, 3 * N> block_diag3(const std::array<double, N>& scales) {
  Eigen::Matrix<double, 3 * N, 3 * N> m = Eigen::Matrix<double, 3 * N, 3 * N>::Zero();
  for (std::size_t b = 0; b < N; ++b) {
    m.template block<3, 3>(3 * b, 3 * b) = scales[b] * Mat3::Identity();
  }
  return m;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_pd(double v, const std::string& field) {
  require(std::isfinite(v) && v > 0.0, field + " not positive definite");
}

template <std::size_t N>
void require_pd(const std::array<double, N>& v, const std::string& field) {
  for (double x : v) require_pd(x, field);
}

}  // namespace

Mat6 PipelineConfig::p0_lm_mat() const { return block_diag3(p0_lm); }
Mat6 PipelineConfig::q_lm_mat() const { return block_diag3(q_lm); }
Mat3 PipelineConfig::r_lm_mat() const { return r_lm * Mat3::Identity(); }
Mat12 PipelineConfig::p0_rb_mat() const { return block_diag3(p0_rb); }
Mat12 PipelineConfig::q_rb_mat() const { return block_diag3(q_rb); }

Mat4 PipelineConfig::p0_pris_mat() const { return p0_pris * Mat4::Identity(); }

Mat4 PipelineConfig::q_pris_mat() const {
  Vec4 d;
  d << q_pris[0], q_pris[0], q_pris[1], q_pris[2];
  return d.asDiagonal();
}

Mat7 PipelineConfig::p0_rev_mat() const { return p0_rev * Mat7::Identity(); }

Mat7 PipelineConfig::q_rev_mat() const {
  Vec7 d;
  d << q_rev[0], q_rev[0], q_rev[1], q_rev[1], q_rev[1], q_rev[2], q_rev[3];
  return d.asDiagonal();
}

void validate_config(const PipelineConfig& cfg) {
  require_pd(cfg.p0_lm, "p0_lm");
  require_pd(cfg.q_lm, "q_lm");
  require_pd(cfg.r_lm, "r_lm");
  require_pd(cfg.p0_rb, "p0_rb");
  require_pd(cfg.q_rb, "q_rb");
  require_pd(cfg.p0_pris, "p0_pris");
  require_pd(cfg.q_pris, "q_pris");
  require_pd(cfg.p0_rev, "p0_rev");
  require_pd(cfg.q_rev, "q_rev");

  require(std::isfinite(cfg.landmark_unc_thresh) && cfg.landmark_unc_thresh > 0.0,
          "landmark_unc_thresh must be > 0");
  require(std::isfinite(cfg.vis_thresh) && cfg.vis_thresh >= 0.0 && cfg.vis_thresh < 1.0,
          "vis_thresh must be in [0, 1)");
  require(std::isfinite(cfg.maha_lm_thresh) && cfg.maha_lm_thresh > 0.0,
          "maha_lm_thresh must be > 0");
  require(std::isfinite(cfg.maha_rb_thresh) && cfg.maha_rb_thresh > 0.0,
          "maha_rb_thresh must be > 0");

  require_pd(cfg.saliency.thumb, "saliency.thumb");
  require_pd(cfg.saliency.mcp, "saliency.mcp");
  require_pd(cfg.saliency.pip, "saliency.pip");
  require_pd(cfg.saliency.dip, "saliency.dip");
  require_pd(cfg.saliency.tip, "saliency.tip");

  require(cfg.ransac.iterations >= 1.0 &&
              cfg.ransac.iterations == std::floor(cfg.ransac.iterations),
          "ransac.iterations must be a positive integer");
  require(std::isfinite(cfg.ransac.inlier_threshold) && cfg.ransac.inlier_threshold > 0.0,
          "ransac.inlier_threshold must be > 0");
  require(cfg.ransac.min_inliers >= 3.0 &&
              cfg.ransac.min_inliers == std::floor(cfg.ransac.min_inliers),
          "ransac.min_inliers must be an integer >= 3");

  require(cfg.model_select.window >= 1.0 &&
              cfg.model_select.window == std::floor(cfg.model_select.window),
          "model_select.window must be a positive integer");
  require(std::isfinite(cfg.model_select.revolute_radius_cap) &&
              cfg.model_select.revolute_radius_cap > 0.0,
          "model_select.revolute_radius_cap must be > 0");
}

namespace {

struct FieldBinding {
  std::function<void(PipelineConfig&, const toml::Value&, const std::string&)> set;
  std::function<toml::Value(const PipelineConfig&)> get;
};

double as_number(const toml::Value& v, const std::string& field) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ConfigError(field + " must be a number");
}

template <std::size_t N>
std::array<double, N> as_array(const toml::Value& v, const std::string& field) {
  const auto* arr = std::get_if<std::vector<double>>(&v);
  if (!arr || arr->size() != N) {
    throw ConfigError(field + " must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  std::copy(arr->begin(), arr->end(), out.begin());
  return out;
}

FieldBinding bind_number(double PipelineConfig::* member) {
  return {[member](PipelineConfig& c, const toml::Value& v, const std::string& f) {
            c.*member = as_number(v, f);
          },
          [member](const PipelineConfig& c) { return toml::Value(c.*member); }};
}

template <typename Sub>
FieldBinding bind_number(Sub PipelineConfig::* sub, double Sub::* member) {
  return {[sub, member](PipelineConfig& c, const toml::Value& v, const std::string& f) {
            c.*sub.*member = as_number(v, f);
          },
          [sub, member](const PipelineConfig& c) { return toml::Value(c.*sub.*member); }};
}

template <std::size_t N>
FieldBinding bind_array(std::array<double, N> PipelineConfig::* member) {
  return {[member](PipelineConfig& c, const toml::Value& v, const std::string& f) {
            c.*member = as_array<N>(v, f);
          },
          [member](const PipelineConfig& c) {
            const auto& a = c.*member;
            return toml::Value(std::vector<double>(a.begin(), a.end()));
          }};
}

// One binding per file key, sections flattened as "section.key".
const std::map<std::string, FieldBinding>& bindings() {
  static const std::map<std::string, FieldBinding> table = [] {
    std::map<std::string, FieldBinding> t;
    t["p0_lm"] = bind_array(&PipelineConfig::p0_lm);
    t["q_lm"] = bind_array(&PipelineConfig::q_lm);
    t["r_lm"] = bind_number(&PipelineConfig::r_lm);
    t["landmark_unc_thresh"] = bind_number(&PipelineConfig::landmark_unc_thresh);
    t["vis_thresh"] = bind_number(&PipelineConfig::vis_thresh);
    t["maha_lm_thresh"] = bind_number(&PipelineConfig::maha_lm_thresh);
    t["p0_rb"] = bind_array(&PipelineConfig::p0_rb);
    t["q_rb"] = bind_array(&PipelineConfig::q_rb);
    t["maha_rb_thresh"] = bind_number(&PipelineConfig::maha_rb_thresh);
    t["p0_pris"] = bind_number(&PipelineConfig::p0_pris);
    t["q_pris"] = bind_array(&PipelineConfig::q_pris);
    t["p0_rev"] = bind_number(&PipelineConfig::p0_rev);
    t["q_rev"] = bind_array(&PipelineConfig::q_rev);

    using S = PipelineConfig::Saliency;
    t["saliency.thumb"] = bind_number(&PipelineConfig::saliency, &S::thumb);
    t["saliency.mcp"] = bind_number(&PipelineConfig::saliency, &S::mcp);
    t["saliency.pip"] = bind_number(&PipelineConfig::saliency, &S::pip);
    t["saliency.dip"] = bind_number(&PipelineConfig::saliency, &S::dip);
    t["saliency.tip"] = bind_number(&PipelineConfig::saliency, &S::tip);

    using R = PipelineConfig::Ransac;
    t["ransac.iterations"] = bind_number(&PipelineConfig::ransac, &R::iterations);
    t["ransac.inlier_threshold"] = bind_number(&PipelineConfig::ransac, &R::inlier_threshold);
    t["ransac.min_inliers"] = bind_number(&PipelineConfig::ransac, &R::min_inliers);

    using M = PipelineConfig::ModelSelect;
    t["model_select.window"] = bind_number(&PipelineConfig::model_select, &M::window);
    t["model_select.revolute_radius_cap"] =
        bind_number(&PipelineConfig::model_select, &M::revolute_radius_cap);
    return t;
  }();
  return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  toml::Document doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::ParseError& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, kv] : doc) {
    for (const auto& [key, value] : kv) {
      const std::string field = section.empty() ? key : section + "." + key;
      const auto it = bindings().find(field);
      if (it == bindings().end()) throw ConfigError("unknown config key '" + field + "'");
      it->second.set(cfg, value, field);
    }
  }
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
  toml::Document doc;
  for (const auto& [field, binding] : bindings()) {
    const std::size_t dot = field.find('.');
    const std::string section = dot == std::string::npos ? "" : field.substr(0, dot);
    const std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
    doc[section][key] = binding.get(cfg);
  }
  return toml::serialize(doc);
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << serialize_config(cfg);
}

}  // namespace handkin
