#include "handkin/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

namespace handkin::io {

namespace {

using ordered_json = nlohmann::ordered_json;

nlohmann::json parse_json_line(const std::string& text, int line) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line, e.what());
  }
}

double require_number(const nlohmann::json& j, const char* key, int line) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParseError(line, std::string("missing numeric field \"") + key + "\"");
  }
  return j[key].get<double>();
}

Vec3 require_vec3(const nlohmann::json& j, const char* key, int line) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    throw ParseError(line, std::string("field \"") + key + "\" must be a 3-array");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[key][i].is_number()) {
      throw ParseError(line, std::string("field \"") + key + "\" must be numeric");
    }
    v(i) = j[key][i].get<double>();
  }
  if (!v.allFinite()) {
    throw ParseError(line, std::string("field \"") + key + "\" must be finite");
  }
  return v;
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

JointType joint_type_from_name(const std::string& name, int line) {
  for (JointType t : {JointType::Rigid, JointType::Prismatic, JointType::Revolute,
                      JointType::Disconnected}) {
    if (name == joint_type_name(t)) return t;
  }
  throw ParseError(line, "unknown joint type \"" + name + "\"");
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

}  // namespace

std::optional<ObservationRecord> ObservationReader::next() {
  std::string text;
  while (std::getline(*in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    const nlohmann::json j = parse_json_line(text, line_);
    ObservationRecord rec;
    rec.t = require_number(j, "t", line_);
    if (!std::isfinite(rec.t)) throw ParseError(line_, "t must be finite");
    if (have_last_t_ && rec.t < last_t_) {
      throw ParseError(line_, "t decreased between records");
    }
    have_last_t_ = true;
    last_t_ = rec.t;

    if (!j.contains("landmarks") || !j["landmarks"].is_array()) {
      throw ParseError(line_, "missing \"landmarks\" array");
    }
    std::set<int> seen;
    for (const auto& lj : j["landmarks"]) {
      LandmarkObservation obs;
      obs.t = rec.t;
      const double idv = require_number(lj, "id", line_);
      obs.id = static_cast<int>(idv);
      if (obs.id != idv || obs.id < 0 || obs.id >= kNumLandmarkIds) {
        throw ParseError(line_, "landmark id must be an integer in 0..20");
      }
      if (!seen.insert(obs.id).second) {
        throw ParseError(line_, "duplicate landmark id " + std::to_string(obs.id));
      }
      obs.pos = require_vec3(lj, "pos", line_);
      obs.vis = require_number(lj, "vis", line_);
      if (!(obs.vis >= 0.0 && obs.vis <= 1.0)) {
        throw ParseError(line_, "vis must be in [0, 1]");
      }
      rec.landmarks.push_back(obs);
    }
    return rec;
  }
  return std::nullopt;
}

void write_observation_line(std::ostream& out, double t,
                            std::span<const LandmarkObservation> landmarks) {
  ordered_json j;
  j["t"] = t;
  auto& arr = j["landmarks"] = ordered_json::array();
  for (const auto& lm : landmarks) {
    ordered_json lj;
    lj["id"] = lm.id;
    lj["pos"] = vec3_json(lm.pos);
    lj["vis"] = lm.vis;
    arr.push_back(std::move(lj));
  }
  out << j.dump() << '\n';
}

GroundTruthJoint read_ground_truth(const std::filesystem::path& path) {
  const nlohmann::json j = load_json_file(path);
  GroundTruthJoint gt;
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ParseError(0, path.string() + ": missing \"type\"");
  }
  gt.type = joint_type_from_name(j["type"].get<std::string>(), 0);
  gt.axis_direction = require_vec3(j, "axis_direction", 0);
  if (j.contains("axis_point")) gt.axis_point = require_vec3(j, "axis_point", 0);
  gt.q_max = require_number(j, "q_max", 0);
  if (j.contains("grasp_point")) gt.grasp_point = require_vec3(j, "grasp_point", 0);
  return gt;
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruthJoint& gt) {
  ordered_json j;
  j["type"] = joint_type_name(gt.type);
  j["axis_direction"] = vec3_json(gt.axis_direction);
  if (gt.type == JointType::Revolute) j["axis_point"] = vec3_json(gt.axis_point);
  j["q_max"] = gt.q_max;
  j["grasp_point"] = vec3_json(gt.grasp_point);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_report(const std::filesystem::path& path, const EstimateReport& report) {
  ordered_json j;
  j["joint_type"] = joint_type_name(report.joint_type);
  if (report.axis_direction) j["axis_direction"] = vec3_json(*report.axis_direction);
  if (report.axis_point) j["axis_point"] = vec3_json(*report.axis_point);
  j["q_max_observed"] = report.q_max_observed;
  j["frames"] = report.frames;
  j["frames_per_second"] = report.frames_per_second;
  j["flagged_outliers"] = report.flagged_outliers;
  if (report.tangent_error_deg) j["tangent_error_deg"] = *report.tangent_error_deg;
  if (report.beliefs_file) j["beliefs_file"] = *report.beliefs_file;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

EstimateReport read_estimate(const std::filesystem::path& path) {
  const nlohmann::json j = load_json_file(path);
  EstimateReport rep;
  const char* type_key = j.contains("joint_type") ? "joint_type" : "type";
  if (!j.contains(type_key) || !j[type_key].is_string()) {
    throw ParseError(0, path.string() + ": missing \"joint_type\"");
  }
  rep.joint_type = joint_type_from_name(j[type_key].get<std::string>(), 0);
  if (j.contains("axis_direction")) rep.axis_direction = require_vec3(j, "axis_direction", 0);
  if (j.contains("axis_point")) rep.axis_point = require_vec3(j, "axis_point", 0);
  if (j.contains("q_max_observed") && j["q_max_observed"].is_number()) {
    rep.q_max_observed = j["q_max_observed"].get<double>();
  } else if (j.contains("q_max") && j["q_max"].is_number()) {
    rep.q_max_observed = j["q_max"].get<double>();
  }
  return rep;
}

void write_belief_line(std::ostream& out, const FrameBelief& belief) {
  ordered_json j;
  j["t"] = belief.t;
  j["tracking"] = belief.body_tracking;
  if (belief.body_model) j["body_model"] = motion_model_name(*belief.body_model);
  j["gated"] = belief.gated_landmarks;
  j["joint"] = joint_type_name(belief.joint_type);
  ordered_json ll;
  if (belief.rigid_ll) ll["rigid"] = *belief.rigid_ll;
  if (belief.prismatic_ll) ll["prismatic"] = *belief.prismatic_ll;
  if (belief.revolute_ll) ll["revolute"] = *belief.revolute_ll;
  if (!ll.empty()) j["ll"] = std::move(ll);
  if (belief.q) j["q"] = *belief.q;
  out << j.dump() << '\n';
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "scenario,method,joint_type,tangent_error_deg,status\n";
  char buf[64];
  for (const auto& row : rows) {
    std::string error_text;
    if (row.tangent_error_deg) {
      std::snprintf(buf, sizeof buf, "%.6f", *row.tangent_error_deg);
      error_text = buf;
    }
    std::string status = row.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << row.scenario << ',' << row.method << ',' << row.joint_type << ',' << error_text
        << ',' << status << '\n';
  }
}

}  // namespace handkin::io
