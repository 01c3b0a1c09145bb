#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "handkin/landmark_filter.hpp"
#include "handkin/metrics.hpp"
#include "handkin/pipeline.hpp"

namespace handkin::io {

// Malformed input; `line` is 1-based for line-oriented formats, 0 otherwise.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// One observation frame as it appears on the wire.
struct ObservationRecord {
  double t = 0.0;
  std::vector<LandmarkObservation> landmarks;
};

/*
 * Streaming reader for observation JSON Lines:
 *   {"t": <s>, "landmarks": [{"id": 0-20, "pos": [x,y,z], "vis": 0-1}, ...]}
 * Validates each record (unique ids, finite positions, vis range, t
 * non-decreasing across records) and reports failures with line numbers.
 * Reads one line per call; never buffers the file.
 */
class ObservationReader {
 public:
  explicit ObservationReader(std::istream& in) : in_(&in) {}

  // nullopt at end of input; throws ParseError on a malformed record.
  std::optional<ObservationRecord> next();

  int lines_read() const { return line_; }

 private:
  std::istream* in_;
  int line_ = 0;
  bool have_last_t_ = false;
  double last_t_ = 0.0;
};

void write_observation_line(std::ostream& out, double t,
                            std::span<const LandmarkObservation> landmarks);

// Ground-truth joint JSON (single object, schema mirrors GroundTruthJoint).
GroundTruthJoint read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const GroundTruthJoint& gt);

// Final estimate as written by the estimate command.
struct EstimateReport {
  JointType joint_type = JointType::Disconnected;
  std::optional<Vec3> axis_direction;
  std::optional<Vec3> axis_point;
  double q_max_observed = 0.0;
  int frames = 0;
  double frames_per_second = 0.0;  // input-stream rate; wall clock goes to the console
  std::vector<int> flagged_outliers;
  std::optional<double> tangent_error_deg;
  std::optional<std::string> beliefs_file;  // per-frame belief JSONL sidecar
};

void write_report(const std::filesystem::path& path, const EstimateReport& report);

// Reads the axis fields needed for evaluation from either a report JSON or a
// ground-truth JSON (the formats share key meanings; "joint_type"/"type").
EstimateReport read_estimate(const std::filesystem::path& path);

void write_belief_line(std::ostream& out, const FrameBelief& belief);

// One benchmark result row; failed runs carry the failure note in `status`.
struct BenchRow {
  std::string scenario;
  std::string method;
  std::string joint_type;
  std::optional<double> tangent_error_deg;
  std::string status = "ok";
};

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace handkin::io
