#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptav/config.hpp"
#include "ptav/dcf_tracker.hpp"
#include "ptav/engine.hpp"
#include "ptav/metrics.hpp"
#include "ptav/sequence.hpp"
#include "ptav/verifier.hpp"

namespace ptav {

/// Result of one one-pass evaluation over a sequence.
struct EvaluationReport {
  std::string sequence;
  std::vector<BoundingBox> boxes;
  std::vector<BoundingBox> ground_truth;
  std::vector<double> center_errors;
  std::vector<double> ious;
  double dpr = 0.0;  // center error <= 20 px
  double osr = 0.0;  // IoU >= 0.5
  std::vector<double> precision;
  SuccessCurve success;
  double seconds = 0.0;  // engine loop only
  double fps = 0.0;
  int requests = 0;
  int corrections = 0;
  std::map<std::string, std::size_t> event_summary;
  RunConfig config;
  std::shared_ptr<EventLog> log;
};

/// Fills the metric fields of a report from predictions and ground truth.
inline EvaluationReport evaluate(std::string name, std::vector<BoundingBox> boxes, std::vector<BoundingBox> gt) {
  EvaluationReport r;
  r.sequence = std::move(name);
  r.precision = precision_curve(boxes, gt);
  r.success = success_curve(boxes, gt);
  r.dpr = distance_precision_rate(boxes, gt);
  r.osr = overlap_success_rate(boxes, gt);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    r.center_errors.push_back(center_distance(boxes[i], gt[i]));
    r.ious.push_back(iou(boxes[i], gt[i]));
  }
  r.boxes = std::move(boxes);
  r.ground_truth = std::move(gt);
  return r;
}

// Builds the verifier from a run config; nullptr when verification is off.
inline std::unique_ptr<Verifier> make_verifier(const RunConfig& cfg) {
  if (!cfg.use_verifier) return nullptr;
  return std::make_unique<CorrelationVerifier>(cfg.detection());
}

/// Initializes once from frame 0's ground truth and runs to the end.
inline EvaluationReport run_ope(const Sequence& seq, const RunConfig& cfg, Verifier* verifier = nullptr) {
  validate(seq);
  validate(cfg);
  std::unique_ptr<Verifier> owned;
  if (!verifier && cfg.use_verifier) {
    owned = make_verifier(cfg);
    verifier = owned.get();
  }
  DcfTracker tracker(cfg.tracker_params());
  RunResult res = verifier ? run(std::move(tracker), *verifier, seq.frames, seq.ground_truth[0], cfg.engine())
                           : track_only(std::move(tracker), seq.frames, seq.ground_truth[0]);
  EvaluationReport r = evaluate(seq.name, std::move(res.boxes), seq.ground_truth);
  r.seconds = res.seconds;
  r.fps = res.seconds > 0.0 ? static_cast<double>(seq.size()) / res.seconds : 0.0;
  r.requests = res.requests;
  r.corrections = res.corrections;
  r.event_summary = res.log->summary();
  r.config = cfg;
  r.log = res.log;
  return r;
}

/// JSON report. With `include_timing` false the timing fields are null, so
/// deterministic runs serialize byte-identically.
inline nlohmann::ordered_json report_json(const EvaluationReport& r, bool include_timing) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["sequence"] = r.sequence;
  j["frames"] = r.boxes.size();
  j["dpr_at_20"] = r.dpr;
  j["osr_at_0_5"] = r.osr;
  j["auc"] = r.success.auc;
  j["conventions"] = {{"dpr_at_20", "fraction of frames with center error <= 20 px"},
                      {"osr_at_0_5", "fraction of frames with IoU >= 0.5"},
                      {"precision_curve", "fraction with center error <= t, t = 0..50 px"},
                      {"success_curve", "fraction with IoU > t (strict), t = 0, 0.05, ..., 1"},
                      {"auc", "mean of the 21 success values"}};
  j["precision_curve"] = r.precision;
  j["success_curve"] = r.success.values;
  if (include_timing) {
    j["fps"] = r.fps;
    j["engine_seconds"] = r.seconds;
  } else {
    j["fps"] = nullptr;
    j["engine_seconds"] = nullptr;
  }
  j["requests"] = r.requests;
  j["corrections"] = r.corrections;
  j["events"] = r.event_summary;
  ordered_json config = ordered_json::object();
  const KeyValueFile effective = KeyValueFile::parse(to_text(r.config));
  for (const auto& [k, v] : effective.values()) config[k] = v;
  j["config"] = config;
  ordered_json boxes = ordered_json::array();
  for (const auto& b : r.boxes) boxes.push_back({b.x(), b.y(), b.w(), b.h()});
  j["boxes"] = boxes;
  return j;
}

/// Per-frame CSV: frame,x,y,w,h,center_err,iou (0-based coordinates).
inline std::string frames_csv(const EvaluationReport& r) {
  std::string out = "frame,x,y,w,h,center_err,iou\n";
  char line[256];
  for (std::size_t i = 0; i < r.boxes.size(); ++i) {
    const auto& b = r.boxes[i];
    std::snprintf(line, sizeof line, "%zu,%.4f,%.4f,%.4f,%.4f,%.4f,%.6f\n", i, b.x(), b.y(), b.w(), b.h(),
                  r.center_errors[i], r.ious[i]);
    out += line;
  }
  return out;
}

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace detail

/// Writes report.json, frames.csv, events.log and effective.cfg into `dir`.
inline void write_report(const EvaluationReport& r, const fs::path& dir, bool include_timing) {
  fs::create_directories(dir);
  detail::write_text(dir / "report.json", report_json(r, include_timing).dump(2) + "\n");
  detail::write_text(dir / "frames.csv", frames_csv(r));
  detail::write_text(dir / "events.log", r.log ? r.log->text() : std::string{});
  detail::write_text(dir / "effective.cfg", to_text(r.config));
}

struct Aggregate {
  std::vector<std::string> sequences;
  double mean_dpr = 0.0;
  double mean_osr = 0.0;
  double mean_auc = 0.0;
  double fps = 0.0;  // total frames / total engine seconds
  std::size_t frames = 0;
};

inline Aggregate aggregate(const std::vector<EvaluationReport>& reports) {
  Aggregate a;
  if (reports.empty()) return a;
  double seconds = 0.0;
  for (const auto& r : reports) {
    a.sequences.push_back(r.sequence);
    a.mean_dpr += r.dpr;
    a.mean_osr += r.osr;
    a.mean_auc += r.success.auc;
    a.frames += r.boxes.size();
    seconds += r.seconds;
  }
  const double n = static_cast<double>(reports.size());
  a.mean_dpr /= n;
  a.mean_osr /= n;
  a.mean_auc /= n;
  a.fps = seconds > 0.0 ? static_cast<double>(a.frames) / seconds : 0.0;
  return a;
}

inline nlohmann::ordered_json aggregate_json(const Aggregate& a, const std::vector<std::string>& skipped,
                                             bool include_timing) {
  nlohmann::ordered_json j;
  j["sequences"] = a.sequences;
  j["skipped"] = skipped;
  j["frames"] = a.frames;
  j["mean_dpr_at_20"] = a.mean_dpr;
  j["mean_osr_at_0_5"] = a.mean_osr;
  j["mean_auc"] = a.mean_auc;
  if (include_timing) {
    j["fps"] = a.fps;
  } else {
    j["fps"] = nullptr;
  }
  return j;
}

}  // namespace ptav
