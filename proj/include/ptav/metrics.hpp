#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ptav/geometry.hpp"

namespace ptav {

inline constexpr int kPrecisionThresholds = 51;  // 0..50 px
inline constexpr int kSuccessThresholds = 21;    // 0, 0.05, ..., 1.0
inline constexpr double kDprThreshold = 20.0;
inline constexpr double kOsrThreshold = 0.5;

inline double success_threshold(int i) { return i / 20.0; }

namespace detail {

inline void check_lengths(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
  if (pred.size() != gt.size()) throw std::invalid_argument("metrics: prediction and ground-truth lengths differ");
  if (pred.empty()) throw std::invalid_argument("metrics: empty sequence");
}

}  // namespace detail

// precision[t] = fraction of frames with center error <= t, t = 0..50.
inline std::vector<double> precision_curve(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
  detail::check_lengths(pred, gt);
  std::vector<double> curve(kPrecisionThresholds, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = center_distance(pred[i], gt[i]);
    for (int t = 0; t < kPrecisionThresholds; ++t) {
      if (d <= t) curve[static_cast<std::size_t>(t)] += 1.0;
    }
  }
  for (auto& v : curve) v /= static_cast<double>(pred.size());
  return curve;
}

struct SuccessCurve {
  std::vector<double> values;  // fraction with IoU strictly above each threshold
  double auc = 0.0;            // mean of the 21 values
};

inline SuccessCurve success_curve(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt) {
  detail::check_lengths(pred, gt);
  SuccessCurve out;
  out.values.assign(kSuccessThresholds, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double o = iou(pred[i], gt[i]);
    for (int t = 0; t < kSuccessThresholds; ++t) {
      if (o > success_threshold(t)) out.values[static_cast<std::size_t>(t)] += 1.0;
    }
  }
  double sum = 0.0;
  for (auto& v : out.values) {
    v /= static_cast<double>(pred.size());
    sum += v;
  }
  out.auc = sum / kSuccessThresholds;
  return out;
}

// Headline rates: DPR uses <= 20 px, OSR uses IoU >= 0.5.
inline double distance_precision_rate(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt,
                                      double threshold = kDprThreshold) {
  detail::check_lengths(pred, gt);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += center_distance(pred[i], gt[i]) <= threshold;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

inline double overlap_success_rate(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt,
                                   double threshold = kOsrThreshold) {
  detail::check_lengths(pred, gt);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += iou(pred[i], gt[i]) >= threshold;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace ptav
