#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ptav/features.hpp"
#include "ptav/geometry.hpp"

namespace ptav {

struct DetectionConfig {
  double tau1 = 1.0;  // verification pass threshold
  double tau2 = 1.6;  // detection acceptance threshold
  double beta = 1.5;  // current local-region scale
  double beta_default = 1.5;
  double beta_max = 4.0;
  double beta_step = 0.5;
  int stride = 0;  // pixels; 0 picks max(1, floor(min(w,h)/4))
  std::vector<double> candidate_scales{0.95, 1.0, 1.05};
  int refine_top = 3;  // lattice winners refined on a finer grid; 0 disables
};

inline void validate(const DetectionConfig& c) {
  if (!(c.tau2 >= c.tau1)) throw ConfigError("tau2 must be >= tau1");
  if (!(c.beta_default >= 1.0)) throw ConfigError("beta must be >= 1");
  if (!(c.beta_max >= c.beta_default)) throw ConfigError("beta_max must be >= beta");
  if (!(c.beta_step > 0.0)) throw ConfigError("beta_step must be > 0");
  if (!(c.beta >= c.beta_default && c.beta <= c.beta_max)) throw ConfigError("beta outside [beta, beta_max]");
  if (c.stride < 0) throw ConfigError("stride must be >= 1 (or 0 for automatic)");
  if (c.refine_top < 0) throw ConfigError("refine_top must be >= 0");
  if (c.candidate_scales.empty()) throw ConfigError("candidate_scales must not be empty");
  for (double s : c.candidate_scales) {
    if (!(s > 0.0)) throw ConfigError("candidate_scales must be positive");
  }
}

struct VerifierParams {
  int canonical_side = 32;  // longer side of the resampled patch, pixels
  int cell_size = 8;
  int orientation_bins = 9;
  double blur_sigma = 2.0;  // Gaussian pre-blur at canonical resolution
};

/// First-frame target appearance, stored as a zero-mean unit-norm descriptor
/// so scoring a candidate is one dot product.
struct VerifierTemplate {
  cv::Size canonical_size;
  VerifierParams params;
  std::vector<double> appearance;
};

namespace detail {

// Centers and scales to unit norm; all zeros when the input has no variance.
inline std::vector<double> standardize(std::vector<double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double sq = 0.0;
  for (double& x : v) {
    x -= mean;
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 1e-12)) return std::vector<double>(v.size(), 0.0);
  for (double& x : v) x /= norm;
  return v;
}

// Two equally weighted blocks, each zero-mean and unit-norm: cell intensities,
// and orientation histograms with every orientation channel centered over the
// cells. Centering per channel removes the orientation prior that unrelated
// patches share. Histograms are not normalized per cell, so both blocks are
// linear in pixel contrast and the descriptor is invariant to a*p + b, a > 0.
inline std::vector<double> describe(const Frame& frame, const BoundingBox& box, cv::Size canonical,
                                    const VerifierParams& params) {
  cv::Mat patch = resize_patch(crop_patch(frame, box.center(), box.size()), canonical);
  if (params.blur_sigma > 0.0) {
    cv::GaussianBlur(patch, patch, cv::Size(0, 0), params.blur_sigma, params.blur_sigma, cv::BORDER_REPLICATE);
  }
  FeatureMap map = extract_features(patch, {params.cell_size, params.orientation_bins, false, 0.0});
  std::vector<double> intensity(map.channels[0].begin<double>(), map.channels[0].end<double>());
  std::vector<double> gradients;
  gradients.reserve(static_cast<std::size_t>(map.rows() * map.cols()) * (map.channels.size() - 1));
  for (std::size_t c = 1; c < map.channels.size(); ++c) {
    const double mean = cv::mean(map.channels[c])[0];
    for (auto it = map.channels[c].begin<double>(); it != map.channels[c].end<double>(); ++it) {
      gradients.push_back(*it - mean);
    }
  }
  intensity = standardize(std::move(intensity));
  gradients = standardize(std::move(gradients));
  std::vector<double> out;
  out.reserve(intensity.size() + gradients.size());
  const double w = 1.0 / std::sqrt(2.0);
  for (double x : intensity) out.push_back(w * x);
  for (double x : gradients) out.push_back(w * x);
  return out;
}

}  // namespace detail

inline VerifierTemplate make_verifier_template(const Frame& frame, const BoundingBox& box,
                                               const VerifierParams& params = {}) {
  if (params.canonical_side < 2 * params.cell_size || params.cell_size < 1) {
    throw ConfigError("verifier canonical_side must hold at least two cells");
  }
  const int cell = params.cell_size;
  const double resample = params.canonical_side / std::max(box.w(), box.h());
  auto snap = [cell](double v) { return std::max(2 * cell, round_half_up(v / cell) * cell); };
  VerifierTemplate t;
  t.canonical_size = {snap(box.w() * resample), snap(box.h() * resample)};
  t.params = params;
  t.appearance = detail::describe(frame, box, t.canonical_size, params);
  return t;
}

// 2 * max(0, rho), rho the Pearson correlation of template and candidate
// descriptors; in [0, 2]. A flat candidate scores 0.
inline double score(const VerifierTemplate& t, const Frame& frame, const BoundingBox& box) {
  const auto c = detail::describe(frame, box, t.canonical_size, t.params);
  double rho = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) rho += c[i] * t.appearance[i];
  return 2.0 * std::clamp(rho, 0.0, 1.0);
}

struct Verdict {
  bool passed = false;
  double score = 0.0;
};

inline Verdict verify(const VerifierTemplate& t, const Frame& frame, const BoundingBox& box,
                      const DetectionConfig& cfg) {
  const double s = score(t, frame, box);
  return {s >= cfg.tau1, s};
}

struct Candidate {
  BoundingBox box;
  double score = 0.0;
};

inline double region_side(const BoundingBox& box, double beta) { return beta * std::hypot(box.w(), box.h()); }

inline int effective_stride(const BoundingBox& box, const DetectionConfig& cfg) {
  if (cfg.stride > 0) return cfg.stride;
  return std::max(1, static_cast<int>(std::floor(std::min(box.w(), box.h()) / 4.0)));
}

/// Sliding-window boxes whose centers lie on a stride lattice inside the square
/// local region around `box`. Row-major over the lattice, then by scale.
/// Lattice points outside the frame are skipped, except the region center.
inline std::vector<Candidate> generate_candidates(const BoundingBox& box, const Frame& frame,
                                                  const DetectionConfig& cfg) {
  const double half = region_side(box, cfg.beta) / 2.0;
  const int stride = effective_stride(box, cfg);
  const int reach = static_cast<int>(std::floor(half / stride + 1e-9));
  const Point c = box.center();
  std::vector<Candidate> out;
  for (int i = -reach; i <= reach; ++i) {
    const double cy = c.y + i * stride;
    for (int j = -reach; j <= reach; ++j) {
      const double cx = c.x + j * stride;
      const bool inside = cx >= 0.0 && cy >= 0.0 && cx < frame.width() && cy < frame.height();
      if (!inside && (i != 0 || j != 0)) continue;
      for (double s : cfg.candidate_scales) {
        out.push_back({BoundingBox::from_center({cx, cy}, box.size().scaled(s)), 0.0});
      }
    }
  }
  return out;
}

namespace detail {

// Strict weak "better than" for candidates: higher score, then nearer to
// `origin`. Equal candidates keep their earlier position.
inline bool better(const Candidate& a, const Candidate& b, const BoundingBox& origin) {
  if (a.score != b.score) return a.score > b.score;
  return center_distance(a.box, origin) < center_distance(b.box, origin);
}

}  // namespace detail

inline int refine_step(int stride) { return std::max(1, round_half_up(stride / 8.0)); }

/// Scores every lattice candidate, then searches a finer grid (step
/// refine_step, radius stride/2) around the best `refine_top` of them.
/// Returns the best scoring box; ties go to the candidate nearest the input
/// box, then to the earlier one (lattice order first, refinements after).
inline Candidate detect(const VerifierTemplate& t, const Frame& frame, const BoundingBox& box,
                        const DetectionConfig& cfg) {
  auto candidates = generate_candidates(box, frame, cfg);
  for (auto& cand : candidates) cand.score = score(t, frame, cand.box);

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return detail::better(candidates[a], candidates[b], box); });
  Candidate best = candidates[order.front()];

  const int stride = effective_stride(box, cfg);
  const int step = refine_step(stride);
  const int radius = stride / 2;
  const std::size_t top = std::min(order.size(), static_cast<std::size_t>(cfg.refine_top));
  if (step < stride) {
    for (std::size_t r = 0; r < top; ++r) {
      const Candidate seed = candidates[order[r]];
      const Point c = seed.box.center();
      for (int dy = -radius; dy <= radius; dy += step) {
        for (int dx = -radius; dx <= radius; dx += step) {
          if (dx == 0 && dy == 0) continue;
          Candidate cand{BoundingBox::from_center({c.x + dx, c.y + dy}, seed.box.size()), 0.0};
          cand.score = score(t, frame, cand.box);
          if (detail::better(cand, best, box)) best = cand;
        }
      }
    }
  }
  return best;
}

enum class IntervalSignal { keep, decrease, restore };

struct SearchAdaptation {
  DetectionConfig cfg;
  bool accepted = false;
  IntervalSignal interval = IntervalSignal::keep;
};

inline SearchAdaptation adapt_search(const DetectionConfig& cfg, double detection_score) {
  SearchAdaptation out{cfg, false, IntervalSignal::keep};
  if (detection_score >= cfg.tau2) {
    out.accepted = true;
    out.cfg.beta = cfg.beta_default;
    out.interval = IntervalSignal::restore;
  } else {
    out.cfg.beta = std::min(cfg.beta + cfg.beta_step, cfg.beta_max);
    out.interval = IntervalSignal::decrease;
  }
  return out;
}

/// What a verifier reports for one request.
struct VerifierOutcome {
  bool passed = false;
  double score = 0.0;
  std::optional<BoundingBox> correction;  // set only on an accepted detection
  std::optional<double> detection_score;
  double beta = 1.5;
  IntervalSignal interval = IntervalSignal::keep;
};

/// Plug-in point for verification back ends.
class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual void initialize(const Frame& frame, const BoundingBox& box) = 0;
  virtual VerifierOutcome check(const Frame& frame, const BoundingBox& box) = 0;
  // Current local-region scale (beta).
  virtual double search_scale() const = 0;
};

/// Default verifier: feature correlation against the first-frame appearance,
/// sliding-window re-detection on failure.
class CorrelationVerifier : public Verifier {
 public:
  explicit CorrelationVerifier(DetectionConfig cfg = {}, VerifierParams params = {})
      : cfg_(std::move(cfg)), params_(params) {
    validate(cfg_);
  }

  void initialize(const Frame& frame, const BoundingBox& box) override {
    template_ = make_verifier_template(frame, box, params_);
    cfg_.beta = cfg_.beta_default;
  }

  VerifierOutcome check(const Frame& frame, const BoundingBox& box) override {
    const Verdict v = verify(template_, frame, box, cfg_);
    VerifierOutcome out;
    out.passed = v.passed;
    out.score = v.score;
    if (v.passed) {
      // The target is back under the tracker; the enlarged search is moot.
      cfg_.beta = cfg_.beta_default;
      out.interval = IntervalSignal::restore;
    } else {
      const Candidate best = detect(template_, frame, box, cfg_);
      const SearchAdaptation a = adapt_search(cfg_, best.score);
      cfg_ = a.cfg;
      out.detection_score = best.score;
      out.interval = a.interval;
      if (a.accepted) out.correction = best.box;
    }
    out.beta = cfg_.beta;
    return out;
  }

  double search_scale() const override { return cfg_.beta; }
  const DetectionConfig& config() const { return cfg_; }
  const VerifierTemplate& appearance() const { return template_; }

 private:
  DetectionConfig cfg_;
  VerifierParams params_;
  VerifierTemplate template_;
};

}  // namespace ptav
