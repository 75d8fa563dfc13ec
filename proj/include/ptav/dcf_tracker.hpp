#pragma once

#include <cmath>
#include <concepts>
#include <memory>
#include <stdexcept>

#include "ptav/correlation_filter.hpp"
#include "ptav/features.hpp"
#include "ptav/geometry.hpp"
#include "ptav/scale_filter.hpp"

namespace ptav {

// Anything the engine can drive, snapshot, and rewind.
template <class T>
concept TrackerModel = std::copy_constructible<typename T::State> &&
                       requires(T t, const T ct, const Frame& f, const BoundingBox& b, const typename T::State& s) {
                         t.initialize(f, b);
                         { t.track(f) } -> std::same_as<BoundingBox>;
                         t.relearn(f, b);
                         { ct.state() } -> std::convertible_to<typename T::State>;
                         t.restore(s);
                       };

struct DcfParams {
  double lambda = 0.01;
  double eta = 0.025;
  double padding = 2.0;
  double sigma_factor = 1.0 / 16.0;
  int cell_size = 4;
  int orientation_bins = 9;
  int pca_dims = 5;
  double max_template_area = 96.0 * 96.0;
  bool subpixel = false;
  ScaleParams scale;
};

inline void validate(const DcfParams& p) {
  if (!(p.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw ConfigError("eta must lie in [0,1]");
  if (!(p.padding >= 1.0)) throw ConfigError("padding must be >= 1");
  if (!(p.sigma_factor > 0.0)) throw ConfigError("sigma_factor must be > 0");
  if (p.cell_size < 1) throw ConfigError("cell_size must be >= 1");
  if (p.orientation_bins < 1) throw ConfigError("orientation_bins must be >= 1");
  if (p.pca_dims < 1 || p.pca_dims > p.orientation_bins + 1) {
    throw ConfigError("pca_dims must lie in [1, orientation_bins + 1]");
  }
  if (p.scale.num_scales < 1 || p.scale.num_scales % 2 == 0) throw ConfigError("num_scales must be odd");
  if (!(p.scale.scale_step > 1.0)) throw ConfigError("scale_step must be > 1");
}

/// Multi-channel correlation filter tracker with a PCA-compressed
/// intensity+HOG representation and a separate 1-D scale filter.
class DcfTracker {
 public:
  // Everything that changes frame to frame. Copying it is a snapshot; the
  // cv::Mat members are never written in place, so shallow copies are safe.
  struct State {
    Point position;
    FilterModel translation;
    ScaleModel scale;
  };

  explicit DcfTracker(DcfParams params = {}) : params_(params) { validate(params_); }

  void initialize(const Frame& frame, const BoundingBox& box) {
    auto ctx = std::make_shared<Context>();
    ctx->base_size = box.size();
    ctx->window = box.size().scaled(params_.padding);
    const double area = ctx->window.width * ctx->window.height;
    const double shrink = area > params_.max_template_area ? std::sqrt(params_.max_template_area / area) : 1.0;
    const int cell = params_.cell_size;
    auto snap = [cell](double v) { return std::max(2 * cell, round_half_up(v / cell) * cell); };
    ctx->template_size = {snap(ctx->window.width * shrink), snap(ctx->window.height * shrink)};
    ctx->features = {cell, params_.orientation_bins, true, 1e-5};

    const cv::Mat patch = resize_patch(crop_patch(frame, box.center(), ctx->window), ctx->template_size);
    const FeatureMap raw = extract_features(patch, ctx->features);
    ctx->projector = std::make_shared<const PcaProjector>(pca_fit(std::span(&raw, 1), params_.pca_dims));
    ctx->cosine = hann_window(raw.rows(), raw.cols());
    ctx->label = make_label(raw.rows(), raw.cols(), params_.sigma_factor);
    ctx->scale = make_scale_sampler(params_.scale, ctx->base_size, ctx->features, ctx->projector);
    ctx_ = ctx;

    state_.position = box.center();
    state_.translation = train_initial(project(raw), ctx_->label, params_.lambda, params_.eta);
    state_.scale = init_scale_model(ctx_->scale, frame, state_.position, 1.0, params_.lambda, params_.eta);
  }

  BoundingBox track(const Frame& frame) {
    require_initialized();
    const double scale = state_.scale.current_scale;
    const cv::Mat y = respond(state_.translation, sample(frame, state_.position, scale));
    const Peak peak = locate(y);
    cv::Point2d shift(peak.cell.x - ctx_->label.center().x, peak.cell.y - ctx_->label.center().y);
    if (params_.subpixel) shift += parabolic_offset(y, peak.cell);
    const double px_per_cell_x = params_.cell_size * ctx_->window.width * scale / ctx_->template_size.width;
    const double px_per_cell_y = params_.cell_size * ctx_->window.height * scale / ctx_->template_size.height;
    state_.position.x += shift.x * px_per_cell_x;
    state_.position.y += shift.y * px_per_cell_y;

    state_.scale = estimate_scale(state_.scale, ctx_->scale, frame, state_.position);
    state_.translation = update(state_.translation, sample(frame, state_.position, state_.scale.current_scale));
    return box();
  }

  // Re-learns the translation filter from scratch (eta = 1) at `box`; the
  // scale filter absorbs the frame at its usual rate.
  void relearn(const Frame& frame, const BoundingBox& b) {
    require_initialized();
    state_.position = b.center();
    const double s = std::sqrt(b.area() / (ctx_->base_size.width * ctx_->base_size.height));
    state_.scale.current_scale = std::clamp(s, state_.scale.min_scale, state_.scale.max_scale);
    state_.translation = update(state_.translation, sample(frame, state_.position, state_.scale.current_scale), 1.0);
    state_.scale.filter =
        update(state_.scale.filter, sample_scale_pyramid(ctx_->scale, frame, state_.position, state_.scale.current_scale));
  }

  const State& state() const { return state_; }
  void restore(const State& s) { state_ = s; }

  BoundingBox box() const {
    return BoundingBox::from_center(state_.position, ctx_->base_size.scaled(state_.scale.current_scale));
  }

  const DcfParams& params() const { return params_; }
  const PcaProjector& projector() const { return *ctx_->projector; }

 private:
  struct Context {
    Extent base_size;
    Extent window;
    cv::Size template_size;
    FeatureParams features;
    std::shared_ptr<const PcaProjector> projector;
    cv::Mat cosine;
    DesiredOutput label;
    ScaleSampler scale;
  };

  FeatureMap project(const FeatureMap& raw) const {
    return apply_hann_window(pca_project(*ctx_->projector, raw), ctx_->cosine);
  }

  FeatureMap sample(const Frame& frame, Point center, double scale) const {
    const cv::Mat patch = resize_patch(crop_patch(frame, center, ctx_->window.scaled(scale)), ctx_->template_size);
    return project(extract_features(patch, ctx_->features));
  }

  void require_initialized() const {
    if (!ctx_) throw std::logic_error("DcfTracker used before initialize()");
  }

  DcfParams params_;
  std::shared_ptr<const Context> ctx_;
  State state_;
};

static_assert(TrackerModel<DcfTracker>);

}  // namespace ptav
