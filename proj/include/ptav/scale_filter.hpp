#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "ptav/correlation_filter.hpp"
#include "ptav/features.hpp"
#include "ptav/geometry.hpp"

namespace ptav {

struct ScaleParams {
  int num_scales = 17;
  double scale_step = 1.02;
  double label_sigma = 1.0;  // in pyramid levels
  double max_sample_area = 1024.0;
};

/// Immutable sampling context for the 1-D scale filter: how each pyramid level
/// is cropped, resampled and reduced to a feature vector.
struct ScaleSampler {
  ScaleParams params;
  Extent base_size;        // target size at scale 1
  cv::Size sample_size;    // every level is resampled to this
  FeatureParams features;
  std::shared_ptr<const PcaProjector> projector;  // optional
  std::vector<double> level_window;               // Hann over levels

  int center_level() const { return params.num_scales / 2; }
  double level_factor(int level) const { return std::pow(params.scale_step, level - center_level()); }
};

inline ScaleSampler make_scale_sampler(const ScaleParams& params, Extent base_size, const FeatureParams& features,
                                       std::shared_ptr<const PcaProjector> projector) {
  if (params.num_scales < 1 || params.num_scales % 2 == 0) throw ConfigError("num_scales must be odd and >= 1");
  if (!(params.scale_step > 1.0)) throw ConfigError("scale_step must be > 1");
  ScaleSampler s;
  s.params = params;
  s.base_size = base_size;
  s.features = features;
  s.projector = std::move(projector);
  const double area = base_size.width * base_size.height;
  const double shrink = area > params.max_sample_area ? std::sqrt(params.max_sample_area / area) : 1.0;
  const int cell = features.cell_size;
  auto snap = [cell](double v) { return std::max(cell, round_half_up(v / cell) * cell); };
  s.sample_size = {snap(base_size.width * shrink), snap(base_size.height * shrink)};
  const cv::Mat w = hann_window(1, params.num_scales);
  for (int i = 0; i < params.num_scales; ++i) s.level_window.push_back(w.at<double>(0, i));
  return s;
}

/// Pyramid of S levels as a FeatureMap of shape 1 x S with one channel per
/// feature dimension, tapered by the level window.
inline FeatureMap sample_scale_pyramid(const ScaleSampler& sampler, const Frame& frame, Point center,
                                       double current_scale) {
  const int levels = sampler.params.num_scales;
  std::vector<std::vector<double>> columns;
  columns.reserve(static_cast<std::size_t>(levels));
  for (int s = 0; s < levels; ++s) {
    const Extent size = sampler.base_size.scaled(current_scale * sampler.level_factor(s));
    const cv::Mat patch = resize_patch(crop_patch(frame, center, size), sampler.sample_size);
    FeatureMap f = extract_features(patch, sampler.features);
    if (sampler.projector) f = pca_project(*sampler.projector, f);
    auto v = f.flatten();
    const double w = sampler.level_window[static_cast<std::size_t>(s)];
    for (auto& x : v) x *= w;
    columns.push_back(std::move(v));
  }
  const std::size_t dims = columns.front().size();
  FeatureMap out;
  out.cell_size = 1;
  out.channels.reserve(dims);
  for (std::size_t k = 0; k < dims; ++k) {
    cv::Mat ch(1, levels, CV_64F);
    for (int s = 0; s < levels; ++s) ch.at<double>(0, s) = columns[static_cast<std::size_t>(s)][k];
    out.channels.push_back(ch);
  }
  return out;
}

/// 1-D correlation filter over the scale pyramid plus the current scale estimate.
struct ScaleModel {
  int num_scales = 17;
  double scale_step = 1.02;
  double current_scale = 1.0;
  double min_scale = 0.0;
  double max_scale = 1e9;
  FilterModel filter;
};

inline ScaleModel init_scale_model(const ScaleSampler& sampler, const Frame& frame, Point center, double scale,
                                   double lambda, double eta) {
  ScaleModel m;
  m.num_scales = sampler.params.num_scales;
  m.scale_step = sampler.params.scale_step;
  m.current_scale = scale;
  const auto label = make_label_with_sigma(1, m.num_scales, sampler.params.label_sigma);
  m.filter = train_initial(sample_scale_pyramid(sampler, frame, center, scale), label, lambda, eta);

  // Keep the target between 5 px and the frame extent.
  const double step = m.scale_step;
  const double min_side = std::min(sampler.base_size.width, sampler.base_size.height);
  m.min_scale = std::pow(step, std::ceil(std::log(std::max(5.0 / min_side, 1e-9)) / std::log(step)));
  const double fit = std::min(frame.width() / sampler.base_size.width, frame.height() / sampler.base_size.height);
  m.max_scale = std::pow(step, std::floor(std::log(std::max(fit, 1e-9)) / std::log(step)));
  if (m.max_scale < m.min_scale) m.max_scale = m.min_scale;
  return m;
}

/// Scores the pyramid around `center`, moves current_scale to the best level,
/// then folds the pyramid at the new scale into the filter.
inline ScaleModel estimate_scale(const ScaleModel& model, const ScaleSampler& sampler, const Frame& frame,
                                 Point center) {
  if (model.num_scales == 1) return model;
  const FeatureMap probe = sample_scale_pyramid(sampler, frame, center, model.current_scale);
  const Peak peak = locate(respond(model.filter, probe));
  const int level = peak.cell.x - sampler.center_level();

  ScaleModel next = model;
  next.current_scale =
      std::clamp(model.current_scale * std::pow(model.scale_step, level), model.min_scale, model.max_scale);
  next.filter = update(model.filter, sample_scale_pyramid(sampler, frame, center, next.current_scale));
  return next;
}

}  // namespace ptav
