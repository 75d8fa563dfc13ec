#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <opencv2/core.hpp>

namespace ptav {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// rows x cols x depth grid; one CV_64F matrix per channel.
struct FeatureMap {
  std::vector<cv::Mat> channels;
  int cell_size = 1;

  int rows() const { return channels.empty() ? 0 : channels.front().rows; }
  int cols() const { return channels.empty() ? 0 : channels.front().cols; }
  int depth() const { return static_cast<int>(channels.size()); }
  cv::Size spatial_size() const { return {cols(), rows()}; }

  // Channel-major concatenation, each channel row-major.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows() * cols() * depth()));
    for (const auto& ch : channels) {
      for (int r = 0; r < ch.rows; ++r) {
        const auto* p = ch.ptr<double>(r);
        out.insert(out.end(), p, p + ch.cols);
      }
    }
    return out;
  }
};

struct FeatureParams {
  int cell_size = 4;
  int orientation_bins = 9;
  // Per-cell L2 normalization of the orientation histogram.
  bool normalize_cells = true;
  double epsilon = 1e-5;
};

// Channel 0: cell-mean intensity centered to zero mean over the map.
// Channels 1..bins: unsigned gradient-orientation histograms per cell.
inline FeatureMap extract_features(const cv::Mat& patch, const FeatureParams& params = {}) {
  const int cell = params.cell_size;
  const int bins = params.orientation_bins;
  if (cell < 1 || bins < 1) throw ConfigError("extract_features: cell_size and orientation_bins must be >= 1");
  if (patch.rows < cell || patch.cols < cell) {
    throw ConfigError("extract_features: patch is smaller than one cell");
  }
  cv::Mat img;
  if (patch.type() == CV_64F) {
    img = patch;
  } else {
    patch.convertTo(img, CV_64F);
  }

  const int rows = img.rows / cell;
  const int cols = img.cols / cell;
  FeatureMap map;
  map.cell_size = cell;
  map.channels.reserve(static_cast<std::size_t>(bins + 1));
  for (int k = 0; k <= bins; ++k) map.channels.emplace_back(cv::Mat::zeros(rows, cols, CV_64F));

  const double bin_width = std::numbers::pi / bins;
  const int used_h = rows * cell;
  const int used_w = cols * cell;
  for (int y = 0; y < used_h; ++y) {
    const auto* up = img.ptr<double>(std::max(y - 1, 0));
    const auto* mid = img.ptr<double>(y);
    const auto* down = img.ptr<double>(std::min(y + 1, img.rows - 1));
    const int cr = y / cell;
    for (int x = 0; x < used_w; ++x) {
      const int cc = x / cell;
      map.channels[0].at<double>(cr, cc) += mid[x];
      const double gx = mid[std::min(x + 1, img.cols - 1)] - mid[std::max(x - 1, 0)];
      const double gy = down[x] - up[x];
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += std::numbers::pi;
      int bin = static_cast<int>(theta / bin_width);
      if (bin >= bins) bin = bins - 1;
      map.channels[static_cast<std::size_t>(1 + bin)].at<double>(cr, cc) += mag;
    }
  }

  cv::Mat& intensity = map.channels[0];
  intensity /= static_cast<double>(cell * cell);
  intensity -= cv::mean(intensity)[0];

  if (params.normalize_cells) {
    const double eps2 = params.epsilon * params.epsilon;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        double sq = 0.0;
        for (int k = 1; k <= bins; ++k) {
          const double v = map.channels[static_cast<std::size_t>(k)].at<double>(r, c);
          sq += v * v;
        }
        const double norm = std::sqrt(sq + eps2);
        for (int k = 1; k <= bins; ++k) map.channels[static_cast<std::size_t>(k)].at<double>(r, c) /= norm;
      }
    }
  }
  return map;
}

// Periodic-free Hann taper; a length-1 window is 1.
inline cv::Mat hann_window(int rows, int cols) {
  auto taper = [](int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (n > 1) {
      for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
      }
      w.front() = 0.0;
      w.back() = 0.0;
    }
    return w;
  };
  const auto wr = taper(rows);
  const auto wc = taper(cols);
  cv::Mat out(rows, cols, CV_64F);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.at<double>(r, c) = wr[static_cast<std::size_t>(r)] * wc[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

inline FeatureMap apply_hann_window(const FeatureMap& map, const cv::Mat& window) {
  if (window.size() != map.spatial_size()) throw ConfigError("apply_hann_window: window shape mismatch");
  FeatureMap out;
  out.cell_size = map.cell_size;
  out.channels.reserve(map.channels.size());
  for (const auto& ch : map.channels) out.channels.emplace_back(ch.mul(window));
  return out;
}

inline FeatureMap apply_hann_window(const FeatureMap& map) {
  return apply_hann_window(map, hann_window(map.rows(), map.cols()));
}

/// Linear projection of per-cell feature vectors onto their top principal
/// directions. `basis` is d_in x d_out with orthonormal columns.
struct PcaProjector {
  cv::Mat basis;
  cv::Mat mean;  // 1 x d_in
  std::vector<double> eigenvalues;  // all d_in, descending

  int input_depth() const { return basis.rows; }
  int output_depth() const { return basis.cols; }
};

namespace detail {

inline cv::Mat cell_rows(const FeatureMap& map) {
  const int n = map.rows() * map.cols();
  cv::Mat out(n, map.depth(), CV_64F);
  for (int k = 0; k < map.depth(); ++k) {
    const cv::Mat& ch = map.channels[static_cast<std::size_t>(k)];
    int i = 0;
    for (int r = 0; r < ch.rows; ++r) {
      const auto* p = ch.ptr<double>(r);
      for (int c = 0; c < ch.cols; ++c) out.at<double>(i++, k) = p[c];
    }
  }
  return out;
}

inline FeatureMap from_cell_rows(const cv::Mat& rows_by_depth, int rows, int cols, int cell_size) {
  FeatureMap out;
  out.cell_size = cell_size;
  for (int k = 0; k < rows_by_depth.cols; ++k) {
    cv::Mat ch(rows, cols, CV_64F);
    int i = 0;
    for (int r = 0; r < rows; ++r) {
      auto* p = ch.ptr<double>(r);
      for (int c = 0; c < cols; ++c) p[c] = rows_by_depth.at<double>(i++, k);
    }
    out.channels.push_back(ch);
  }
  return out;
}

}  // namespace detail

inline PcaProjector pca_fit(std::span<const FeatureMap> samples, int d_out) {
  if (samples.empty()) throw ConfigError("pca_fit: at least one sample required");
  const int d = samples.front().depth();
  if (d_out < 1 || d_out > d) throw ConfigError("pca_fit: d_out must lie in [1, d]");

  cv::Mat pooled;
  for (const auto& s : samples) {
    if (s.depth() != d) throw ConfigError("pca_fit: samples disagree on channel count");
    pooled.push_back(detail::cell_rows(s));
  }
  cv::Mat cov;
  cv::Mat mean;
  cv::calcCovarMatrix(pooled, cov, mean, cv::COVAR_NORMAL | cv::COVAR_ROWS | cv::COVAR_SCALE, CV_64F);

  cv::Mat values;
  cv::Mat vectors;  // rows are eigenvectors, descending eigenvalue order
  cv::eigen(cov, values, vectors);

  PcaProjector p;
  p.mean = mean;
  p.basis = cv::Mat(d, d_out, CV_64F);
  for (int k = 0; k < d_out; ++k) {
    // Fix the sign so the largest-magnitude component is positive.
    int arg = 0;
    for (int i = 1; i < d; ++i) {
      if (std::abs(vectors.at<double>(k, i)) > std::abs(vectors.at<double>(k, arg))) arg = i;
    }
    const double sign = vectors.at<double>(k, arg) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < d; ++i) p.basis.at<double>(i, k) = sign * vectors.at<double>(k, i);
  }
  for (int i = 0; i < d; ++i) p.eigenvalues.push_back(values.at<double>(i));
  return p;
}

inline FeatureMap pca_project(const PcaProjector& p, const FeatureMap& map) {
  if (map.depth() != p.input_depth()) throw ConfigError("pca_project: channel count mismatch");
  cv::Mat x = detail::cell_rows(map);
  for (int i = 0; i < x.rows; ++i) x.row(i) -= p.mean;
  return detail::from_cell_rows(x * p.basis, map.rows(), map.cols(), map.cell_size);
}

inline FeatureMap pca_back_project(const PcaProjector& p, const FeatureMap& projected) {
  if (projected.depth() != p.output_depth()) throw ConfigError("pca_back_project: channel count mismatch");
  cv::Mat y = detail::cell_rows(projected);
  cv::Mat x = y * p.basis.t();
  for (int i = 0; i < x.rows; ++i) x.row(i) += p.mean;
  return detail::from_cell_rows(x, projected.rows(), projected.cols(), projected.cell_size);
}

}  // namespace ptav
