#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "ptav/features.hpp"

namespace ptav {

using Complex = std::complex<double>;

namespace fourier {

// Full complex spectrum (CV_64FC2) of a real CV_64F grid. 1 x N rows give the 1-D DFT.
inline cv::Mat forward(const cv::Mat& real) {
  cv::Mat out;
  cv::dft(real, out, cv::DFT_COMPLEX_OUTPUT);
  return out;
}

// Inverse DFT; returns the real part and the largest imaginary magnitude.
inline std::pair<cv::Mat, double> inverse(const cv::Mat& spectrum) {
  cv::Mat complex_out;
  cv::dft(spectrum, complex_out, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);
  cv::Mat planes[2];
  cv::split(complex_out, planes);
  double lo = 0.0;
  double hi = 0.0;
  cv::minMaxLoc(planes[1], &lo, &hi);
  return {planes[0], std::max(std::abs(lo), std::abs(hi))};
}

inline std::vector<cv::Mat> forward(const FeatureMap& map) {
  std::vector<cv::Mat> out;
  out.reserve(map.channels.size());
  for (const auto& ch : map.channels) out.push_back(forward(ch));
  return out;
}

}  // namespace fourier

/// Desired correlation output: a Gaussian with unit peak at cell (rows/2, cols/2).
struct DesiredOutput {
  cv::Mat g;         // CV_64F
  cv::Mat spectrum;  // DFT of g, CV_64FC2
  double sigma = 0.0;

  int rows() const { return g.rows; }
  int cols() const { return g.cols; }
  cv::Point center() const { return {g.cols / 2, g.rows / 2}; }
};

inline DesiredOutput make_label_with_sigma(int rows, int cols, double sigma) {
  if (rows < 1 || cols < 1) throw ConfigError("make_label: shape must be at least 1x1");
  if (!(sigma >= 0.0)) throw ConfigError("make_label: sigma must be >= 0");
  DesiredOutput out;
  out.sigma = sigma;
  out.g = cv::Mat(rows, cols, CV_64F);
  const int cr = rows / 2;
  const int cc = cols / 2;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double d2 = static_cast<double>((r - cr) * (r - cr) + (c - cc) * (c - cc));
      double v = 0.0;
      if (d2 == 0.0) {
        v = 1.0;
      } else if (sigma > 0.0) {
        v = std::exp(-0.5 * d2 / (sigma * sigma));
      }
      out.g.at<double>(r, c) = v;
    }
  }
  out.spectrum = fourier::forward(out.g);
  return out;
}

// Standard deviation = sigma_factor * sqrt(rows * cols).
inline DesiredOutput make_label(int rows, int cols, double sigma_factor) {
  return make_label_with_sigma(rows, cols, sigma_factor * std::sqrt(static_cast<double>(rows) * cols));
}

/// Fourier-domain translation filter: numerators A^l (complex), shared
/// denominator B (real, >= 0). The filter itself is A^l / (B + lambda).
struct FilterModel {
  std::vector<cv::Mat> numerators;  // CV_64FC2, one per feature channel
  cv::Mat denominator;              // CV_64F
  double lambda = 0.01;
  double eta = 0.025;
  DesiredOutput label;

  int depth() const { return static_cast<int>(numerators.size()); }
  cv::Size shape() const { return denominator.size(); }
};

namespace detail {

inline void check_shape(const FeatureMap& f, cv::Size expected, const char* op) {
  if (f.depth() < 1 || f.spatial_size() != expected) {
    throw ConfigError(std::string(op) + ": feature map shape does not match the filter");
  }
}

// conj(G) * F per element.
inline cv::Mat conj_mul(const cv::Mat& g, const cv::Mat& f) {
  cv::Mat out(f.size(), CV_64FC2);
  const auto* gp = g.ptr<Complex>();
  const auto* fp = f.ptr<Complex>();
  auto* op = out.ptr<Complex>();
  const std::size_t n = f.total();
  for (std::size_t i = 0; i < n; ++i) op[i] = std::conj(gp[i]) * fp[i];
  return out;
}

// Sum over channels of |F^k|^2.
inline cv::Mat energy(const std::vector<cv::Mat>& spectra) {
  cv::Mat out = cv::Mat::zeros(spectra.front().size(), CV_64F);
  auto* op = out.ptr<double>();
  const std::size_t n = out.total();
  for (const auto& s : spectra) {
    const auto* sp = s.ptr<Complex>();
    for (std::size_t i = 0; i < n; ++i) op[i] += std::norm(sp[i]);
  }
  return out;
}

}  // namespace detail

inline FilterModel train_initial(const FeatureMap& features, const DesiredOutput& label, double lambda,
                                 double eta = 0.025) {
  if (!(lambda >= 0.0)) throw ConfigError("train_initial: lambda must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("train_initial: eta must lie in [0,1]");
  detail::check_shape(features, label.g.size(), "train_initial");
  const auto spectra = fourier::forward(features);
  FilterModel m;
  m.lambda = lambda;
  m.eta = eta;
  m.label = label;
  m.numerators.reserve(spectra.size());
  for (const auto& f : spectra) m.numerators.push_back(detail::conj_mul(label.spectrum, f));
  m.denominator = detail::energy(spectra);
  return m;
}

/// Linear interpolation of numerator and denominator toward the new sample at
/// rate `eta`. Returns a new model; the input is left untouched.
inline FilterModel update(const FilterModel& model, const FeatureMap& features, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("update: eta must lie in [0,1]");
  detail::check_shape(features, model.shape(), "update");
  if (features.depth() != model.depth()) throw ConfigError("update: channel count mismatch");
  const auto spectra = fourier::forward(features);
  FilterModel next = model;
  next.numerators.clear();
  for (std::size_t l = 0; l < spectra.size(); ++l) {
    cv::Mat fresh = detail::conj_mul(model.label.spectrum, spectra[l]);
    next.numerators.push_back((1.0 - eta) * model.numerators[l] + eta * fresh);
  }
  // Assigning a MatExpr to a Mat that shares the input's buffer would write
  // through to `model`, so build the denominator in fresh storage.
  cv::Mat denominator = (1.0 - eta) * model.denominator + eta * detail::energy(spectra);
  next.denominator = denominator;
  return next;
}

inline FilterModel update(const FilterModel& model, const FeatureMap& features) {
  return update(model, features, model.eta);
}

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// y = IDFT( sum_l conj(A^l) Z^l / (B + lambda) ).
inline cv::Mat respond(const FilterModel& model, const FeatureMap& features) {
  detail::check_shape(features, model.shape(), "respond");
  if (features.depth() != model.depth()) throw ConfigError("respond: channel count mismatch");
  const std::size_t n = model.denominator.total();
  const auto* bp = model.denominator.ptr<double>();
  if (model.lambda == 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (bp[i] == 0.0) throw NumericalError("respond: singular denominator (lambda = 0 and a zero bin)");
    }
  }
  cv::Mat acc = cv::Mat::zeros(model.shape(), CV_64FC2);
  auto* ap = acc.ptr<Complex>();
  const auto spectra = fourier::forward(features);
  for (std::size_t l = 0; l < spectra.size(); ++l) {
    const auto* num = model.numerators[l].ptr<Complex>();
    const auto* z = spectra[l].ptr<Complex>();
    for (std::size_t i = 0; i < n; ++i) ap[i] += std::conj(num[i]) * z[i];
  }
  for (std::size_t i = 0; i < n; ++i) ap[i] /= (bp[i] + model.lambda);

  auto [y, imag] = fourier::inverse(acc);
  const double scale = std::max(1.0, cv::norm(y, cv::NORM_INF));
  if (imag > 1e-6 * scale) throw NumericalError("respond: response is not real");
  return y;
}

struct Peak {
  cv::Point cell;  // x = column, y = row
  double value = 0.0;
};

// Maximum of the grid; ties resolve to the smallest row-major index.
inline Peak locate(const cv::Mat& response) {
  if (response.empty()) throw ConfigError("locate: empty response");
  Peak best{{0, 0}, response.at<double>(0, 0)};
  for (int r = 0; r < response.rows; ++r) {
    const auto* p = response.ptr<double>(r);
    for (int c = 0; c < response.cols; ++c) {
      if (p[c] > best.value) best = {{c, r}, p[c]};
    }
  }
  return best;
}

// Sub-cell peak offset along each axis from a three-point parabola fit on the
// circular neighbours. Each component lies in [-0.5, 0.5].
inline cv::Point2d parabolic_offset(const cv::Mat& response, cv::Point cell) {
  auto fit = [](double left, double mid, double right) {
    const double denom = left - 2.0 * mid + right;
    if (denom >= 0.0) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
  };
  const int rows = response.rows;
  const int cols = response.cols;
  const double mid = response.at<double>(cell.y, cell.x);
  double dx = 0.0;
  double dy = 0.0;
  if (cols > 2) {
    dx = fit(response.at<double>(cell.y, (cell.x + cols - 1) % cols), mid,
             response.at<double>(cell.y, (cell.x + 1) % cols));
  }
  if (rows > 2) {
    dy = fit(response.at<double>((cell.y + rows - 1) % rows, cell.x), mid,
             response.at<double>((cell.y + 1) % rows, cell.x));
  }
  return {dx, dy};
}

}  // namespace ptav
