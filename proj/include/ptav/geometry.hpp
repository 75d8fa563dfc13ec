#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

namespace ptav {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Patch dimensions in pixels; real-valued until a crop rounds them.
struct Extent {
  double width = 0.0;
  double height = 0.0;

  Extent scaled(double factor) const { return {width * factor, height * factor}; }
};

// Axis-aligned target region, 0-based pixel coordinates, top-left origin.
class BoundingBox {
 public:
  BoundingBox() = default;

  BoundingBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) ||
        !std::isfinite(h)) {
      throw std::invalid_argument("BoundingBox requires finite coordinates and positive size");
    }
  }

  static BoundingBox from_center(Point center, Extent size) {
    return {center.x - size.width / 2.0, center.y - size.height / 2.0, size.width, size.height};
  }

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double area() const { return w_ * h_; }
  Point center() const { return {x_ + w_ / 2.0, y_ + h_ / 2.0}; }
  Extent size() const { return {w_, h_}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double w_ = 1.0;
  double h_ = 1.0;
};

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x() + a.w(), b.x() + b.w()) - std::max(a.x(), b.x()));
  const double iy = std::max(0.0, std::min(a.y() + a.h(), b.y() + b.h()) - std::max(a.y(), b.y()));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline double center_distance(const BoundingBox& a, const BoundingBox& b) {
  const Point ca = a.center();
  const Point cb = b.center();
  return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

// Round to nearest, ties up.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Single-channel intensity image, CV_32F with values in [0,1]. Immutable after
// construction; cv::Mat sharing is safe because nothing writes through it.
class Frame {
 public:
  Frame() = default;

  Frame(int index, cv::Mat pixels) : index_(index), pixels_(std::move(pixels)) {
    if (index_ < 0) throw std::invalid_argument("Frame index must be >= 0");
    if (pixels_.empty() || pixels_.channels() != 1) {
      throw std::invalid_argument("Frame requires a non-empty single-channel image");
    }
    if (pixels_.type() != CV_32F) {
      cv::Mat converted;
      pixels_.convertTo(converted, CV_32F);
      pixels_ = converted;
    }
    double lo = 0.0;
    double hi = 0.0;
    cv::minMaxLoc(pixels_, &lo, &hi);
    if (lo < 0.0 || hi > 1.0 || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("Frame pixel values must lie in [0,1]");
    }
  }

  int index() const { return index_; }
  int width() const { return pixels_.cols; }
  int height() const { return pixels_.rows; }
  const cv::Mat& pixels() const { return pixels_; }

 private:
  int index_ = 0;
  cv::Mat pixels_;
};

// 8-bit gray or BGR image to a luminance frame (0.299R + 0.587G + 0.114B).
inline Frame frame_from_image(int index, const cv::Mat& image) {
  cv::Mat gray;
  if (image.channels() == 3) {
    cv::Mat bgr;
    image.convertTo(bgr, CV_64FC3);
    gray.create(image.rows, image.cols, CV_64F);
    for (int r = 0; r < image.rows; ++r) {
      const auto* src = bgr.ptr<cv::Vec3d>(r);
      auto* dst = gray.ptr<double>(r);
      for (int c = 0; c < image.cols; ++c) {
        dst[c] = 0.114 * src[c][0] + 0.587 * src[c][1] + 0.299 * src[c][2];
      }
    }
  } else if (image.channels() == 1) {
    image.convertTo(gray, CV_64F);
  } else {
    throw std::invalid_argument("unsupported channel count for frame ingestion");
  }
  const double scale = image.depth() == CV_8U ? 1.0 / 255.0 : image.depth() == CV_16U ? 1.0 / 65535.0 : 1.0;
  cv::Mat out;
  gray.convertTo(out, CV_32F, scale);
  cv::min(cv::max(out, 0.0), 1.0, out);
  return Frame(index, out);
}

// Crops a patch of exactly round(size) pixels around `center`, replicating the
// border for any part outside the frame. Output is CV_64F.
inline cv::Mat crop_patch(const Frame& frame, Point center, Extent size) {
  const int w = round_half_up(size.width);
  const int h = round_half_up(size.height);
  if (w < 1 || h < 1) throw std::invalid_argument("crop_patch: patch size must be >= 1 after rounding");

  const int x0 = static_cast<int>(std::floor(center.x - w / 2.0));
  const int y0 = static_cast<int>(std::floor(center.y - h / 2.0));
  const cv::Mat& src = frame.pixels();

  std::vector<int> cols(static_cast<std::size_t>(w));
  for (int c = 0; c < w; ++c) cols[static_cast<std::size_t>(c)] = std::clamp(x0 + c, 0, src.cols - 1);

  cv::Mat out(h, w, CV_64F);
  for (int r = 0; r < h; ++r) {
    const float* row = src.ptr<float>(std::clamp(y0 + r, 0, src.rows - 1));
    auto* dst = out.ptr<double>(r);
    for (int c = 0; c < w; ++c) dst[c] = row[cols[static_cast<std::size_t>(c)]];
  }
  return out;
}

inline cv::Mat resize_patch(const cv::Mat& patch, cv::Size size) {
  if (patch.size() == size) return patch;
  cv::Mat out;
  const bool shrinking = size.width < patch.cols && size.height < patch.rows;
  cv::resize(patch, out, size, 0, 0, shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  return out;
}

}  // namespace ptav
