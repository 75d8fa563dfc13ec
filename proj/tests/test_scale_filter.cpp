#include <gtest/gtest.h>

#include <random>

#include "ptav/dcf_tracker.hpp"
#include "ptav/scale_filter.hpp"

using namespace ptav;

namespace {

// Smooth random texture (bilinear upsampled noise) so resampling is well behaved.
cv::Mat texture(int size, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  cv::Mat coarse(size / 6, size / 6, CV_64F);
  for (auto it = coarse.begin<double>(); it != coarse.end<double>(); ++it) *it = u(rng);
  cv::Mat out;
  cv::resize(coarse, out, {size, size}, 0, 0, cv::INTER_CUBIC);
  cv::min(cv::max(out, 0.0), 1.0, out);
  return out;
}

// Zooms `img` about its center by `factor`.
Frame zoomed(const cv::Mat& img, double factor) {
  const cv::Point2d c(img.cols / 2.0, img.rows / 2.0);
  cv::Mat m = cv::getRotationMatrix2D(c, 0.0, factor);
  cv::Mat out;
  cv::warpAffine(img, out, m, img.size(), cv::INTER_LINEAR, cv::BORDER_REFLECT);
  cv::min(cv::max(out, 0.0), 1.0, out);
  return Frame(0, out);
}

struct ScaleFixture {
  ScaleSampler sampler;
  ScaleModel model;
  Point center;
};

ScaleFixture make(const Frame& frame, ScaleParams params) {
  FeatureParams features;
  ScaleFixture s;
  s.center = {frame.width() / 2.0, frame.height() / 2.0};
  s.sampler = make_scale_sampler(params, {48, 48}, features, nullptr);
  s.model = init_scale_model(s.sampler, frame, s.center, 1.0, 0.01, 0.025);
  return s;
}

}  // namespace

TEST(ScaleFilter, SingleLevelNeverChangesScale) {
  const Frame f(0, texture(160, 1));
  ScaleParams p;
  p.num_scales = 1;
  ScaleFixture s = make(f, p);
  const ScaleModel next = estimate_scale(s.model, s.sampler, zoomed(texture(160, 1), 1.2), s.center);
  EXPECT_EQ(next.current_scale, 1.0);
}

TEST(ScaleFilter, SelfMatchKeepsScale) {
  const Frame f(0, texture(160, 2));
  ScaleFixture s = make(f, {});
  const ScaleModel next = estimate_scale(s.model, s.sampler, f, s.center);
  EXPECT_DOUBLE_EQ(next.current_scale, 1.0);
}

TEST(ScaleFilter, FollowsZoom) {
  const cv::Mat img = texture(200, 3);
  ScaleParams p;
  p.num_scales = 17;
  p.scale_step = 1.05;
  ScaleFixture s = make(Frame(0, img), p);
  const ScaleModel up = estimate_scale(s.model, s.sampler, zoomed(img, std::pow(1.05, 3)), s.center);
  EXPECT_NEAR(std::log(up.current_scale) / std::log(1.05), 3.0, 1.0 + 1e-9);  // within one level, inclusive
  const ScaleModel down = estimate_scale(s.model, s.sampler, zoomed(img, std::pow(1.05, -3)), s.center);
  EXPECT_NEAR(std::log(down.current_scale) / std::log(1.05), -3.0, 1.0 + 1e-9);
}

TEST(ScaleFilter, ScaleIsClampedToFrame) {
  const Frame f(0, texture(60, 4));
  ScaleFixture s = make(f, {});
  EXPECT_LE(s.model.max_scale * 48, 60.0 + 1e-9);
  EXPECT_GE(s.model.min_scale * 48, 5.0 - 1e-9);
}

TEST(ScaleFilter, RejectsEvenLevelCount) {
  ScaleParams p;
  p.num_scales = 4;
  EXPECT_THROW(make_scale_sampler(p, {10, 10}, {}, nullptr), ConfigError);
}

TEST(DcfTracker, FollowsTranslatingTexture) {
  const cv::Mat img = texture(240, 5);
  const BoundingBox init(90, 90, 40, 40);
  DcfTracker t;
  t.initialize(Frame(0, img(cv::Rect(0, 0, 200, 200)).clone()), init);
  // Camera pans: content moves by (-4, -2) per frame relative to the crop.
  for (int k = 1; k <= 8; ++k) {
    const Frame f(k, img(cv::Rect(4 * k, 2 * k, 200, 200)).clone());
    const BoundingBox b = t.track(f);
    EXPECT_NEAR(b.center().x, init.center().x - 4 * k, 2.5) << k;
    EXPECT_NEAR(b.center().y, init.center().y - 2 * k, 2.5) << k;
  }
}

TEST(DcfTracker, RestoreRewindsState) {
  const cv::Mat img = texture(200, 6);
  DcfTracker t;
  t.initialize(Frame(0, img), {80, 80, 32, 32});
  const auto snap = t.state();
  const BoundingBox before = t.box();
  t.track(Frame(1, img(cv::Rect(0, 0, 200, 200)).clone()));
  t.relearn(Frame(1, img), {60, 70, 32, 32});
  EXPECT_NE(t.box(), before);
  t.restore(snap);
  EXPECT_EQ(t.box(), before);
}
