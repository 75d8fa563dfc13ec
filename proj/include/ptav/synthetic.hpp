#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "ptav/key_value.hpp"
#include "ptav/sequence.hpp"

namespace ptav {

/// A textured square moving over a static textured background, with optional
/// teleport, occlusion and scale-ramp events. Positions are the top-left of
/// the ground-truth box and bounce off the frame border.
struct SyntheticSpec {
  std::string name = "synthetic";
  int width = 320;
  int height = 240;
  int frames = 120;
  double object_width = 32.0;
  double object_height = 32.0;
  double start_x = 60.0;
  double start_y = 100.0;
  double velocity_x = 1.0;
  double velocity_y = 0.5;
  double wobble_amplitude = 0.0;  // sinusoidal vertical wobble, pixels
  double wobble_period = 40.0;    // frames
  double noise = 0.02;            // per-frame Gaussian noise sigma
  int texture_cell = 4;           // block size of both textures, pixels
  std::uint32_t seed = 7;
  int teleport_frame = -1;  // < 0: no teleport
  double teleport_dx = 0.0;
  double teleport_dy = 0.0;
  int occlusion_start = -1;  // object hidden for frames [start, end]
  int occlusion_end = -1;
  double scale_ramp = 1.0;  // per-frame size multiplier
};

inline void validate(const SyntheticSpec& s) {
  auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
  if (s.width < 8) fail("width", "must be >= 8");
  if (s.height < 8) fail("height", "must be >= 8");
  if (s.frames < 1) fail("frames", "must be >= 1");
  if (!(s.object_width >= 4.0)) fail("object_width", "must be >= 4");
  if (!(s.object_height >= 4.0)) fail("object_height", "must be >= 4");
  if (s.object_width > s.width) fail("object_width", "object larger than frame");
  if (s.object_height > s.height) fail("object_height", "object larger than frame");
  if (!(s.noise >= 0.0)) fail("noise", "must be >= 0");
  if (s.texture_cell < 1) fail("texture_cell", "must be >= 1");
  if (!(s.wobble_period > 0.0)) fail("wobble_period", "must be > 0");
  if (!(s.scale_ramp > 0.0)) fail("scale_ramp", "must be > 0");
  if (s.occlusion_start >= 0 && s.occlusion_end < s.occlusion_start) fail("occlusion_end", "must be >= occlusion_start");
  const double last = std::pow(s.scale_ramp, s.frames - 1);
  if (s.object_width * last > s.width || s.object_height * last > s.height) {
    fail("scale_ramp", "object grows larger than frame");
  }
  if (s.object_width * std::min(1.0, last) < 4.0 || s.object_height * std::min(1.0, last) < 4.0) {
    fail("scale_ramp", "object shrinks below 4 pixels");
  }
}

inline SyntheticSpec parse_synthetic_spec(const KeyValueFile& kv) {
  SyntheticSpec s;
  for (const auto& [key, v] : kv.values()) {
    if (key == "name") s.name = v;
    else if (key == "width") s.width = parse_int(key, v);
    else if (key == "height") s.height = parse_int(key, v);
    else if (key == "frames") s.frames = parse_int(key, v);
    else if (key == "object_width") s.object_width = parse_double(key, v);
    else if (key == "object_height") s.object_height = parse_double(key, v);
    else if (key == "start_x") s.start_x = parse_double(key, v);
    else if (key == "start_y") s.start_y = parse_double(key, v);
    else if (key == "velocity_x") s.velocity_x = parse_double(key, v);
    else if (key == "velocity_y") s.velocity_y = parse_double(key, v);
    else if (key == "wobble_amplitude") s.wobble_amplitude = parse_double(key, v);
    else if (key == "wobble_period") s.wobble_period = parse_double(key, v);
    else if (key == "noise") s.noise = parse_double(key, v);
    else if (key == "texture_cell") s.texture_cell = parse_int(key, v);
    else if (key == "seed") s.seed = static_cast<std::uint32_t>(parse_int(key, v));
    else if (key == "teleport_frame") s.teleport_frame = parse_int(key, v);
    else if (key == "teleport_dx") s.teleport_dx = parse_double(key, v);
    else if (key == "teleport_dy") s.teleport_dy = parse_double(key, v);
    else if (key == "occlusion_start") s.occlusion_start = parse_int(key, v);
    else if (key == "occlusion_end") s.occlusion_end = parse_int(key, v);
    else if (key == "scale_ramp") s.scale_ramp = parse_double(key, v);
    else throw ConfigError(key + ": unknown synthetic-spec field");
  }
  validate(s);
  return s;
}

inline std::string to_text(const SyntheticSpec& s) {
  std::ostringstream os;
  os << "name = " << s.name << "\nwidth = " << s.width << "\nheight = " << s.height << "\nframes = " << s.frames
     << "\nobject_width = " << exact_num(s.object_width) << "\nobject_height = " << exact_num(s.object_height)
     << "\nstart_x = " << exact_num(s.start_x) << "\nstart_y = " << exact_num(s.start_y)
     << "\nvelocity_x = " << exact_num(s.velocity_x) << "\nvelocity_y = " << exact_num(s.velocity_y)
     << "\nwobble_amplitude = " << exact_num(s.wobble_amplitude)
     << "\nwobble_period = " << exact_num(s.wobble_period) << "\nnoise = " << exact_num(s.noise)
     << "\ntexture_cell = " << s.texture_cell << "\nseed = " << s.seed << "\nteleport_frame = " << s.teleport_frame
     << "\nteleport_dx = " << exact_num(s.teleport_dx) << "\nteleport_dy = " << exact_num(s.teleport_dy)
     << "\nocclusion_start = " << s.occlusion_start << "\nocclusion_end = " << s.occlusion_end
     << "\nscale_ramp = " << exact_num(s.scale_ramp) << "\n";
  return os.str();
}

namespace detail {

// Reflects v into [lo, hi].
inline double bounce(double v, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  double t = std::fmod(v - lo, 2.0 * span);
  if (t < 0.0) t += 2.0 * span;
  return lo + (t <= span ? t : 2.0 * span - t);
}

inline cv::Mat block_texture(int rows, int cols, int cell, double lo, double hi, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  const int br = (rows + cell - 1) / cell;
  const int bc = (cols + cell - 1) / cell;
  cv::Mat blocks(br, bc, CV_64F);
  for (int r = 0; r < br; ++r) {
    for (int c = 0; c < bc; ++c) blocks.at<double>(r, c) = dist(rng);
  }
  cv::Mat out(rows, cols, CV_64F);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.at<double>(r, c) = blocks.at<double>(r / cell, c / cell);
  }
  return out;
}

}  // namespace detail

/// Ground-truth box of frame k, before any rendering.
inline BoundingBox synthetic_box(const SyntheticSpec& s, int k) {
  const double scale = std::pow(s.scale_ramp, k);
  const double w = s.object_width * scale;
  const double h = s.object_height * scale;
  double x = s.start_x + s.velocity_x * k;
  double y = s.start_y + s.velocity_y * k + s.wobble_amplitude * std::sin(2.0 * std::numbers::pi * k / s.wobble_period);
  if (s.teleport_frame >= 0 && k >= s.teleport_frame) {
    x += s.teleport_dx;
    y += s.teleport_dy;
  }
  return {detail::bounce(x, 0.0, s.width - w), detail::bounce(y, 0.0, s.height - h), w, h};
}

/// Deterministic for a given spec: frames are quantized to 8-bit levels so a
/// PNG round trip is lossless.
inline Sequence generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937 rng(spec.seed);
  const cv::Mat background = detail::block_texture(spec.height, spec.width, spec.texture_cell, 0.1, 0.9, rng);
  const int tex_rows = std::max(1, static_cast<int>(std::round(spec.object_height)));
  const int tex_cols = std::max(1, static_cast<int>(std::round(spec.object_width)));
  const cv::Mat texture = detail::block_texture(tex_rows, tex_cols, spec.texture_cell, 0.0, 1.0, rng);
  std::normal_distribution<double> noise(0.0, 1.0);

  Sequence seq;
  seq.name = spec.name;
  for (int k = 0; k < spec.frames; ++k) {
    const BoundingBox box = synthetic_box(spec, k);
    cv::Mat img = background.clone();
    const bool hidden = spec.occlusion_start >= 0 && k >= spec.occlusion_start && k <= spec.occlusion_end;
    if (!hidden) {
      const int x0 = std::max(0, static_cast<int>(std::floor(box.x())));
      const int y0 = std::max(0, static_cast<int>(std::floor(box.y())));
      const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(box.x() + box.w())));
      const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(box.y() + box.h())));
      for (int y = y0; y <= y1; ++y) {
        const double v = (y + 0.5 - box.y()) / box.h();
        if (v < 0.0 || v >= 1.0) continue;
        for (int x = x0; x <= x1; ++x) {
          const double u = (x + 0.5 - box.x()) / box.w();
          if (u < 0.0 || u >= 1.0) continue;
          img.at<double>(y, x) = texture.at<double>(static_cast<int>(v * tex_rows), static_cast<int>(u * tex_cols));
        }
      }
    }
    cv::Mat quantized(spec.height, spec.width, CV_32F);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        double p = img.at<double>(y, x);
        if (spec.noise > 0.0) p += spec.noise * noise(rng);
        p = std::clamp(p, 0.0, 1.0);
        quantized.at<float>(y, x) = static_cast<float>(std::round(p * 255.0) / 255.0);
      }
    }
    seq.frames.emplace_back(k, quantized);
    seq.ground_truth.push_back(box);
  }
  return seq;
}

}  // namespace ptav
