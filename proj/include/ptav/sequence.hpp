#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "ptav/geometry.hpp"

namespace ptav {

namespace fs = std::filesystem;

class SequenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frames plus one ground-truth box per frame (0-based coordinates).
struct Sequence {
  std::string name;
  std::vector<fs::path> frame_files;  // empty for in-memory sequences
  std::vector<Frame> frames;
  std::vector<BoundingBox> ground_truth;

  std::size_t size() const { return frames.size(); }
};

inline void validate(const Sequence& s) {
  if (s.frames.empty()) throw SequenceError(s.name + ": sequence has no frames");
  if (s.frames.size() != s.ground_truth.size()) {
    throw SequenceError(s.name + ": " + std::to_string(s.frames.size()) + " frames but " +
                        std::to_string(s.ground_truth.size()) + " ground-truth boxes");
  }
}

/// Parses OTB `groundtruth_rect.txt` content: `x,y,w,h` per line, separated
/// by commas, tabs or spaces, 1-based. Returned boxes are 0-based.
inline std::vector<BoundingBox> parse_ground_truth(std::istream& in, const std::string& origin) {
  std::vector<BoundingBox> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::replace_if(line.begin(), line.end(), [](char c) { return c == ',' || c == '\t'; }, ' ');
    std::istringstream fields(line);
    std::vector<double> v;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        const double d = std::stod(tok, &used);
        if (used != tok.size() || !std::isfinite(d)) throw std::invalid_argument(tok);
        v.push_back(d);
      } catch (const std::exception&) {
        throw SequenceError(origin + ":" + std::to_string(number) + ": malformed value '" + tok + "'");
      }
    }
    if (v.size() != 4) {
      throw SequenceError(origin + ":" + std::to_string(number) + ": expected 4 values, got " +
                          std::to_string(v.size()));
    }
    if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
      throw SequenceError(origin + ":" + std::to_string(number) + ": box width and height must be positive");
    }
    out.emplace_back(v[0] - 1.0, v[1] - 1.0, v[2], v[3]);
  }
  return out;
}

namespace detail {

inline bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".bmp";
}

inline long frame_number(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw SequenceError("image file name is not a frame number: " + p.string());
  }
  return std::stol(stem);
}

}  // namespace detail

/// Loads an OTB-layout directory: `img/NNNN.{jpg,png}` and `groundtruth_rect.txt`.
inline Sequence load_sequence(const fs::path& dir) {
  Sequence seq;
  seq.name = dir.filename().string();
  if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
  const fs::path img_dir = dir / "img";
  const fs::path gt_path = dir / "groundtruth_rect.txt";
  if (!fs::is_directory(img_dir)) throw SequenceError("missing image directory: " + img_dir.string());
  if (!fs::is_regular_file(gt_path)) throw SequenceError("missing ground-truth file: " + gt_path.string());

  std::vector<std::pair<long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(img_dir)) {
    if (entry.is_regular_file() && detail::is_image_file(entry.path())) {
      files.emplace_back(detail::frame_number(entry.path()), entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].first == files[i - 1].first) {
      throw SequenceError("duplicate frame number " + std::to_string(files[i].first) + " in " + img_dir.string());
    }
  }
  if (files.empty()) throw SequenceError("no images in " + img_dir.string());

  std::ifstream gt(gt_path);
  seq.ground_truth = parse_ground_truth(gt, gt_path.string());
  if (seq.ground_truth.size() != files.size()) {
    throw SequenceError(gt_path.string() + ": " + std::to_string(seq.ground_truth.size()) +
                        " ground-truth lines but " + std::to_string(files.size()) + " images");
  }

  seq.frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const cv::Mat image = cv::imread(files[i].second.string(), cv::IMREAD_UNCHANGED);
    if (image.empty()) throw SequenceError("cannot decode image: " + files[i].second.string());
    seq.frames.push_back(frame_from_image(static_cast<int>(i), image));
    seq.frame_files.push_back(files[i].second);
  }
  return seq;
}

/// Writes an OTB-layout directory: 8-bit PNG frames numbered from 0001 and
/// 1-based ground truth.
inline void write_sequence(const Sequence& seq, const fs::path& dir) {
  validate(seq);
  fs::create_directories(dir / "img");
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    cv::Mat out;
    seq.frames[i].pixels().convertTo(out, CV_8U, 255.0);
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.png", i + 1);
    const fs::path path = dir / "img" / name;
    if (!cv::imwrite(path.string(), out)) throw SequenceError("cannot write " + path.string());
  }
  std::ofstream gt(dir / "groundtruth_rect.txt");
  if (!gt) throw SequenceError("cannot write " + (dir / "groundtruth_rect.txt").string());
  char line[160];
  for (const auto& b : seq.ground_truth) {
    std::snprintf(line, sizeof line, "%.4f,%.4f,%.4f,%.4f\n", b.x() + 1.0, b.y() + 1.0, b.w(), b.h());
    gt << line;
  }
}

}  // namespace ptav
