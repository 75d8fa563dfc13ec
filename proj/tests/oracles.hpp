#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <opencv2/core.hpp>

#include "ptav/features.hpp"

namespace oracle {

using C = std::complex<double>;
using Grid = std::vector<std::vector<C>>;

inline Grid to_grid(const cv::Mat& m) {
  Grid g(m.rows, std::vector<C>(m.cols));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) g[r][c] = m.type() == CV_64FC2 ? m.at<C>(r, c) : C(m.at<double>(r, c), 0.0);
  return g;
}

// Direct O(n^2) 2-D DFT; sign -1 forward, +1 inverse (with 1/N scaling).
inline Grid dft(const Grid& x, int sign) {
  const int rows = static_cast<int>(x.size()), cols = static_cast<int>(x[0].size());
  Grid out(rows, std::vector<C>(cols));
  for (int u = 0; u < rows; ++u)
    for (int v = 0; v < cols; ++v) {
      C acc = 0.0;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          const double phase = sign * 2.0 * std::numbers::pi * (double(u * r) / rows + double(v * c) / cols);
          acc += x[r][c] * C(std::cos(phase), std::sin(phase));
        }
      out[u][v] = sign > 0 ? acc / double(rows * cols) : acc;
    }
  return out;
}

// Multi-channel filter response computed spatially: the filter h^l is the
// inverse DFT of conj(G) F^l / (sum_k |F^k|^2 + lambda), and the response is
// sum_l sum_x h^l(x) z^l(x + tau), indices circular.
inline cv::Mat spatial_response(const std::vector<cv::Mat>& f, const cv::Mat& g, const std::vector<cv::Mat>& z,
                                double lambda) {
  const int rows = g.rows, cols = g.cols;
  const Grid G = dft(to_grid(g), -1);
  std::vector<Grid> F;
  for (const auto& ch : f) F.push_back(dft(to_grid(ch), -1));
  std::vector<std::vector<double>> B(rows, std::vector<double>(cols, lambda));
  for (const auto& Fl : F)
    for (int u = 0; u < rows; ++u)
      for (int v = 0; v < cols; ++v) B[u][v] += std::norm(Fl[u][v]);

  cv::Mat y = cv::Mat::zeros(rows, cols, CV_64F);
  for (std::size_t l = 0; l < f.size(); ++l) {
    Grid H(rows, std::vector<C>(cols));
    for (int u = 0; u < rows; ++u)
      for (int v = 0; v < cols; ++v) H[u][v] = std::conj(G[u][v]) * F[l][u][v] / B[u][v];
    const Grid h = dft(H, +1);
    for (int tr = 0; tr < rows; ++tr)
      for (int tc = 0; tc < cols; ++tc) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c)
            acc += h[r][c].real() * z[l].at<double>((r + tr) % rows, (c + tc) % cols);
        y.at<double>(tr, tc) += acc;
      }
  }
  return y;
}

inline ptav::FeatureMap random_map(int rows, int cols, int depth, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ptav::FeatureMap m;
  for (int k = 0; k < depth; ++k) {
    cv::Mat ch(rows, cols, CV_64F);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) ch.at<double>(r, c) = n(rng);
    m.channels.push_back(ch);
  }
  return m;
}

inline ptav::FeatureMap circular_shift(const ptav::FeatureMap& m, int dy, int dx) {
  ptav::FeatureMap out;
  out.cell_size = m.cell_size;
  for (const auto& ch : m.channels) {
    cv::Mat s(ch.size(), CV_64F);
    for (int r = 0; r < ch.rows; ++r)
      for (int c = 0; c < ch.cols; ++c)
        s.at<double>(((r + dy) % ch.rows + ch.rows) % ch.rows, ((c + dx) % ch.cols + ch.cols) % ch.cols) =
            ch.at<double>(r, c);
    out.channels.push_back(s);
  }
  return out;
}

}  // namespace oracle
