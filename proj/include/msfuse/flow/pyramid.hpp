#pragma once

#include <vector>

#include "msfuse/filters.hpp"
#include "msfuse/image.hpp"

namespace msfuse::flow {

/// Binomial blur followed by 2x decimation; odd sizes round up.
inline GrayImage downsample2(const GrayImage& img) {
  static const std::vector<double> k{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  const GrayImage b = convolve_separable(img, k, k);
  GrayImage out((img.width() + 1) / 2, (img.height() + 1) / 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = b(2 * x, 2 * y);
  return out;
}

/// Level 0 is the input. Halving stops before the smaller side drops under `min_dim`.
inline std::vector<GrayImage> build_pyramid(const GrayImage& img, int min_dim = 32) {
  std::vector<GrayImage> levels{img};
  while (true) {
    const GrayImage& top = levels.back();
    const int nw = (top.width() + 1) / 2, nh = (top.height() + 1) / 2;
    if (std::min(nw, nh) < min_dim) break;
    levels.push_back(downsample2(top));
  }
  return levels;
}

}  // namespace msfuse::flow
