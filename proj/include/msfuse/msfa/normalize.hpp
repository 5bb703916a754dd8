#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "msfuse/msfa/cube.hpp"

namespace msfuse::msfa {

struct NormalizeOptions {
  double low_percentile = 1.0;
  double high_percentile = 99.0;
};

struct NormalizedCube {
  SpectralCube cube;
  std::vector<bool> degenerate;  ///< per band: robust range was empty, band zeroed
};

/// Nearest-rank percentile (q in [0,100]) of an unsorted sample; the result is always one of the samples.
inline float percentile_nearest_rank(std::vector<float> values, double q) {
  if (values.empty()) return 0.0f;
  const auto n = values.size();
  const auto k = static_cast<std::size_t>(std::lround(q / 100.0 * static_cast<double>(n - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<long>(k), values.end());
  return values[k];
}

/// Stretches every band so its low/high percentiles map to 0 and 1, then clamps.
inline NormalizedCube normalize_channels(const SpectralCube& cube, NormalizeOptions opt = {}) {
  NormalizedCube out{cube, std::vector<bool>(static_cast<std::size_t>(cube.bands()), false)};
  for (int b = 0; b < cube.bands(); ++b) {
    auto src = cube.band(b);
    std::vector<float> tmp(src.begin(), src.end());
    const float lo = percentile_nearest_rank(tmp, opt.low_percentile);
    const float hi = percentile_nearest_rank(std::move(tmp), opt.high_percentile);
    auto dst = out.cube.band(b);
    if (!(hi > lo)) {
      std::fill(dst.begin(), dst.end(), 0.0f);
      out.degenerate[static_cast<std::size_t>(b)] = true;
      continue;
    }
    const double range = static_cast<double>(hi) - lo;
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = static_cast<float>(std::clamp((static_cast<double>(src[i]) - lo) / range, 0.0, 1.0));
  }
  return out;
}

/// Per-pixel arithmetic mean over bands.
inline GrayImage spectral_average(const SpectralCube& cube) {
  GrayImage gray(cube.width(), cube.height(), 0.0f);
  if (cube.bands() == 0) return gray;
  std::vector<double> acc(cube.plane_size(), 0.0);
  for (int b = 0; b < cube.bands(); ++b) {
    auto src = cube.band(b);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
  }
  auto dst = gray.pixels();
  for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i] / cube.bands());
  return gray;
}

/// Normalized spectral mean used as the single-channel view for correspondence.
inline GrayImage to_gray(const SpectralCube& cube, NormalizeOptions opt = {}) {
  return spectral_average(normalize_channels(cube, opt).cube);
}

}  // namespace msfuse::msfa
