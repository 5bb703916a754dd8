#pragma once

#include <cmath>
#include <vector>

#include "msfuse/image.hpp"

namespace msfuse {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  return k;
}

/// Separable convolution with replicate-edge borders.
inline Image<float> convolve_separable(const Image<float>& src, const std::vector<double>& kx, const std::vector<double>& ky) {
  const int w = src.width(), h = src.height();
  const int rx = static_cast<int>(kx.size() / 2), ry = static_cast<int>(ky.size() / 2);
  Image<float> tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -rx; i <= rx; ++i) acc += kx[static_cast<std::size_t>(i + rx)] * src.clamped(x + i, y);
      tmp(x, y) = static_cast<float>(acc);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -ry; i <= ry; ++i) acc += ky[static_cast<std::size_t>(i + ry)] * tmp.clamped(x, y + i);
      out(x, y) = static_cast<float>(acc);
    }
  return out;
}

inline Image<float> gaussian_blur(const Image<float>& src, double sigma) {
  if (sigma <= 0.0) return src;
  const auto k = gaussian_kernel(sigma);
  return convolve_separable(src, k, k);
}

}  // namespace msfuse
