#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "msfuse/image.hpp"
#include "msfuse/msfa/cube.hpp"

namespace msfuse::fusion {

namespace color {

/// Piecewise Gaussian lobe with separate widths below and above the center.
inline double lobe(double nm, double mu, double s_lo, double s_hi) {
  const double t = (nm - mu) / (nm < mu ? s_lo : s_hi);
  return std::exp(-0.5 * t * t);
}

/// Analytic multi-lobe fit of the CIE 1931 2-degree color matching functions.
inline std::array<double, 3> cmf(double nm) {
  const double x = 1.056 * lobe(nm, 599.8, 37.9, 31.0) + 0.362 * lobe(nm, 442.0, 16.0, 26.7) -
                   0.065 * lobe(nm, 501.1, 20.4, 26.2);
  const double y = 0.821 * lobe(nm, 568.8, 46.9, 40.5) + 0.286 * lobe(nm, 530.9, 16.3, 31.1);
  const double z = 1.217 * lobe(nm, 437.0, 11.8, 36.0) + 0.681 * lobe(nm, 459.0, 26.0, 13.8);
  return {x, y, z};
}

/// CIE D65 relative spectral power, 380..780 nm in 10 nm steps, linearly interpolated.
inline double d65(double nm) {
  static constexpr std::array<double, 41> table{
      49.9755, 54.6482, 82.7549, 91.486,  93.4318, 86.6823, 104.865, 117.008, 117.812, 114.861, 115.923,
      108.811, 109.354, 107.802, 104.790, 107.689, 104.405, 104.046, 100.000, 96.3342, 95.788,  88.6856,
      90.0062, 89.5991, 87.6987, 83.2886, 83.6992, 80.0268, 80.2146, 82.2778, 78.2842, 69.7213, 71.6091,
      74.349,  61.604,  69.8856, 75.087,  63.5927, 46.4182, 66.8054, 63.3828};
  const double pos = std::clamp((nm - 380.0) / 10.0, 0.0, 40.0);
  const auto i = std::min(static_cast<std::size_t>(pos), std::size_t{39});
  const double a = pos - static_cast<double>(i);
  return (1 - a) * table[i] + a * table[i + 1];
}

inline constexpr std::array<double, 3> kD65White{0.95047, 1.0, 1.08883};

inline std::array<double, 3> xyz_to_linear_srgb(const std::array<double, 3>& c) {
  return {3.2404542 * c[0] - 1.5371385 * c[1] - 0.4985314 * c[2], -0.9692660 * c[0] + 1.8760108 * c[1] + 0.0415560 * c[2],
          0.0556434 * c[0] - 0.2040259 * c[1] + 1.0572252 * c[2]};
}

inline double srgb_gamma(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

}  // namespace color

/// Per-band integration weights (trapezoid over the sorted visible bands) times D65 times the CMF,
/// scaled so that a flat unit reflectance maps to the D65 white point.
struct RgbWeights {
  std::vector<int> bands;
  std::vector<std::array<double, 3>> xyz;
};

inline RgbWeights rgb_weights(const std::vector<double>& wavelengths) {
  std::vector<int> idx;
  for (int b = 0; b < static_cast<int>(wavelengths.size()); ++b)
    if (wavelengths[static_cast<std::size_t>(b)] >= 380.0 && wavelengths[static_cast<std::size_t>(b)] <= 780.0) idx.push_back(b);
  if (idx.empty()) throw ConfigError("render_rgb: no bands in the visible range");
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return wavelengths[static_cast<std::size_t>(a)] < wavelengths[static_cast<std::size_t>(b)]; });
  const std::size_t n = idx.size();
  auto wl = [&](std::size_t i) { return wavelengths[static_cast<std::size_t>(idx[i])]; };
  RgbWeights w{idx, std::vector<std::array<double, 3>>(n)};
  std::array<double, 3> white{0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    double dl = 1.0;
    if (n > 1) dl = 0.5 * (wl(std::min(i + 1, n - 1)) - wl(i == 0 ? 0 : i - 1));
    const auto c = color::cmf(wl(i));
    for (int k = 0; k < 3; ++k) {
      w.xyz[i][static_cast<std::size_t>(k)] = dl * color::d65(wl(i)) * c[static_cast<std::size_t>(k)];
      white[static_cast<std::size_t>(k)] += w.xyz[i][static_cast<std::size_t>(k)];
    }
  }
  for (auto& v : w.xyz)
    for (std::size_t k = 0; k < 3; ++k) v[k] *= white[k] > 0.0 ? color::kD65White[k] / white[k] : 0.0;
  return w;
}

/// Gamma-encoded sRGB in [0,1] for one spectrum sampled at the cube's wavelengths.
inline std::array<double, 3> spectrum_to_srgb(const RgbWeights& w, const std::vector<double>& reflectance) {
  std::array<double, 3> xyz{0, 0, 0};
  for (std::size_t i = 0; i < w.bands.size(); ++i)
    for (std::size_t k = 0; k < 3; ++k) xyz[k] += w.xyz[i][k] * reflectance[static_cast<std::size_t>(w.bands[i])];
  auto rgb = color::xyz_to_linear_srgb(xyz);
  for (double& v : rgb) v = color::srgb_gamma(v);
  return rgb;
}

inline Rgb8Image render_rgb(const msfa::SpectralCube& cube, const Mask& valid = {}) {
  const RgbWeights w = rgb_weights(cube.wavelengths());
  Rgb8Image out{cube.width(), cube.height(), std::vector<std::uint8_t>(3 * cube.plane_size(), 0)};
  std::vector<double> spec(static_cast<std::size_t>(cube.bands()));
  for (int y = 0; y < cube.height(); ++y)
    for (int x = 0; x < cube.width(); ++x) {
      if (!valid.empty() && !valid(x, y)) continue;
      for (int b = 0; b < cube.bands(); ++b) spec[static_cast<std::size_t>(b)] = cube.at(b, x, y);
      const auto rgb = spectrum_to_srgb(w, spec);
      std::uint8_t* p = out.px(x, y);
      for (int k = 0; k < 3; ++k) p[k] = static_cast<std::uint8_t>(std::lround(255.0 * rgb[static_cast<std::size_t>(k)]));
    }
  return out;
}

}  // namespace msfuse::fusion
