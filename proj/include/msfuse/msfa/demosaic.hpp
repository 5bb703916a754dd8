#pragma once

#include <cmath>
#include <vector>

#include "msfuse/msfa/cube.hpp"
#include "msfuse/msfa/pattern.hpp"

namespace msfuse::msfa {

enum class DemosaicMethod { nearest, weighted_bilinear };

namespace detail {

/// First coordinate >= 0 whose phase matches `cell` for a period `step` shifted by `offset`.
inline int first_carrier(int cell, int offset, int step) { return ((cell - offset) % step + step) % step; }

/// Closest carrier coordinate to every position along one axis; ties resolve to the lower carrier.
inline std::vector<int> nearest_carriers(int size, int first, int step) {
  std::vector<int> out(static_cast<std::size_t>(size));
  for (int p = 0; p < size; ++p) {
    const int k = static_cast<int>(std::floor(static_cast<double>(p - first) / step));
    const int lo = first + k * step;
    const int hi = lo + step;
    if (lo < 0)
      out[static_cast<std::size_t>(p)] = hi;
    else if (hi >= size)
      out[static_cast<std::size_t>(p)] = lo;
    else
      out[static_cast<std::size_t>(p)] = (p - lo <= hi - p) ? lo : hi;
  }
  return out;
}

/// Triangle-kernel taps (carrier coordinate, weight) per position, already normalized.
struct Taps {
  int lo = 0, hi = 0;
  double w_lo = 1.0, w_hi = 0.0;
};

inline std::vector<Taps> triangle_taps(int size, int first, int step) {
  std::vector<Taps> out(static_cast<std::size_t>(size));
  for (int p = 0; p < size; ++p) {
    const int k = static_cast<int>(std::floor(static_cast<double>(p - first) / step));
    const int lo = first + k * step;
    const int hi = lo + step;
    Taps t;
    const bool has_lo = lo >= 0;
    const bool has_hi = hi < size;
    if (has_lo && (p == lo || !has_hi)) {
      t.lo = t.hi = lo;
    } else if (!has_lo) {
      t.lo = t.hi = hi;
    } else {
      const double a = 1.0 - static_cast<double>(p - lo) / step;
      const double b = 1.0 - static_cast<double>(hi - p) / step;
      t.lo = lo;
      t.hi = hi;
      t.w_lo = a / (a + b);
      t.w_hi = b / (a + b);
    }
    out[static_cast<std::size_t>(p)] = t;
  }
  return out;
}

}  // namespace detail

/// Full-resolution cube from a mosaic frame. Carrier pixels keep their measured value exactly.
inline SpectralCube mosaic_to_cube(const MosaicFrame& frame, DemosaicMethod method = DemosaicMethod::weighted_bilinear) {
  frame.validate();
  const MsfaPattern& pat = frame.pattern;
  const int w = frame.width();
  const int h = frame.height();
  SpectralCube cube(w, h, pat.band_wavelengths);
  cube.set_reflectance(frame.reflectance);

  for (int b = 0; b < pat.band_count(); ++b) {
    const PatternOffset cell = pat.cell_of(b);
    const int fx = detail::first_carrier(cell.col, frame.origin_offset.col, pat.cols);
    const int fy = detail::first_carrier(cell.row, frame.origin_offset.row, pat.rows);
    auto plane = cube.band(b);

    if (method == DemosaicMethod::nearest) {
      const auto nx = detail::nearest_carriers(w, fx, pat.cols);
      const auto ny = detail::nearest_carriers(h, fy, pat.rows);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          plane[static_cast<std::size_t>(y) * w + x] = frame.values(nx[static_cast<std::size_t>(x)], ny[static_cast<std::size_t>(y)]);
      continue;
    }

    // Separable normalized convolution: interpolate carrier rows along x, then every column along y.
    const auto tx = detail::triangle_taps(w, fx, pat.cols);
    const auto ty = detail::triangle_taps(h, fy, pat.rows);
    std::vector<double> rows_interp(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = fy; y < h; y += pat.rows) {
      for (int x = 0; x < w; ++x) {
        const auto& t = tx[static_cast<std::size_t>(x)];
        double v = frame.values(t.lo, y);
        if (t.hi != t.lo) v = t.w_lo * v + t.w_hi * frame.values(t.hi, y);
        rows_interp[static_cast<std::size_t>(y) * w + x] = v;
      }
    }
    for (int y = 0; y < h; ++y) {
      const auto& t = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < w; ++x) {
        double v = rows_interp[static_cast<std::size_t>(t.lo) * w + x];
        if (t.hi != t.lo) v = t.w_lo * v + t.w_hi * rows_interp[static_cast<std::size_t>(t.hi) * w + x];
        plane[static_cast<std::size_t>(y) * w + x] = static_cast<float>(v);
      }
    }
  }
  return cube;
}

/// Samples each pixel from the band its filter cell carries.
inline MosaicFrame cube_to_mosaic(const SpectralCube& cube, const MsfaPattern& pattern, PatternOffset offset = {}) {
  pattern.validate();
  if (cube.bands() != pattern.band_count())
    throw ConfigError("cube has " + std::to_string(cube.bands()) + " bands, pattern expects " +
                      std::to_string(pattern.band_count()));
  MosaicFrame frame{Image<float>(cube.width(), cube.height()), pattern, offset, cube.reflectance()};
  for (int y = 0; y < cube.height(); ++y)
    for (int x = 0; x < cube.width(); ++x) frame.values(x, y) = cube.at(pattern.band_at(x, y, offset), x, y);
  return frame;
}

}  // namespace msfuse::msfa
