#pragma once

#include <cmath>
#include <limits>

#include "msfuse/image.hpp"
#include "msfuse/msfa/cube.hpp"

namespace msfuse {

/// Per-output-pixel source coordinates; NaN marks pixels with no source.
struct RemapField {
  Image<float> src_x;
  Image<float> src_y;

  int width() const { return src_x.width(); }
  int height() const { return src_x.height(); }

  static RemapField identity(int w, int h) {
    RemapField f{Image<float>(w, h), Image<float>(w, h)};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        f.src_x(x, y) = static_cast<float>(x);
        f.src_y(x, y) = static_cast<float>(y);
      }
    return f;
  }
};

inline bool source_in_bounds(double sx, double sy, int w, int h) {
  return std::isfinite(sx) && std::isfinite(sy) && sx >= 0.0 && sy >= 0.0 && sx <= w - 1 && sy <= h - 1;
}

struct Remapped {
  GrayImage image;
  Mask valid;
};

/// Bilinear resampling; pixels whose source lies outside the input are zero and invalid.
inline Remapped remap(const GrayImage& src, const RemapField& field) {
  Remapped out{GrayImage(field.width(), field.height(), 0.0f), Mask(field.width(), field.height(), 0)};
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      const double sx = field.src_x(x, y), sy = field.src_y(x, y);
      if (!source_in_bounds(sx, sy, src.width(), src.height())) continue;
      out.image(x, y) = static_cast<float>(sample_bilinear(src, sx, sy));
      out.valid(x, y) = 1;
    }
  return out;
}

struct RemappedCube {
  msfa::SpectralCube cube;
  Mask valid;
};

inline RemappedCube remap_cube(const msfa::SpectralCube& src, const RemapField& field) {
  RemappedCube out{msfa::SpectralCube(field.width(), field.height(), src.wavelengths()), Mask(field.width(), field.height(), 0)};
  out.cube.band_sources() = src.band_sources();
  out.cube.set_reflectance(src.reflectance());
  const int w = src.width(), h = src.height();
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      const double sx = field.src_x(x, y), sy = field.src_y(x, y);
      if (!source_in_bounds(sx, sy, w, h)) continue;
      out.valid(x, y) = 1;
      const int x0 = std::min(static_cast<int>(sx), w - 1), y0 = std::min(static_cast<int>(sy), h - 1);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double ax = sx - x0, ay = sy - y0;
      for (int b = 0; b < src.bands(); ++b) {
        const double v = (1 - ay) * ((1 - ax) * src.at(b, x0, y0) + ax * src.at(b, x1, y0)) +
                         ay * ((1 - ax) * src.at(b, x0, y1) + ax * src.at(b, x1, y1));
        out.cube.at(b, x, y) = static_cast<float>(v);
      }
    }
  return out;
}

}  // namespace msfuse
