#pragma once

#include <vector>

#include "msfuse/fusion/fuse.hpp"
#include "msfuse/msfa/pattern.hpp"

namespace msfuse::fusion {

struct Rect {
  int x = 0, y = 0, width = 0, height = 0;
  long area() const { return static_cast<long>(width) * height; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Largest axis-aligned all-valid rectangle, via the largest rectangle in a histogram per row.
/// Ties keep the first found (topmost bottom edge, then leftmost).
inline Rect largest_valid_rect(const Mask& valid) {
  const int w = valid.width(), h = valid.height();
  std::vector<int> heights(static_cast<std::size_t>(w), 0);
  std::vector<int> stack;
  Rect best;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) heights[static_cast<std::size_t>(x)] = valid(x, y) ? heights[static_cast<std::size_t>(x)] + 1 : 0;
    stack.clear();
    for (int x = 0; x <= w; ++x) {
      const int cur = x < w ? heights[static_cast<std::size_t>(x)] : 0;
      while (!stack.empty() && heights[static_cast<std::size_t>(stack.back())] >= cur) {
        const int hh = heights[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const Rect r{left, y - hh + 1, x - left, hh};
        if (r.area() > best.area()) best = r;
      }
      stack.push_back(x);
    }
  }
  return best;
}

inline msfa::SpectralCube crop_cube(const msfa::SpectralCube& c, const Rect& r) {
  if (r.x < 0 || r.y < 0 || r.width <= 0 || r.height <= 0 || r.x + r.width > c.width() || r.y + r.height > c.height())
    throw DimensionError("crop rectangle outside the cube");
  msfa::SpectralCube out(r.width, r.height, c.wavelengths());
  out.band_sources() = c.band_sources();
  out.set_reflectance(c.reflectance());
  for (int b = 0; b < c.bands(); ++b)
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x) out.at(b, x, y) = c.at(b, r.x + x, r.y + y);
  return out;
}

template <typename T>
Image<T> crop_image(const Image<T>& img, const Rect& r) {
  if (r.x < 0 || r.y < 0 || r.width <= 0 || r.height <= 0 || r.x + r.width > img.width() || r.y + r.height > img.height())
    throw DimensionError("crop rectangle outside the image");
  Image<T> out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) out(x, y) = img(r.x + x, r.y + y);
  return out;
}

inline FusedCube crop_valid(const FusedCube& f) {
  const Rect r = largest_valid_rect(f.valid);
  if (r.area() == 0) throw EmptyResultError("crop_valid: no valid pixels");
  FusedCube out{crop_cube(f.cube, r), crop_image(f.valid, r), f.crop_x + r.x, f.crop_y + r.y, f.duplicate_wavelengths};
  return out;
}

/// Centered width x height window.
inline Rect centered_rect(int full_w, int full_h, int width, int height) {
  if (width <= 0 || height <= 0 || width > full_w || height > full_h) throw DimensionError("fixed crop larger than the image");
  return {(full_w - width) / 2, (full_h - height) / 2, width, height};
}

/// Crops a mosaic and shifts its pattern phase so every kept pixel keeps its band.
inline msfa::MosaicFrame crop_mosaic(const msfa::MosaicFrame& f, const Rect& r) {
  msfa::MosaicFrame out{crop_image(f.values, r), f.pattern, {(f.origin_offset.row + r.y) % f.pattern.rows,
                                                              (f.origin_offset.col + r.x) % f.pattern.cols},
                        f.reflectance};
  return out;
}

}  // namespace msfuse::fusion
