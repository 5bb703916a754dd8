#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "msfuse/msfa/cube.hpp"

namespace msfuse::fusion {

struct FusedCube {
  msfa::SpectralCube cube;
  Mask valid;
  int crop_x = 0;  ///< offset of this cube inside the uncropped grid
  int crop_y = 0;
  int duplicate_wavelengths = 0;

  int width() const { return cube.width(); }
  int height() const { return cube.height(); }
  double valid_fraction() const {
    if (valid.empty()) return 0.0;
    std::size_t n = 0;
    for (auto m : valid.pixels()) n += m != 0;
    return static_cast<double>(n) / static_cast<double>(valid.size());
  }
};

/// Concatenates both cubes and stably sorts bands by wavelength (left before right on ties).
/// Validity is the AND of the masks; an empty mask counts as all valid. An empty left cube
/// (no bands) yields the right cube.
inline FusedCube fuse(const msfa::SpectralCube& left, const Mask& left_mask, const msfa::SpectralCube& right,
                      const Mask& right_mask) {
  const int w = right.width(), h = right.height();
  const bool have_left = left.bands() > 0;
  if (have_left) require_same_size(left, right, "fuse: cube sizes differ");
  if (!left_mask.empty()) require_same_size(left_mask, right, "fuse: left mask size differs");
  if (!right_mask.empty()) require_same_size(right_mask, right, "fuse: right mask size differs");

  struct BandRef {
    const msfa::SpectralCube* cube;
    int band;
  };
  std::vector<BandRef> refs;
  if (have_left)
    for (int b = 0; b < left.bands(); ++b) refs.push_back({&left, b});
  for (int b = 0; b < right.bands(); ++b) refs.push_back({&right, b});
  std::stable_sort(refs.begin(), refs.end(), [](const BandRef& a, const BandRef& b) {
    return a.cube->wavelengths()[static_cast<std::size_t>(a.band)] < b.cube->wavelengths()[static_cast<std::size_t>(b.band)];
  });

  std::vector<double> wl;
  for (const auto& r : refs) wl.push_back(r.cube->wavelengths()[static_cast<std::size_t>(r.band)]);
  FusedCube out{msfa::SpectralCube(w, h, wl), Mask(w, h, 1)};
  out.cube.set_reflectance(right.reflectance() && (!have_left || left.reflectance()));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& r = refs[i];
    out.cube.band_sources()[i] = r.cube->band_sources()[static_cast<std::size_t>(r.band)];
    const auto src = r.cube->band(r.band);
    std::copy(src.begin(), src.end(), out.cube.band(static_cast<int>(i)).begin());
    if (i > 0 && wl[i] == wl[i - 1]) ++out.duplicate_wavelengths;
  }
  for (std::size_t i = 0; i < out.valid.size(); ++i) {
    const bool l = left_mask.empty() || left_mask.pixels()[i];
    const bool r = right_mask.empty() || right_mask.pixels()[i];
    out.valid.pixels()[i] = l && r;
  }
  return out;
}

}  // namespace msfuse::fusion
