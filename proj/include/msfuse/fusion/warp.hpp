#pragma once

#include <cmath>

#include "msfuse/flow/flow_field.hpp"
#include "msfuse/msfa/cube.hpp"
#include "msfuse/remap.hpp"

namespace msfuse::fusion {

struct WarpedCube {
  msfa::SpectralCube cube;
  Mask valid;
};

inline float sample_band(const msfa::SpectralCube& c, int b, double x, double y) {
  const int x0 = std::min(static_cast<int>(std::floor(x)), c.width() - 1);
  const int y0 = std::min(static_cast<int>(std::floor(y)), c.height() - 1);
  const int x1 = std::min(x0 + 1, c.width() - 1), y1 = std::min(y0 + 1, c.height() - 1);
  const double ax = x - x0, ay = y - y0;
  return static_cast<float>((1 - ay) * ((1 - ax) * c.at(b, x0, y0) + ax * c.at(b, x1, y0)) +
                            ay * ((1 - ax) * c.at(b, x0, y1) + ax * c.at(b, x1, y1)));
}

/// Pulls `src` onto the flow's grid: output pixel p samples src at p + flow(p). Invalid flow or a
/// source outside the image leaves the pixel zero and invalid.
inline WarpedCube warp_cube(const msfa::SpectralCube& src, const flow::FlowField& flow) {
  require_same_size(src, flow.u, "warp_cube: cube and flow sizes differ");
  const int w = flow.width(), h = flow.height();
  WarpedCube out{msfa::SpectralCube(w, h, src.wavelengths()), Mask(w, h, 0)};
  out.cube.band_sources() = src.band_sources();
  out.cube.set_reflectance(src.reflectance());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(x, y)) continue;
      const double sx = x + flow.u(x, y), sy = y + flow.v(x, y);
      if (!source_in_bounds(sx, sy, src.width(), src.height())) continue;
      out.valid(x, y) = 1;
      for (int b = 0; b < src.bands(); ++b) out.cube.at(b, x, y) = sample_band(src, b, sx, sy);
    }
  return out;
}

}  // namespace msfuse::fusion
