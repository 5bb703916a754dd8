#pragma once

#include <cmath>
#include <vector>

#include "msfuse/flow/flow_field.hpp"

namespace msfuse::flow {

/// d = -u on a rectified pair; pixels with |v| above `max_vertical` are dropped.
inline DisparityMap flow_to_disparity(const FlowField& f, double max_vertical = 1.0) {
  DisparityMap d{Image<float>(f.width(), f.height()), Mask(f.width(), f.height(), 0)};
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      d.d(x, y) = -f.u(x, y);
      d.valid(x, y) = f.valid(x, y) && std::isfinite(f.u(x, y)) && std::abs(f.v(x, y)) <= max_vertical;
    }
  return d;
}

/// z = f * B / (d + offset). `offset` is the principal-point shift between the rectified views
/// (zero when they share a principal point). Non-positive denominators are invalid.
inline DepthMap disparity_to_depth(const DisparityMap& d, double focal_px, double baseline_m, double offset = 0.0) {
  if (!(focal_px > 0.0) || !(baseline_m > 0.0)) throw ConfigError("disparity_to_depth: focal and baseline must be positive");
  DepthMap z{Image<float>(d.width(), d.height()), Mask(d.width(), d.height(), 0)};
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      if (!d.valid(x, y)) continue;
      const double den = d.d(x, y) + offset;
      if (!(den > 0.0)) continue;
      z.z(x, y) = static_cast<float>(focal_px * baseline_m / den);
      z.valid(x, y) = 1;
    }
  return z;
}

struct EndpointError {
  double mean = 0.0;
  std::size_t count = 0;
  Image<float> map;  ///< NaN where not jointly valid
};

inline EndpointError endpoint_error(const FlowField& f, const FlowField& gt) {
  require_same_size(f.u, gt.u, "endpoint_error: field sizes differ");
  EndpointError e;
  e.map = Image<float>(f.width(), f.height(), std::nanf(""));
  double acc = 0.0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) {
      if (!f.valid(x, y) || !gt.valid(x, y)) continue;
      const double err = std::hypot(f.u(x, y) - gt.u(x, y), f.v(x, y) - gt.v(x, y));
      e.map(x, y) = static_cast<float>(err);
      acc += err;
      ++e.count;
    }
  if (e.count == 0) throw EmptyResultError("endpoint_error: no jointly valid pixels");
  e.mean = acc / static_cast<double>(e.count);
  return e;
}

}  // namespace msfuse::flow
