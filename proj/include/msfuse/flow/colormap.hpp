#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "msfuse/flow/flow_field.hpp"

namespace msfuse::flow {

/// Blue -> cyan -> green -> yellow -> red for t in [0,1].
inline std::array<std::uint8_t, 3> jet(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto ch = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))); };
  return {ch(1.5 - std::abs(4.0 * t - 3.0)), ch(1.5 - std::abs(4.0 * t - 2.0)), ch(1.5 - std::abs(4.0 * t - 1.0))};
}

/// Large disparity (near) is red, small disparity (far) is blue, invalid pixels black. The range
/// defaults to the valid min/max.
inline Rgb8Image colorize_disparity(const DisparityMap& d, double lo = std::numeric_limits<double>::quiet_NaN(),
                                    double hi = std::numeric_limits<double>::quiet_NaN()) {
  if (std::isnan(lo) || std::isnan(hi)) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (int y = 0; y < d.height(); ++y)
      for (int x = 0; x < d.width(); ++x)
        if (d.valid(x, y)) {
          mn = std::min(mn, static_cast<double>(d.d(x, y)));
          mx = std::max(mx, static_cast<double>(d.d(x, y)));
        }
    if (std::isnan(lo)) lo = std::isfinite(mn) ? mn : 0.0;
    if (std::isnan(hi)) hi = std::isfinite(mx) ? mx : 1.0;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  Rgb8Image out{d.width(), d.height(), std::vector<std::uint8_t>(3 * d.d.size(), 0)};
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      if (!d.valid(x, y)) continue;
      const auto c = jet((d.d(x, y) - lo) / span);
      std::copy(c.begin(), c.end(), out.px(x, y));
    }
  return out;
}

}  // namespace msfuse::flow
