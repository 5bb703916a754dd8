#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "msfuse/errors.hpp"

namespace msfuse::synth {

struct GaussianLobe {
  double amplitude = 0.0;
  double center_nm = 550.0;
  double width_nm = 30.0;
};

/// Reflectance spectrum: constant plus at most four Gaussian lobes.
struct Material {
  std::string name;
  double constant = 0.5;
  std::vector<GaussianLobe> lobes;

  double reflectance(double nm) const {
    double r = constant;
    for (const auto& g : lobes) {
      const double z = (nm - g.center_nm) / g.width_nm;
      r += g.amplitude * std::exp(-0.5 * z * z);
    }
    return r;
  }

  /// Checks the [0,1] range on a 1 nm grid over 400..1000 nm.
  void validate() const {
    if (lobes.size() > 4) throw ConfigError("material '" + name + "' has more than 4 lobes");
    for (const auto& g : lobes)
      if (!(g.width_nm > 0.0)) throw ConfigError("material '" + name + "' has a non-positive lobe width");
    for (int nm = 400; nm <= 1000; ++nm) {
      const double r = reflectance(nm);
      if (!(r >= 0.0 && r <= 1.0))
        throw ConfigError("material '" + name + "' leaves [0,1] at " + std::to_string(nm) + " nm");
    }
  }
};

}  // namespace msfuse::synth
