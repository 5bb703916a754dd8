#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <string_view>

#include "msfuse/msfa/cube.hpp"
#include "msfuse/msfa/normalize.hpp"

namespace msfuse::msfa {

/// Monotone intensity remappings of [0,1] that fix both endpoints.
enum class ModulationKind {
  identity,
  sqrt,
  one_minus_sqrt_one_minus,
  pow2,
  pow4,
  one_minus_pow2,
  one_minus_pow4,
  log2_plus1,
  one_minus_log2_two_minus,
};

inline constexpr std::array<ModulationKind, 9> all_modulations{
    ModulationKind::identity,   ModulationKind::sqrt,           ModulationKind::one_minus_sqrt_one_minus,
    ModulationKind::pow2,       ModulationKind::pow4,           ModulationKind::one_minus_pow2,
    ModulationKind::one_minus_pow4, ModulationKind::log2_plus1, ModulationKind::one_minus_log2_two_minus,
};

inline std::string_view to_string(ModulationKind k) {
  switch (k) {
    case ModulationKind::identity: return "identity";
    case ModulationKind::sqrt: return "sqrt";
    case ModulationKind::one_minus_sqrt_one_minus: return "one_minus_sqrt_one_minus";
    case ModulationKind::pow2: return "pow2";
    case ModulationKind::pow4: return "pow4";
    case ModulationKind::one_minus_pow2: return "one_minus_pow2";
    case ModulationKind::one_minus_pow4: return "one_minus_pow4";
    case ModulationKind::log2_plus1: return "log2_plus1";
    case ModulationKind::one_minus_log2_two_minus: return "one_minus_log2_two_minus";
  }
  return "?";
}

inline double modulate(ModulationKind k, double x) {
  switch (k) {
    case ModulationKind::identity: return x;
    case ModulationKind::sqrt: return std::sqrt(x);
    case ModulationKind::one_minus_sqrt_one_minus: return 1.0 - std::sqrt(1.0 - x);
    case ModulationKind::pow2: return x * x;
    case ModulationKind::pow4: return x * x * x * x;
    case ModulationKind::one_minus_pow2: return 1.0 - (1.0 - x) * (1.0 - x);
    case ModulationKind::one_minus_pow4: {
      const double y = 1.0 - x;
      return 1.0 - y * y * y * y;
    }
    case ModulationKind::log2_plus1: return std::log2(x + 1.0);
    case ModulationKind::one_minus_log2_two_minus: return 1.0 - std::log2(2.0 - x);
  }
  return x;
}

struct Modulated {
  GrayImage image;
  std::size_t clamped = 0;  ///< inputs that were outside [0,1]
};

inline Modulated apply_modulation(const GrayImage& img, ModulationKind kind) {
  Modulated out{GrayImage(img.width(), img.height()), 0};
  auto src = img.pixels();
  auto dst = out.image.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    double x = src[i];
    if (!(x >= 0.0 && x <= 1.0)) {
      ++out.clamped;
      x = std::isnan(x) ? 0.0 : std::clamp(x, 0.0, 1.0);
    }
    dst[i] = static_cast<float>(std::clamp(modulate(kind, x), 0.0, 1.0));
  }
  return out;
}

/// Gray conversion with an independently drawn modulation per normalized band.
inline GrayImage modulated_gray(const SpectralCube& cube, std::mt19937_64& rng, NormalizeOptions opt = {}) {
  const auto norm = normalize_channels(cube, opt);
  std::uniform_int_distribution<std::size_t> pick(0, all_modulations.size() - 1);
  SpectralCube mod = norm.cube;
  for (int b = 0; b < mod.bands(); ++b) {
    const ModulationKind k = all_modulations[pick(rng)];
    for (float& v : mod.band(b)) v = static_cast<float>(modulate(k, v));
  }
  return spectral_average(mod);
}

}  // namespace msfuse::msfa
