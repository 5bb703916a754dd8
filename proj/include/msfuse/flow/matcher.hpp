#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <climits>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "msfuse/flow/census.hpp"
#include "msfuse/flow/flow_field.hpp"
#include "msfuse/flow/pyramid.hpp"

namespace msfuse::flow {

struct FlowParams {
  int search_radius = 4;        ///< per level, in that level's pixels
  int census_radius = 3;        ///< 7x7 window
  int aggregation_radius = 2;   ///< box over which Hamming costs are summed
  int median_passes = 3;
  int median_radius = 4;        ///< 9x9 window
  double median_sigma = 0.1;    ///< gray-difference scale of the median weights
  double lr_threshold = 1.0;    ///< px
  int min_dim = 32;
  int init_passes = 2;

  void validate() const {
    if (search_radius < 1) throw ConfigError("search_radius must be >= 1");
    if (aggregation_radius < 0 || median_radius < 0 || median_passes < 0 || init_passes < 1)
      throw ConfigError("invalid flow window parameters");
    if (!(median_sigma > 0.0) || !(lr_threshold >= 0.0)) throw ConfigError("invalid flow thresholds");
    if (min_dim < 8) throw ConfigError("min_dim must be >= 8");
  }
};

namespace detail {

inline constexpr int kNoMatch = INT_MAX;

/// Census image with a replicated border of `pad` pixels, for branch-free window sums.
struct PaddedCensus {
  int width = 0, height = 0, pad = 0, stride = 0;
  std::vector<std::uint64_t> data;

  PaddedCensus(const CensusImage& c, int pad_px) : width(c.width()), height(c.height()), pad(pad_px), stride(c.width() + 2 * pad_px) {
    data.resize(static_cast<std::size_t>(stride) * static_cast<std::size_t>(height + 2 * pad));
    for (int y = -pad; y < height + pad; ++y)
      for (int x = -pad; x < width + pad; ++x) data[index(x, y)] = c.clamped(x, y);
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y + pad) * static_cast<std::size_t>(stride) + static_cast<std::size_t>(x + pad);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

/// Aggregated census cost of matching ref (x,y) to tgt (x+dx, y+dy), or kNoMatch if the target
/// pixel is outside the image.
inline int match_cost(const PaddedCensus& ref, const PaddedCensus& tgt, int agg, int x, int y, int dx, int dy) {
  const int tx = x + dx, ty = y + dy;
  if (!tgt.contains(tx, ty)) return kNoMatch;
  int c = 0;
  for (int j = -agg; j <= agg; ++j) {
    const std::uint64_t* a = &ref.data[ref.index(x - agg, y + j)];
    const std::uint64_t* b = &tgt.data[tgt.index(tx - agg, ty + j)];
    for (int i = 0; i <= 2 * agg; ++i) c += std::popcount(a[i] ^ b[i]);
  }
  return c;
}

/// Deterministic total order on candidates: cost, then distance from zero, then row-major.
inline bool better(int cost, int dx, int dy, int best_cost, int bdx, int bdy) {
  if (cost != best_cost) return cost < best_cost;
  const int r = dx * dx + dy * dy, br = bdx * bdx + bdy * bdy;
  if (r != br) return r < br;
  if (dy != bdy) return dy < bdy;
  return dx < bdx;
}

struct IntegerMatch {
  Image<int> du, dv;
  Mask found;
};

inline double parabola_offset(int cm, int c0, int cp) {
  if (cm == kNoMatch || cp == kNoMatch) return 0.0;
  const double denom = static_cast<double>(cm) - 2.0 * c0 + cp;
  if (denom <= 0.0) return 0.0;
  return std::clamp(0.5 * (cm - cp) / denom, -0.5, 0.5);
}

/// One matching pass around `prior`; returns the sub-pixel flow and records the integer argmin.
inline FlowField match_pass(const PaddedCensus& ref, const PaddedCensus& tgt, const FlowField& prior, const FlowParams& p,
                            IntegerMatch* integer = nullptr) {
  const int w = ref.width, h = ref.height;
  FlowField out(w, h);
  if (integer) *integer = IntegerMatch{Image<int>(w, h), Image<int>(w, h), Mask(w, h, 0)};
  const int r = p.search_radius, agg = p.aggregation_radius, side = 2 * r + 1;
  std::vector<int> costs(static_cast<std::size_t>(side * side));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float pu = prior.u(x, y), pv = prior.v(x, y);
      const int cx = std::isfinite(pu) ? static_cast<int>(std::lround(pu)) : 0;
      const int cy = std::isfinite(pv) ? static_cast<int>(std::lround(pv)) : 0;
      int best = kNoMatch, bx = 0, by = 0;
      for (int dy = cy - r; dy <= cy + r; ++dy)
        for (int dx = cx - r; dx <= cx + r; ++dx) {
          const int c = match_cost(ref, tgt, agg, x, y, dx, dy);
          costs[static_cast<std::size_t>((dy - cy + r) * side + (dx - cx + r))] = c;
          if (c == kNoMatch) continue;
          if (best == kNoMatch || better(c, dx, dy, best, bx, by)) {
            best = c;
            bx = dx;
            by = dy;
          }
        }
      if (best == kNoMatch) {
        out.u(x, y) = std::isfinite(pu) ? pu : 0.0f;
        out.v(x, y) = std::isfinite(pv) ? pv : 0.0f;
        out.valid(x, y) = 0;
        continue;
      }
      auto cost_at = [&](int dx, int dy) {
        const int i = dx - cx + r, j = dy - cy + r;
        if (i >= 0 && j >= 0 && i < side && j < side) return costs[static_cast<std::size_t>(j * side + i)];
        return match_cost(ref, tgt, agg, x, y, dx, dy);
      };
      const double ox = parabola_offset(cost_at(bx - 1, by), best, cost_at(bx + 1, by));
      const double oy = parabola_offset(cost_at(bx, by - 1), best, cost_at(bx, by + 1));
      out.u(x, y) = static_cast<float>(bx + ox);
      out.v(x, y) = static_cast<float>(by + oy);
      if (integer) {
        integer->du(x, y) = bx;
        integer->dv(x, y) = by;
        integer->found(x, y) = 1;
      }
    }
  return out;
}

/// Value at which the cumulative weight first reaches half the total (weighted quickselect with
/// three-way partitioning). Weights must be positive.
inline float weighted_median_select(std::vector<std::pair<float, float>>& s, double total) {
  std::size_t lo = 0, hi = s.size();
  double below = 0.0;
  const double half = 0.5 * total;
  float pivot = s.empty() ? 0.0f : s[0].first;
  while (lo < hi) {
    const float a = s[lo].first, b = s[lo + (hi - lo) / 2].first, c = s[hi - 1].first;
    pivot = std::max(std::min(a, b), std::min(std::max(a, b), c));
    std::size_t lt = lo, i = lo, gt = hi;
    double wl = 0.0, we = 0.0;
    while (i < gt) {
      if (s[i].first < pivot) {
        wl += s[i].second;
        std::swap(s[lt++], s[i++]);
      } else if (s[i].first > pivot) {
        std::swap(s[i], s[--gt]);
      } else {
        we += s[i].second;
        ++i;
      }
    }
    if (below + wl >= half && lt > lo) {
      hi = lt;
    } else if (below + wl + we >= half) {
      return pivot;
    } else {
      below += wl + we;
      lo = gt;
    }
  }
  return pivot;
}

/// Weighted median of each flow component over a square window, weights exp(-|g(q)-g(p)|/sigma).
inline void weighted_median(FlowField& f, const GrayImage& guide, int radius, double sigma) {
  const int w = f.width(), h = f.height();
  constexpr int kBins = 1024;
  std::array<float, kBins + 1> lut{};
  for (int i = 0; i <= kBins; ++i) lut[static_cast<std::size_t>(i)] = static_cast<float>(std::exp(-(static_cast<double>(i) / kBins) / sigma));
  auto weight = [&](float a, float b) {
    const float d = std::min(std::abs(a - b), 1.0f);
    return lut[static_cast<std::size_t>(std::lround(d * kBins))];
  };
  const Image<float> su = f.u, sv = f.v;
  std::vector<std::pair<float, float>> a, b;
  a.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  b.reserve(a.capacity());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!f.valid(x, y)) continue;
      const float g = guide(x, y);
      a.clear();
      b.clear();
      double total = 0.0;
      for (int j = std::max(0, y - radius); j <= std::min(h - 1, y + radius); ++j)
        for (int i = std::max(0, x - radius); i <= std::min(w - 1, x + radius); ++i) {
          if (!f.valid(i, j)) continue;
          const float wt = weight(guide(i, j), g);
          a.emplace_back(su(i, j), wt);
          b.emplace_back(sv(i, j), wt);
          total += wt;
        }
      f.u(x, y) = weighted_median_select(a, total);
      f.v(x, y) = weighted_median_select(b, total);
    }
}

inline FlowField upsample_flow(const FlowField& coarse, int w, int h) {
  FlowField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out.u(x, y) = static_cast<float>(2.0 * sample_bilinear(coarse.u, 0.5 * x, 0.5 * y));
      out.v(x, y) = static_cast<float>(2.0 * sample_bilinear(coarse.v, 0.5 * x, 0.5 * y));
    }
  return out;
}

/// Backward guess from a forward field: B(q) = -F(q - F(q)).
inline FlowField reverse_guess(const FlowField& f) {
  const int w = f.width(), h = f.height();
  FlowField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u0 = sample_bilinear(f.u, x, y), v0 = sample_bilinear(f.v, x, y);
      out.u(x, y) = static_cast<float>(-sample_bilinear(f.u, x - u0, y - v0));
      out.v(x, y) = static_cast<float>(-sample_bilinear(f.v, x - u0, y - v0));
    }
  return out;
}

inline FlowField sanitize(const FlowField& f) {
  FlowField out = f;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      if (!f.valid(x, y) || !std::isfinite(f.u(x, y)) || !std::isfinite(f.v(x, y))) {
        out.u(x, y) = 0.0f;
        out.v(x, y) = 0.0f;
      }
  std::fill(out.valid.pixels().begin(), out.valid.pixels().end(), 1);
  return out;
}

/// Marks p invalid unless p + F(p) lands on the image (pixel footprints included) and
/// F(p) + B(p + F(p)) is within `tol`.
inline void left_right_check(FlowField& fwd, const FlowField& bwd, double tol) {
  const int w = fwd.width(), h = fwd.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!fwd.valid(x, y)) continue;
      const double qx = x + fwd.u(x, y), qy = y + fwd.v(x, y);
      if (qx < -0.5 || qy < -0.5 || qx > w - 0.5 || qy > h - 0.5) {
        fwd.valid(x, y) = 0;
        continue;
      }
      const double eu = fwd.u(x, y) + sample_bilinear(bwd.u, qx, qy);
      const double ev = fwd.v(x, y) + sample_bilinear(bwd.v, qx, qy);
      if (std::hypot(eu, ev) > tol) fwd.valid(x, y) = 0;
    }
}

}  // namespace detail

struct FlowResult {
  FlowField forward;   ///< ref -> target, after the consistency check
  FlowField backward;  ///< target -> ref, after the consistency check
  detail::IntegerMatch integer;  ///< integer argmin of the last forward matching pass
  int levels = 0;
};

/// Coarse-to-fine census matcher. With `init`, the pyramid is skipped and `init_passes` refinement
/// passes run at full resolution around the supplied field.
inline FlowResult compute_flow_bidirectional(const GrayImage& ref, const GrayImage& target,
                                             const std::optional<FlowField>& init = std::nullopt,
                                             const FlowParams& params = {}) {
  params.validate();
  if (ref.empty() || target.empty()) throw DimensionError("compute_flow: empty image");
  require_same_size(ref, target, "compute_flow: image sizes differ");
  if (init) require_same_size(ref, init->u, "compute_flow: init size differs");

  FlowResult res;
  auto refine_level = [&](const GrayImage& a, const GrayImage& b, FlowField& fwd, FlowField& bwd, int passes,
                          bool record) {
    const detail::PaddedCensus ca(census_transform(a, params.census_radius), params.aggregation_radius);
    const detail::PaddedCensus cb(census_transform(b, params.census_radius), params.aggregation_radius);
    for (int i = 0; i < passes; ++i) {
      const bool last = record && i + 1 == passes;
      fwd = detail::match_pass(ca, cb, detail::sanitize(fwd), params, last ? &res.integer : nullptr);
      bwd = detail::match_pass(cb, ca, detail::sanitize(bwd), params);
      for (int k = 0; k < params.median_passes; ++k) {
        detail::weighted_median(fwd, a, params.median_radius, params.median_sigma);
        detail::weighted_median(bwd, b, params.median_radius, params.median_sigma);
      }
    }
  };

  FlowField fwd, bwd;
  if (init) {
    fwd = detail::sanitize(*init);
    bwd = detail::reverse_guess(fwd);
    refine_level(ref, target, fwd, bwd, params.init_passes, true);
    res.levels = 1;
  } else {
    const auto pa = build_pyramid(ref, params.min_dim);
    const auto pb = build_pyramid(target, params.min_dim);
    res.levels = static_cast<int>(pa.size());
    for (int l = res.levels - 1; l >= 0; --l) {
      const GrayImage& a = pa[static_cast<std::size_t>(l)];
      const GrayImage& b = pb[static_cast<std::size_t>(l)];
      if (l == res.levels - 1) {
        fwd = FlowField(a.width(), a.height());
        bwd = FlowField(a.width(), a.height());
      } else {
        fwd = detail::upsample_flow(detail::sanitize(fwd), a.width(), a.height());
        bwd = detail::upsample_flow(detail::sanitize(bwd), a.width(), a.height());
      }
      refine_level(a, b, fwd, bwd, 1, l == 0);
    }
  }
  FlowField f_checked = fwd, b_checked = bwd;
  detail::left_right_check(f_checked, bwd, params.lr_threshold);
  detail::left_right_check(b_checked, fwd, params.lr_threshold);
  res.forward = std::move(f_checked);
  res.backward = std::move(b_checked);
  return res;
}

/// Flow from `ref` to `target`: the match of ref pixel p is at p + flow(p).
inline FlowField compute_flow(const GrayImage& ref, const GrayImage& target, const std::optional<FlowField>& init = std::nullopt,
                              const FlowParams& params = {}) {
  return compute_flow_bidirectional(ref, target, init, params).forward;
}

}  // namespace msfuse::flow
