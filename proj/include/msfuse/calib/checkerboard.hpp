#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

#include <Eigen/Dense>

#include "msfuse/calib/features.hpp"
#include "msfuse/filters.hpp"
#include "msfuse/image.hpp"

namespace msfuse::calib {

struct DetectOptions {
  double smoothing_sigma = 2.0;
  double response_threshold = 0.1;  ///< relative to the strongest saddle response
  int max_refine_iterations = 30;
};

struct Detection {
  FeatureSet features;
  bool ambiguous_orientation = false;  ///< board symmetry left more than one valid corner labeling
};

namespace detail {

struct Candidate {
  Vec2 p;
  double response = 0.0;
};

/// Number of dark/bright transitions on a circle; X-junctions give 4, L-corners and edges 2.
inline int ring_transitions(const Image<float>& img, const Vec2& c, double radius, double min_contrast) {
  constexpr int kSamples = 48;
  std::array<double, kSamples> s{};
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < kSamples; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kSamples;
    s[static_cast<std::size_t>(i)] = sample_bilinear(img, c.x() + radius * std::cos(a), c.y() + radius * std::sin(a));
    lo = std::min(lo, s[static_cast<std::size_t>(i)]);
    hi = std::max(hi, s[static_cast<std::size_t>(i)]);
  }
  if (hi - lo < min_contrast) return 0;
  const double mid = 0.5 * (lo + hi);
  int changes = 0;
  for (int i = 0; i < kSamples; ++i)
    changes += (s[static_cast<std::size_t>(i)] > mid) != (s[static_cast<std::size_t>((i + 1) % kSamples)] > mid);
  return changes;
}

/// Moves `c` to the stationary point of a weighted quadratic fitted on a window centered at `c`.
/// A point-symmetric saddle is a fixed point of this iteration.
inline std::optional<Vec2> refine_saddle(const Image<float>& img, Vec2 c, double sigma, int max_iter) {
  const int h = std::max(2, static_cast<int>(std::ceil(1.5 * sigma)));
  const double ws = std::max(1.0, 0.75 * h);
  const Vec2 start = c;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    for (int j = -h; j <= h; ++j)
      for (int i = -h; i <= h; ++i) {
        const double w = std::exp(-0.5 * (i * i + j * j) / (ws * ws));
        const double z = sample_bilinear(img, c.x() + i, c.y() + j);
        Eigen::Matrix<double, 6, 1> phi;
        phi << i * i, i * j, j * j, i, j, 1.0;
        A += w * phi * phi.transpose();
        b += w * z * phi;
      }
    const Eigen::Matrix<double, 6, 1> q = A.ldlt().solve(b);
    Eigen::Matrix2d H;
    H << 2 * q[0], q[1], q[1], 2 * q[2];
    if (H.determinant() >= 0.0) return std::nullopt;
    const Vec2 step = H.lu().solve(Vec2(-q[3], -q[4]));
    if (!step.allFinite()) return std::nullopt;
    const Vec2 clipped = step.cwiseMax(-1.0).cwiseMin(1.0);
    c += clipped;
    if ((c - start).norm() > 2.0 * h) return std::nullopt;
    if (clipped.norm() < 1e-5) break;
  }
  return c;
}

inline std::vector<Candidate> saddle_candidates(const Image<float>& smooth, const DetectOptions& opt) {
  const int w = smooth.width(), hgt = smooth.height();
  Image<float> resp(w, hgt, 0.0f);
  float best = 0.0f;
  for (int y = 1; y + 1 < hgt; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      const double ixx = smooth(x + 1, y) - 2.0 * smooth(x, y) + smooth(x - 1, y);
      const double iyy = smooth(x, y + 1) - 2.0 * smooth(x, y) + smooth(x, y - 1);
      const double ixy = 0.25 * (smooth(x + 1, y + 1) - smooth(x - 1, y + 1) - smooth(x + 1, y - 1) + smooth(x - 1, y - 1));
      const double s = ixy * ixy - ixx * iyy;
      resp(x, y) = s > 0.0 ? static_cast<float>(s) : 0.0f;
      best = std::max(best, resp(x, y));
    }
  std::vector<Candidate> out;
  if (best <= 0.0f) return out;
  const float thr = static_cast<float>(opt.response_threshold) * best;
  const int nms = std::max(2, static_cast<int>(std::ceil(2.0 * opt.smoothing_sigma)));
  for (int y = 1; y + 1 < hgt; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      const float v = resp(x, y);
      if (v < thr) continue;
      bool is_max = true;
      for (int dy = -nms; dy <= nms && is_max; ++dy)
        for (int dx = -nms; dx <= nms; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!resp.contains(x + dx, y + dy)) continue;
          const float o = resp(x + dx, y + dy);
          // Ties break toward the earlier pixel in scan order.
          if (o > v || (o == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) out.push_back({Vec2(x, y), v});
    }
  return out;
}

using GridMap = std::map<std::pair<int, int>, int>;

/// Grows a lattice from `seed` by predicting each neighbor from its already-placed neighbors.
inline GridMap grow_grid(const std::vector<Candidate>& cands, int seed) {
  const Vec2 s = cands[static_cast<std::size_t>(seed)].p;
  std::vector<std::pair<double, int>> near;
  for (int i = 0; i < static_cast<int>(cands.size()); ++i)
    if (i != seed) near.push_back({(cands[static_cast<std::size_t>(i)].p - s).norm(), i});
  std::sort(near.begin(), near.end());
  if (near.size() < 2) return {};
  const Vec2 a = cands[static_cast<std::size_t>(near[0].second)].p - s;
  std::optional<Vec2> b;
  for (std::size_t k = 1; k < std::min<std::size_t>(near.size(), 8); ++k) {
    const Vec2 d = cands[static_cast<std::size_t>(near[k].second)].p - s;
    if (std::abs(d.normalized().dot(a.normalized())) < 0.5) {
      b = d;
      break;
    }
  }
  if (!b) return {};

  GridMap grid;
  std::map<int, std::pair<int, int>> used;
  grid[{0, 0}] = seed;
  used[seed] = {0, 0};
  std::queue<std::pair<int, int>> todo;
  todo.push({0, 0});
  auto pos = [&](std::pair<int, int> k) { return cands[static_cast<std::size_t>(grid.at(k))].p; };
  auto has = [&](std::pair<int, int> k) { return grid.count(k) > 0; };

  while (!todo.empty()) {
    const auto [u, v] = todo.front();
    todo.pop();
    const Vec2 p = pos({u, v});
    const std::array<std::pair<int, int>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (auto [du, dv] : dirs) {
      const std::pair<int, int> target{u + du, v + dv};
      if (has(target)) continue;
      Vec2 step;
      if (has({u - du, v - dv}))
        step = p - pos({u - du, v - dv});
      else if (du != 0)
        step = du * a;
      else
        step = dv * *b;
      // Prefer a step measured on a parallel row/column when available.
      if (!has({u - du, v - dv})) {
        const std::array<std::pair<int, int>, 2> side{{{u + dv, v + du}, {u - dv, v - du}}};
        for (auto sd : side)
          if (has(sd) && has({sd.first + du, sd.second + dv})) {
            step = pos({sd.first + du, sd.second + dv}) - pos(sd);
            break;
          }
      }
      const Vec2 pred = p + step;
      const double tol = 0.3 * step.norm();
      int best = -1;
      double best_d = tol;
      for (int i = 0; i < static_cast<int>(cands.size()); ++i) {
        const double d = (cands[static_cast<std::size_t>(i)].p - pred).norm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      if (best < 0 || used.count(best)) continue;
      grid[target] = best;
      used[best] = target;
      todo.push(target);
    }
  }
  return grid;
}

}  // namespace detail

/// Finds the inner corners of a checkerboard and labels them row-major from the canonical board
/// corner, whose outer diagonal square is dark. Model points are (col * s, row * s, 0).
inline Detection detect_checkerboard_ex(const GrayImage& img, const CheckerboardSpec& spec, const DetectOptions& opt = {}) {
  spec.validate();
  const auto expected = static_cast<std::size_t>(spec.corner_count());
  const Image<float> smooth = gaussian_blur(img, opt.smoothing_sigma);
  auto raw = detail::saddle_candidates(smooth, opt);

  float lo = 1.0f, hi = 0.0f;
  for (float v : smooth.pixels()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double min_contrast = 0.2 * std::max(0.0f, hi - lo);

  std::vector<detail::Candidate> cands;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double nn = 1e300;
    for (std::size_t j = 0; j < raw.size(); ++j)
      if (i != j) nn = std::min(nn, (raw[i].p - raw[j].p).norm());
    const double radius = std::min(std::max(3.0 * opt.smoothing_sigma, 4.0), 0.4 * nn);
    if (radius < 2.0) continue;
    if (detail::ring_transitions(smooth, raw[i].p, radius, min_contrast) == 4) cands.push_back(raw[i]);
  }
  if (cands.size() < expected) throw DetectionError("checkerboard not found", cands.size(), expected);

  // Try seeds from the middle of the candidate cloud outwards.
  Vec2 centroid = Vec2::Zero();
  for (const auto& c : cands) centroid += c.p;
  centroid /= static_cast<double>(cands.size());
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < static_cast<int>(cands.size()); ++i) order.push_back({(cands[static_cast<std::size_t>(i)].p - centroid).norm(), i});
  std::sort(order.begin(), order.end());

  detail::GridMap grid;
  std::size_t best_size = 0;
  for (std::size_t k = 0; k < std::min<std::size_t>(order.size(), 12); ++k) {
    auto g = detail::grow_grid(cands, order[k].second);
    best_size = std::max(best_size, g.size());
    if (g.size() == expected) {
      grid = std::move(g);
      break;
    }
  }
  if (grid.size() != expected) throw DetectionError("corner lattice does not match the board", best_size, expected);

  int umin = 1 << 30, umax = -(1 << 30), vmin = 1 << 30, vmax = -(1 << 30);
  for (const auto& [k, idx] : grid) {
    umin = std::min(umin, k.first);
    umax = std::max(umax, k.first);
    vmin = std::min(vmin, k.second);
    vmax = std::max(vmax, k.second);
  }
  const int nu = umax - umin + 1, nv = vmax - vmin + 1;
  auto at = [&](int u, int v) { return cands[static_cast<std::size_t>(grid.at({u + umin, v + vmin}))].p; };

  // Enumerate lattice symmetries that fit the board size; keep right-handed labelings and rank
  // them by how dark the outer square at the origin is relative to its bright neighbor.
  struct Labeling {
    bool transpose, flip_u, flip_v;
    double contrast;
  };
  std::vector<Labeling> valid;
  for (int tr = 0; tr < 2; ++tr) {
    const int ncols = tr ? nv : nu;
    const int nrows = tr ? nu : nv;
    if (ncols != spec.inner_cols || nrows != spec.inner_rows) continue;
    for (int fu = 0; fu < 2; ++fu)
      for (int fv = 0; fv < 2; ++fv) {
        auto corner = [&](int row, int col) {
          int u = tr ? row : col;
          int v = tr ? col : row;
          if (fu) u = nu - 1 - u;
          if (fv) v = nv - 1 - v;
          return at(u, v);
        };
        const Vec2 p00 = corner(0, 0);
        const Vec2 dc = corner(0, 1) - p00;
        const Vec2 dr = corner(1, 0) - p00;
        if (dc.x() * dr.y() - dc.y() * dr.x() <= 0.0) continue;
        const Vec2 dark = p00 - 0.5 * dc - 0.5 * dr;
        const Vec2 bright = p00 + 0.5 * dc - 0.5 * dr;
        valid.push_back({tr != 0, fu != 0, fv != 0,
                         sample_bilinear(smooth, bright.x(), bright.y()) - sample_bilinear(smooth, dark.x(), dark.y())});
      }
  }
  if (valid.empty()) throw DetectionError("no right-handed labeling of the corner lattice", grid.size(), expected);
  std::stable_sort(valid.begin(), valid.end(), [](const Labeling& a, const Labeling& b) { return a.contrast > b.contrast; });
  const Labeling lab = valid.front();

  Detection det;
  det.ambiguous_orientation = std::count_if(valid.begin(), valid.end(), [](const Labeling& l) { return l.contrast > 0.0; }) > 1;
  for (int row = 0; row < spec.inner_rows; ++row)
    for (int col = 0; col < spec.inner_cols; ++col) {
      int u = lab.transpose ? row : col;
      int v = lab.transpose ? col : row;
      if (lab.flip_u) u = nu - 1 - u;
      if (lab.flip_v) v = nv - 1 - v;
      const Vec2 coarse = at(u, v);
      const auto fine = detail::refine_saddle(smooth, coarse, opt.smoothing_sigma, opt.max_refine_iterations);
      if (!fine) throw DetectionError("sub-pixel refinement failed", det.features.matches.size(), expected);
      det.features.matches.push_back({spec.id(row, col), *fine, spec.model_point(row, col)});
    }
  return det;
}

inline FeatureSet detect_checkerboard(const GrayImage& img, const CheckerboardSpec& spec, const DetectOptions& opt = {}) {
  return detect_checkerboard_ex(img, spec, opt).features;
}

}  // namespace msfuse::calib
