// Copyright 2026 The seedprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seedprop/segfit/contour.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "seedprop/core/error.h"

namespace seedprop {
namespace {

// Moore neighborhood in clockwise order (y points down), starting west.
constexpr std::array<PixelCoord, 8> kRing = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kRing[i].x == dx && kRing[i].y == dy) return i;
  }
  return -1;
}

struct TraceState {
  PixelCoord pixel;
  int backtrack = 0;  // kRing index pointing at a background neighbor

  bool operator==(const TraceState&) const = default;
};

// Sweeps clockwise from the backtrack neighbor to the next foreground pixel.
std::optional<TraceState> moore_step(const MaskGrid& mask, const TraceState& state) {
  for (int k = 1; k <= 8; ++k) {
    const int idx = (state.backtrack + k) % 8;
    const PixelCoord next{state.pixel.x + kRing[idx].x, state.pixel.y + kRing[idx].y};
    if (!mask.test_or_background(next.x, next.y)) continue;
    const int prev = (idx + 7) % 8;
    const PixelCoord background{state.pixel.x + kRing[prev].x,
                                state.pixel.y + kRing[prev].y};
    return TraceState{next, ring_index(background.x - next.x, background.y - next.y)};
  }
  return std::nullopt;
}

double segment_distance(const PixelCoord& p, const PixelCoord& a, const PixelCoord& b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double wx = p.x - a.x;
  const double wy = p.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::hypot(wx, wy);
  const double t = std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0);
  return std::hypot(wx - t * vx, wy - t * vy);
}

void douglas_peucker(std::span<const PixelCoord> points, std::size_t lo, std::size_t hi,
                     double tolerance, std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t worst_index = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = segment_distance(points[i], points[lo], points[hi]);
    if (d > worst) {
      worst = d;
      worst_index = i;
    }
  }
  if (worst > tolerance) {
    keep[worst_index] = true;
    douglas_peucker(points, lo, worst_index, tolerance, keep);
    douglas_peucker(points, worst_index, hi, tolerance, keep);
  }
}

}  // namespace

ComponentInfo largest_component(const MaskGrid& mask) {
  const int width = mask.width();
  const int height = mask.height();
  std::vector<int> label(static_cast<std::size_t>(width) * height, 0);
  std::vector<PixelCoord> stack;
  std::vector<PixelCoord> best_pixels;
  std::vector<PixelCoord> pixels;
  std::size_t components = 0;

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t at = static_cast<std::size_t>(y) * width + x;
      if (!mask.test(x, y) || label[at] != 0) continue;
      ++components;
      pixels.clear();
      stack.push_back({x, y});
      label[at] = static_cast<int>(components);
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        pixels.push_back(p);
        for (const PixelCoord& d : kRing) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (!mask.test_or_background(nx, ny)) continue;
          int& l = label[static_cast<std::size_t>(ny) * width + nx];
          if (l != 0) continue;
          l = static_cast<int>(components);
          stack.push_back({nx, ny});
        }
      }
      if (pixels.size() > best_pixels.size()) std::swap(best_pixels, pixels);
    }
  }
  if (best_pixels.empty()) throw ValidationError("mask has no foreground pixels");

  ComponentInfo info{MaskGrid(mask.geometry()), best_pixels.size(), components};
  for (const PixelCoord& p : best_pixels) info.mask.set(p.x, p.y);
  return info;
}

std::vector<PixelCoord> extract_contour(const MaskGrid& mask) {
  const ComponentInfo component = largest_component(mask);
  const MaskGrid& blob = component.mask;

  PixelCoord start{-1, -1};
  for (int y = 0; y < blob.height() && start.x < 0; ++y) {
    for (int x = 0; x < blob.width(); ++x) {
      if (blob.test(x, y)) {
        start = {x, y};
        break;
      }
    }
  }

  std::vector<PixelCoord> ring{start};
  // Raster order guarantees the west neighbor of the start is background.
  const TraceState initial{start, 0};
  const std::optional<TraceState> first = moore_step(blob, initial);
  if (!first) return ring;

  const std::size_t limit = 4 * component.pixel_count + 16;
  TraceState state = *first;
  while (ring.size() <= limit) {
    if (state.pixel == start) {
      const std::optional<TraceState> next = moore_step(blob, state);
      if (*next == *first) break;  // Jacob's stopping criterion
      ring.push_back(state.pixel);
      state = *next;
      continue;
    }
    ring.push_back(state.pixel);
    state = *moore_step(blob, state);
  }
  return ring;
}

PixelBox min_bounding_box(const MaskGrid& mask) {
  int x_min = mask.width(), y_min = mask.height(), x_max = -1, y_max = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max < 0) throw ValidationError("cannot bound an empty mask");
  return PixelBox{double(x_min), double(y_min), double(x_max + 1), double(y_max + 1)};
}

PixelBox min_bounding_box(std::span<const PixelCoord> pixels) {
  if (pixels.empty()) throw ValidationError("cannot bound an empty contour");
  PixelCoord lo = pixels.front();
  PixelCoord hi = pixels.front();
  for (const PixelCoord& p : pixels) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  return PixelBox{double(lo.x), double(lo.y), double(hi.x + 1), double(hi.y + 1)};
}

std::vector<PixelCoord> simplify_ring(std::span<const PixelCoord> ring, double tolerance_px) {
  if (ring.size() <= 3) return {ring.begin(), ring.end()};
  // Split the closed ring at the vertex farthest from the first one.
  std::size_t far = 0;
  double far_d2 = -1.0;
  for (std::size_t i = 1; i < ring.size(); ++i) {
    const double dx = ring[i].x - ring[0].x;
    const double dy = ring[i].y - ring[0].y;
    if (dx * dx + dy * dy > far_d2) {
      far_d2 = dx * dx + dy * dy;
      far = i;
    }
  }
  std::vector<PixelCoord> closed(ring.begin(), ring.end());
  closed.push_back(ring.front());
  std::vector<bool> keep(closed.size(), false);
  keep[0] = true;
  keep[far] = true;
  douglas_peucker(closed, 0, far, tolerance_px, keep);
  douglas_peucker(closed, far, closed.size() - 1, tolerance_px, keep);

  std::vector<PixelCoord> out;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i) {
    if (keep[i]) out.push_back(closed[i]);
  }
  return out;
}

}  // namespace seedprop
