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

#pragma once

// Independent oracles for matching and AP, shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <random>
#include <tuple>
#include <vector>

#include "rational.h"
#include "seedprop/detector/detector.h"
#include "seedprop/eval/metrics.h"

namespace seedprop::testing {


// Boxes with corners on a 1/64 grid, so every double operation in iou() is
// exact and ties agree with the rational oracle.
struct GridBox {
  int cls;
  int x0, y0, x1, y1;  // in 1/64 units

  NormBox norm() const {
    return NormBox{cls, (x0 + x1) / 128.0, (y0 + y1) / 128.0, (x1 - x0) / 64.0,
                   (y1 - y0) / 64.0};
  }
};

inline GridBox random_box(std::mt19937_64& rng, int num_classes) {
  std::uniform_int_distribution<int> pos(0, 56), len(2, 16), cls(0, num_classes - 1);
  const int x0 = pos(rng), y0 = pos(rng);
  return GridBox{cls(rng), x0, y0, std::min(64, x0 + len(rng)), std::min(64, y0 + len(rng))};
}

inline Rational oracle_iou(const GridBox& a, const GridBox& b) {
  const Rational ra[4] = {a.x0, a.y0, a.x1, a.y1};
  const Rational rb[4] = {b.x0, b.y0, b.x1, b.y1};
  return rational_iou(ra, rb);
}

struct Instance {
  std::vector<GridBox> gt;
  std::vector<GridBox> det;
  std::vector<double> conf;
};

// Detections are jittered copies of GT plus strays, with few distinct
// confidences so tie rules get exercised.
inline Instance random_instance(std::mt19937_64& rng, int num_classes) {
  Instance in;
  std::uniform_int_distribution<int> count(0, 6), jitter(-3, 3), coin(0, 2);
  const double levels[] = {0.3, 0.5, 0.5, 0.9, 0.9, 1.0};
  std::uniform_int_distribution<int> level(0, 5);
  const int n_gt = count(rng);
  for (int i = 0; i < n_gt; ++i) in.gt.push_back(random_box(rng, num_classes));
  const int n_det = count(rng);
  for (int i = 0; i < n_det; ++i) {
    GridBox d = random_box(rng, num_classes);
    if (!in.gt.empty() && coin(rng) > 0) {
      d = in.gt[std::uniform_int_distribution<std::size_t>(0, in.gt.size() - 1)(rng)];
      d.x0 = std::clamp(d.x0 + jitter(rng), 0, d.x1 - 1);
      d.y1 = std::clamp(d.y1 + jitter(rng), d.y0 + 1, 64);
      if (coin(rng) == 0) d.cls = (d.cls + 1) % num_classes;
    }
    in.det.push_back(d);
    in.conf.push_back(levels[level(rng)]);
  }
  return in;
}

inline std::vector<NormBox> gt_boxes(const Instance& in) {
  std::vector<NormBox> out;
  for (const GridBox& b : in.gt) out.push_back(b.norm());
  return out;
}

inline std::vector<Detection> detections(const Instance& in) {
  std::vector<Detection> out;
  for (std::size_t i = 0; i < in.det.size(); ++i) {
    out.push_back(Detection{0, in.det[i].norm(), in.conf[i]});
  }
  return out;
}

// Enumerates the visiting order explicitly, then assigns.
inline FrameMatch oracle_match(const Instance& in, bool agnostic) {
  const Rational threshold(1, 2);
  auto same = [&](const GridBox& d, const GridBox& g) { return agnostic || d.cls == g.cls; };
  std::vector<std::tuple<double, Rational, int>> keys;  // (-conf, -best, index)
  for (std::size_t d = 0; d < in.det.size(); ++d) {
    Rational best(0);
    for (const GridBox& g : in.gt) {
      if (same(in.det[d], g)) best = rmax(best, oracle_iou(in.det[d], g));
    }
    keys.emplace_back(-in.conf[d], Rational(0) - best, static_cast<int>(d));
  }
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    if (!(std::get<1>(a) == std::get<1>(b))) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });

  FrameMatch m;
  m.det_is_tp.assign(in.det.size(), false);
  std::vector<bool> taken(in.gt.size(), false);
  for (const auto& key : keys) {
    const int d = std::get<2>(key);
    int pick = -1;
    Rational pick_iou(0);
    for (std::size_t g = 0; g < in.gt.size(); ++g) {
      if (taken[g] || !same(in.det[d], in.gt[g])) continue;
      const Rational v = oracle_iou(in.det[d], in.gt[g]);
      if (v < threshold) continue;
      if (pick < 0 || pick_iou < v) {
        pick = static_cast<int>(g);
        pick_iou = v;
      }
    }
    if (pick < 0) {
      ++m.fp;
      continue;
    }
    taken[pick] = true;
    m.det_is_tp[d] = true;
    m.pairs.emplace_back(d, pick);
    ++m.tp;
  }
  m.fn = static_cast<int>(in.gt.size()) - m.tp;
  return m;
}

// Interpolated precision at each recall point taken straight from its
// definition: the best precision at any rank reaching that recall.
inline double oracle_ap(const std::vector<ScoredDetection>& ranked, std::size_t num_gt) {
  std::vector<std::size_t> order(ranked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranked[a].confidence > ranked[b].confidence;
  });
  double sum = 0.0;
  for (int t = 0; t <= 100; ++t) {
    double best = 0.0;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (ranked[order[k]].tp) ++tp;
      if (Rational(static_cast<long long>(tp), static_cast<long long>(num_gt)) <
          Rational(t, 100)) {
        continue;
      }
      best = std::max(best, static_cast<double>(tp) / static_cast<double>(k + 1));
    }
    sum += best;
  }
  return sum / 101.0;
}

}  // namespace seedprop::testing
