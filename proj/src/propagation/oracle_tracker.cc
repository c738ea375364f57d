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

#include "seedprop/propagation/oracle_tracker.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "seedprop/core/error.h"

namespace seedprop {

OracleTracker::OracleTracker(synthetic::SyntheticScene scene, OracleTrackerOptions options)
    : scene_(std::move(scene)), options_(options) {}

BackendInfo OracleTracker::info() {
  return BackendInfo{"oracle-tracker", "1", options_.max_points, options_.max_chunk, 0};
}

namespace {

Point2 exact_position(const synthetic::SceneTarget& target, int frame, bool sticking) {
  Point2 p = target.center_at(frame);
  if (sticking) {
    p.x = std::clamp(p.x, 0.0, 1.0);
    p.y = std::clamp(p.y, 0.0, 1.0);
  }
  return p;
}

}  // namespace

Point2 OracleTracker::reported_position(const synthetic::SceneTarget& target,
                                        int frame) const {
  Point2 p = target.center_at(frame);
  if (options_.noise_amplitude > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(options_.noise_seed),
                      static_cast<std::uint32_t>(options_.noise_seed >> 32),
                      static_cast<std::uint32_t>(target.target_id),
                      static_cast<std::uint32_t>(frame)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> noise(-options_.noise_amplitude,
                                                 options_.noise_amplitude);
    p.x += noise(rng);
    p.y += noise(rng);
  }
  if (options_.border_sticking) {
    p.x = std::clamp(p.x, 0.0, 1.0);
    p.y = std::clamp(p.y, 0.0, 1.0);
  }
  return p;
}

TrackResponse OracleTracker::track(const TrackRequest& request) {
  ++calls_;
  if (request.frame_indices.empty()) throw BackendError("oracle tracker: empty chunk");
  const int anchor = request.frame_indices.front();

  std::vector<const synthetic::SceneTarget*> bound;
  for (const TrackQueryPoint& q : request.points) {
    const synthetic::SceneTarget* best = nullptr;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const synthetic::SceneTarget& t : scene_.targets) {
      const Point2 p = exact_position(t, anchor, options_.border_sticking);
      const double d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = &t;
      }
    }
    if (best == nullptr || std::sqrt(best_d2) > options_.binding_radius) {
      throw BackendError("oracle tracker: point " + std::to_string(q.track_id) +
                         " is not near any target at frame " + std::to_string(anchor));
    }
    bound.push_back(best);
  }

  TrackResponse response;
  response.job_id = request.job_id;
  for (int frame : request.frame_indices) {
    std::vector<TrackedPoint> points;
    for (std::size_t i = 0; i < request.points.size(); ++i) {
      const Point2 p = reported_position(*bound[i], frame);
      const bool visible = options_.border_sticking ||
                           (p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0);
      points.push_back(TrackedPoint{request.points[i].track_id, p.x, p.y, visible});
    }
    response.frames.push_back(std::move(points));
  }
  return response;
}

}  // namespace seedprop
