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

#include "seedprop/propagation/propagate.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "seedprop/core/error.h"

namespace seedprop {

void FilterConfig::validate() const {
  if (!(edge_margin >= 0.0 && edge_margin < 0.5)) {
    throw ValidationError("edge_margin must lie in [0, 0.5)");
  }
}

FilterResult positional_filter(std::span<const TrackPoint> points,
                               const FilterConfig& filter) {
  FilterResult result;
  if (!filter.enabled) {
    result.kept.assign(points.begin(), points.end());
    return result;
  }
  const double lo = filter.edge_margin + kClampEpsilon;
  const double hi = 1.0 - filter.edge_margin - kClampEpsilon;
  for (const TrackPoint& p : points) {
    const bool at_edge = p.cx <= lo || p.cx >= hi || p.cy <= lo || p.cy >= hi;
    if (at_edge) {
      TrackPoint dead = p;
      dead.status = TrackStatus::kTerminatedEdge;
      result.terminated.push_back(dead);
    } else {
      result.kept.push_back(p);
    }
  }
  return result;
}

namespace {

// Positions per track id, one entry per frame of the chunk.
using ChunkTracks = std::map<int, std::vector<TrackedPoint>>;

void check_response(const TrackRequest& request, const TrackResponse& response,
                    ChunkTracks& out) {
  if (response.job_id != request.job_id) {
    throw BackendError("tracker answered job '" + response.job_id + "', expected '" +
                       request.job_id + "'");
  }
  if (response.frames.size() != request.frame_indices.size()) {
    throw BackendError("tracker returned " + std::to_string(response.frames.size()) +
                       " frames for a " + std::to_string(request.frame_indices.size()) +
                       "-frame chunk");
  }
  std::set<int> wanted;
  for (const TrackQueryPoint& q : request.points) wanted.insert(q.track_id);
  for (const auto& frame : response.frames) {
    std::set<int> seen;
    for (const TrackedPoint& p : frame) {
      if (!wanted.contains(p.track_id) || !seen.insert(p.track_id).second) {
        throw BackendError("tracker returned unexpected or duplicate track " +
                           std::to_string(p.track_id));
      }
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw BackendError("tracker returned a non-finite position");
      }
      out[p.track_id].push_back(p);
    }
    if (seen.size() != wanted.size()) {
      throw BackendError("tracker dropped points from a frame");
    }
  }
}

}  // namespace

TrackSet propagate_pair(const AnnotationSequencePair& pair, TrackerBackend& backend,
                        const FilterConfig& filter, const ImageGeometry& geometry,
                        const FramePathFn& frame_path,
                        const PropagationOptions& options) {
  pair.validate();
  filter.validate();
  geometry.validate();
  if (options.chunk_length < 2) throw ValidationError("chunk_length must be >= 2");

  const int first = pair.first_frame();
  const int last = pair.last_frame();
  const std::string seed_path = frame_path(first);

  TrackSet tracks;
  TrackFrame seed_frame;
  seed_frame.frame_index = first;
  const std::vector<NormBox> boxes = pair.seed.initial_boxes();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const NormBox& b = boxes[i];
    seed_frame.points.push_back(
        TrackPoint{static_cast<int>(i), b.class_id, b.cx, b.cy, b.w, b.h, TrackStatus::kAlive});
  }
  std::vector<TrackPoint> alive = seed_frame.points;
  tracks.frames.push_back(std::move(seed_frame));
  if (first == last) return tracks;

  const BackendInfo info = backend.info();
  int chunk = options.chunk_length;
  if (info.max_chunk > 0) chunk = std::min(chunk, info.max_chunk);
  if (chunk < 2) throw BackendError("tracker max_chunk is below 2");
  const std::size_t group_size =
      info.max_points > 0 ? static_cast<std::size_t>(info.max_points) : alive.size();

  int start = first;
  while (start < last) {
    const int end = std::min(start + chunk - 1, last);
    TrackRequest request;
    request.job_id = options.job_id;
    request.geometry = geometry;
    for (int f = start; f <= end; ++f) {
      request.frame_indices.push_back(f);
      request.frame_paths.push_back(f == first ? seed_path : frame_path(f));
    }

    ChunkTracks positions;
    for (std::size_t offset = 0; offset < alive.size(); offset += group_size) {
      TrackRequest group = request;
      const std::size_t stop = std::min(alive.size(), offset + group_size);
      for (std::size_t i = offset; i < stop; ++i) {
        group.points.push_back(TrackQueryPoint{alive[i].track_id, alive[i].cx, alive[i].cy});
      }
      check_response(group, backend.track(group), positions);
    }

    for (int j = 1; j <= end - start; ++j) {
      std::vector<TrackPoint> moved;
      moved.reserve(alive.size());
      for (const TrackPoint& p : alive) {
        const TrackedPoint& pos = positions.at(p.track_id)[j];
        TrackPoint next = p;
        next.cx = std::clamp(pos.x, 0.0, 1.0);
        next.cy = std::clamp(pos.y, 0.0, 1.0);
        moved.push_back(next);
      }
      FilterResult filtered = positional_filter(moved, filter);
      TrackFrame frame;
      frame.frame_index = start + j;
      frame.points = filtered.kept;
      frame.points.insert(frame.points.end(), filtered.terminated.begin(),
                          filtered.terminated.end());
      std::sort(frame.points.begin(), frame.points.end(),
                [](const TrackPoint& a, const TrackPoint& b) { return a.track_id < b.track_id; });
      alive = std::move(filtered.kept);
      tracks.frames.push_back(std::move(frame));
    }
    start = end;
    if (alive.empty()) {
      // Nothing left to track; the remaining frames are explicit negatives.
      for (int f = start + 1; f <= last; ++f) tracks.frames.push_back(TrackFrame{f, {}});
      break;
    }
  }
  return tracks;
}

}  // namespace seedprop
