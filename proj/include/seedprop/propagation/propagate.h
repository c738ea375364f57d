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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"
#include "seedprop/propagation/tracker_backend.h"

namespace seedprop {

struct FilterConfig {
  double edge_margin = 0.01;  // normalized border band
  bool enabled = true;

  void validate() const;
};

struct FilterResult {
  std::vector<TrackPoint> kept;
  // Copies of the removed points with status TerminatedEdge.
  std::vector<TrackPoint> terminated;
};

// A point is terminated iff its center lies in the border band:
// cx <= m, cx >= 1-m, cy <= m or cy >= 1-m (with kClampEpsilon slack).
FilterResult positional_filter(std::span<const TrackPoint> points,
                               const FilterConfig& filter);

// Resolves a frame index to the image file handed to backends. Throws
// NotFoundError for frames that do not exist.
using FramePathFn = std::function<std::string(int frame_index)>;

struct PropagationOptions {
  std::string job_id = "propagate";
  int chunk_length = 8;
};

// Tracks a pair's seed points through its frame window. The result holds
// the seed frame followed by frames seed+1 .. seed+N-1. Any backend
// failure throws and discards the whole window.
TrackSet propagate_pair(const AnnotationSequencePair& pair,
                        TrackerBackend& backend, const FilterConfig& filter,
                        const ImageGeometry& geometry, const FramePathFn& frame_path,
                        const PropagationOptions& options = {});

}  // namespace seedprop
