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

#include <atomic>
#include <cstddef>
#include <string>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"
#include "seedprop/propagation/propagate.h"
#include "seedprop/segfit/contour.h"
#include "seedprop/segfit/segmenter_backend.h"

namespace seedprop {

struct SegfitConfig {
  int batch_size = 50;
  int min_mask_pixels = 4;
  // false passes the propagated boxes through untouched, without polygons.
  bool enabled = true;
  double simplify_tolerance_px = 1.5;
  int workers = 1;  // frames processed concurrently

  void validate() const;
};

struct SegfitStats {
  std::atomic<std::size_t> backend_calls{0};
  std::atomic<std::size_t> fallbacks{0};        // empty masks, prompt box kept
  std::atomic<std::size_t> fragment_losses{0};  // masks with more than one blob
};

// Result of fitting one mask.
struct FittedInstance {
  NormBox box;
  PolygonLabel polygon;
};

// Fits the minimum bounding box and a simplified boundary polygon to the
// largest component of `mask`. Polygon vertices are pixel centers.
FittedInstance fit_mask(const MaskGrid& mask, int class_id, double simplify_tolerance_px,
                        std::size_t* fragments = nullptr);

// Rectangle polygon on a box's corners, used when a mask is unusable.
PolygonLabel box_polygon(const NormBox& box);

// Prompts the segmenter with every alive track box (seed frame included)
// and returns one FrameLabels per TrackSet frame, in order.
std::vector<FrameLabels> segment_and_fit(const TrackSet& tracks,
                                         SegmenterBackend* backend,
                                         const SegfitConfig& config,
                                         const ImageGeometry& geometry,
                                         const FramePathFn& frame_path,
                                         const std::string& job_id = "segment",
                                         SegfitStats* stats = nullptr);

}  // namespace seedprop
