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

#include <cstdint>
#include <string>
#include <vector>

#include "seedprop/core/geometry.h"
#include "seedprop/propagation/tracker_backend.h"

namespace seedprop {

struct SegmentPrompt {
  int track_id = 0;
  PixelBox box;  // clamped to the image
};

// One frame's worth of box prompts, at most max_prompts of them.
struct SegmentRequest {
  std::string job_id;
  int frame_index = 0;
  std::string frame_path;
  ImageGeometry geometry;
  std::vector<SegmentPrompt> boxes;
};

// Masks are answered in the frame's native pixel grid.
struct MaskResult {
  int track_id = 0;
  std::vector<std::uint32_t> rle;
  int rows = 0;
  int cols = 0;
};

struct SegmentResponse {
  std::string job_id;
  std::vector<MaskResult> masks;
};

// A promptable segmenter. Implementations must be safe to call from several
// threads.
class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;
  virtual BackendInfo info() = 0;
  virtual SegmentResponse segment(const SegmentRequest& request) = 0;
};

}  // namespace seedprop
