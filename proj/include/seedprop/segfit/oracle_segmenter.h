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

#include "seedprop/segfit/segmenter_backend.h"
#include "seedprop/synthetic/scene.h"

namespace seedprop {

struct OracleSegmenterOptions {
  // The prompt box is grown (positive) or shrunk (negative) by this many
  // pixels per side before it is intersected with the true shape.
  double dilation_px = 0.0;
  int max_prompts = 0;
};

// Deterministic segmenter answering with the true shape of the target that
// best overlaps each prompt, cut to the dilated prompt box.
class OracleSegmenter final : public SegmenterBackend {
 public:
  OracleSegmenter(synthetic::SyntheticScene scene, OracleSegmenterOptions options = {});

  BackendInfo info() override;
  SegmentResponse segment(const SegmentRequest& request) override;

  // The mask for one prompt; empty when no target overlaps the region.
  MaskGrid mask_for(int frame_index, const PixelBox& prompt) const;
  int call_count() const { return calls_.load(); }

 private:
  synthetic::SyntheticScene scene_;
  OracleSegmenterOptions options_;
  std::atomic<int> calls_{0};
};

}  // namespace seedprop
