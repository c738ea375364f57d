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

#include "seedprop/segfit/oracle_segmenter.h"

#include "seedprop/core/error.h"

namespace seedprop {

OracleSegmenter::OracleSegmenter(synthetic::SyntheticScene scene,
                                 OracleSegmenterOptions options)
    : scene_(std::move(scene)), options_(options) {}

BackendInfo OracleSegmenter::info() {
  return BackendInfo{"oracle-segmenter", "1", 0, 0, options_.max_prompts};
}

MaskGrid OracleSegmenter::mask_for(int frame_index, const PixelBox& prompt) const {
  const double d = options_.dilation_px;
  const PixelBox region = clip_to_image(
      PixelBox{prompt.x_min - d, prompt.y_min - d, prompt.x_max + d, prompt.y_max + d},
      scene_.geometry);
  if (region.degenerate()) return MaskGrid(scene_.geometry);
  const synthetic::SceneTarget* best = nullptr;
  std::size_t best_count = 0;
  for (const synthetic::SceneTarget& target : scene_.targets) {
    const std::size_t count = scene_.coverage(target, frame_index, region);
    if (count > best_count) {
      best_count = count;
      best = &target;
    }
  }
  if (best == nullptr) return MaskGrid(scene_.geometry);
  return scene_.rasterize(*best, frame_index, region);
}

SegmentResponse OracleSegmenter::segment(const SegmentRequest& request) {
  ++calls_;
  if (request.geometry != scene_.geometry) {
    throw BackendError("oracle segmenter: request geometry differs from the scene");
  }
  if (options_.max_prompts > 0 &&
      request.boxes.size() > static_cast<std::size_t>(options_.max_prompts)) {
    throw BackendError("oracle segmenter: too many prompts in one request");
  }
  SegmentResponse response;
  response.job_id = request.job_id;
  for (const SegmentPrompt& prompt : request.boxes) {
    const MaskGrid mask = mask_for(request.frame_index, prompt.box);
    response.masks.push_back(MaskResult{prompt.track_id, encode_rle(mask),
                                        scene_.geometry.height_px, scene_.geometry.width_px});
  }
  return response;
}

}  // namespace seedprop
