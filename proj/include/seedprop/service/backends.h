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

#include <filesystem>
#include <memory>

#include "seedprop/detector/detector.h"
#include "seedprop/propagation/tracker_backend.h"
#include "seedprop/segfit/segmenter_backend.h"
#include "seedprop/service/config.h"

namespace seedprop {

struct Backends {
  std::shared_ptr<TrackerBackend> tracker;
  std::shared_ptr<SegmenterBackend> segmenter;  // null when segment fitting is off
  std::shared_ptr<DetectorBackend> detector;
};

// Builds the backends a config names. Relative scene paths resolve against
// `base_dir`. Options recognized per kind:
//   oracle tracker:   binding_radius, noise_amplitude, border_sticking,
//                     noise_seed, max_points, max_chunk
//   oracle segmenter: dilation_px, max_prompts
//   reference:        decay
Backends make_backends(const PipelineConfig& config, const ImageGeometry& geometry,
                       const std::filesystem::path& base_dir);

}  // namespace seedprop
