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

#include <string>

#include "seedprop/service/config.h"
#include "seedprop/store/project.h"
#include "seedprop/synthetic/scene.h"

namespace seedprop {

// Creates a project backed by a synthetic scene: frames, scene.json,
// ground_truth/ (YOLO), a fixed and a variable seed over frames
// [0, pair_frames), and config.json wired to the oracle backends.
// Returns the config that was written.
PipelineConfig create_synthetic_project(ProjectStore& store, const std::string& project_id,
                                        const synthetic::SyntheticScene& scene,
                                        int pair_frames, double segmenter_dilation_px = 16.0);

}  // namespace seedprop
