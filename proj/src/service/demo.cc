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

#include "seedprop/service/demo.h"

#include "seedprop/store/label_io.h"

namespace seedprop {
namespace fs = std::filesystem;

PipelineConfig create_synthetic_project(ProjectStore& store, const std::string& project_id,
                                        const synthetic::SyntheticScene& scene,
                                        int pair_frames, double segmenter_dilation_px) {
  store.create_project(project_id, scene.geometry, scene.frame_count, {"object"});
  const fs::path dir = store.project_dir(project_id);
  write_text_file(dir / "scene.json", synthetic::to_json_text(scene));
  scene.write_frames(store.frames_dir(project_id));
  fs::create_directories(dir / "ground_truth");
  for (const auto& [f, labels] : scene.ground_truth()) {
    write_box_file(dir / "ground_truth" / (frame_stem(f) + ".txt"), labels.boxes);
  }
  {
    ProjectLock lock = store.lock(project_id);
    Project p = store.load(project_id);
    p.pairs.push_back(scene.make_pair(0, pair_frames, SelectionMode::kFixedBox));
    p.pairs.push_back(scene.make_pair(0, pair_frames, SelectionMode::kVariableBox));
    store.save(p);
  }
  PipelineConfig config;
  config.tracker.scene = "scene.json";
  config.segmenter.scene = "scene.json";
  config.segmenter.options["dilation_px"] = segmenter_dilation_px;
  config.ground_truth = GroundTruthSource{"ground_truth", GroundTruthFormat::kYoloTxtDir};
  config.validate();
  write_text_file(dir / "config.json", config.to_text());
  return config;
}

}  // namespace seedprop
