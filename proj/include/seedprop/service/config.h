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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/dataset/dataset.h"
#include "seedprop/detector/detector.h"
#include "seedprop/eval/metrics.h"
#include "seedprop/propagation/propagate.h"
#include "seedprop/segfit/segment_fit.h"
#include "seedprop/store/ground_truth.h"

namespace seedprop {

// Where a backend lives. kind is "oracle" (in-process, driven by a
// synthetic scene file), "reference" (in-process reference detector) or
// "process" (external command speaking the NDJSON wire protocol).
struct BackendSpec {
  std::string kind;
  std::string scene;                  // oracle backends
  std::vector<std::string> command;   // process backends: argv
  std::map<std::string, double> options;
  double timeout_seconds = 600.0;

  bool operator==(const BackendSpec&) const = default;
};

struct GroundTruthSource {
  std::string path;  // relative paths resolve against the project directory
  GroundTruthFormat format = GroundTruthFormat::kYoloTxtDir;

  bool operator==(const GroundTruthSource&) const = default;
};

// One versioned config per run. Its canonical text is snapshotted into
// every JobRecord and hashed into the run id.
struct PipelineConfig {
  SelectionMode mode = SelectionMode::kVariableBox;
  FilterConfig filter;
  SegfitConfig segfit;
  TrainSpec train;  // train.dataset is filled in by the pipeline
  MatchConfig match;
  int chunk_length = 8;
  DatasetVariant variant = DatasetVariant::kDetect;
  double train_fraction = 1.0;
  BackendSpec tracker{"oracle", "", {}, {}, 600.0};
  BackendSpec segmenter{"oracle", "", {}, {}, 600.0};
  BackendSpec detector{"reference", "", {}, {}, 600.0};
  std::optional<GroundTruthSource> ground_truth;
  // Frames handed to inference; empty means every project frame.
  std::vector<int> infer_frames;

  void validate() const;
  // Derived from mode, segfit.enabled and filter.enabled; never set directly.
  AblationTag tag() const;
  // Canonical JSON text (sorted, fixed float formatting).
  std::string to_text() const;
  // Short hex digest of to_text().
  std::string hash() const;
};

inline constexpr int kConfigVersion = 1;

// Missing fields keep their defaults. Throws ParseError / ValidationError.
PipelineConfig parse_pipeline_config(std::string_view text,
                                     std::string_view source = "config");

}  // namespace seedprop
