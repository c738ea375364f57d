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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seedprop/core/error.h"
#include "seedprop/eval/metrics.h"
#include "seedprop/service/backends.h"
#include "seedprop/service/config.h"
#include "seedprop/store/project.h"

namespace seedprop {

// A stage failed. what() carries the stage name and the original message.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& cause);
  Stage stage() const { return stage_; }
  const std::string& cause() const { return cause_; }

 private:
  Stage stage_;
  std::string cause_;
};

struct PipelineResult {
  std::string run_id;
  std::vector<JobRecord> records;  // stages executed by this call
  std::vector<Stage> skipped;      // stages already committed by an earlier call
  std::optional<EvalReport> report;
};

using BackendFactory = std::function<Backends(const PipelineConfig&)>;

// Chains Propagate -> Segment -> Emit -> Train -> Infer -> Eval for the
// project's pairs whose seed mode matches the config. Each stage writes
// into a temporary location and is committed by a rename, so a rerun
// resumes at the first stage without a committed output.
class Pipeline {
 public:
  Pipeline(const ProjectStore& store, std::string project_id, PipelineConfig config,
           BackendFactory factory);

  const std::string& run_id() const { return run_id_; }
  const PipelineConfig& config() const { return config_; }
  const std::vector<AnnotationSequencePair>& pairs() const { return pairs_; }

  // Throws ValidationError before any stage starts when preconditions
  // fail, StageError when a stage fails.
  PipelineResult run(Stage last = Stage::kEval);

  std::filesystem::path output_path(Stage stage) const;
  bool committed(Stage stage) const;

 private:
  void execute(Stage stage);
  void run_propagate();
  void run_segment();
  void run_emit();
  void run_train();
  void run_infer();
  void run_eval();
  Backends& backends();
  std::string frame_path(int frame) const;
  std::vector<int> infer_frames() const;

  const ProjectStore& store_;
  std::string project_id_;
  PipelineConfig config_;
  BackendFactory factory_;
  Project project_;
  std::vector<AnnotationSequencePair> pairs_;
  std::string run_id_;
  std::filesystem::path dir_;
  std::optional<Backends> backends_;
  std::map<int, std::filesystem::path> frames_;
  std::optional<EvalReport> report_;
};

// Default factory: make_backends() against the project directory.
BackendFactory default_backend_factory(const ProjectStore& store, const std::string& project_id);

// Directory names under labels/ for the review endpoint.
std::optional<Stage> parse_label_stage(std::string_view name);
// Newest committed run under a stage output directory.
std::optional<std::string> latest_run(const std::filesystem::path& stage_dir);
// Labels of one frame from a committed stage. Propagated and segmented
// labels come from the stage's labels.json, inferred from detection files.
FrameLabels read_stage_labels(const ProjectStore& store, const std::string& project_id,
                              Stage stage, const std::string& run_id, int frame);

struct SweepRow {
  AblationTag tag;
  std::string run_id;
  EvalReport report;
};

// Runs the 8 ablation configurations in table order. Every pair window
// needs both a fixed and a variable seed.
std::vector<SweepRow> ablation_sweep(const ProjectStore& store, const std::string& project_id,
                                     const PipelineConfig& base, const BackendFactory& factory);

}  // namespace seedprop
