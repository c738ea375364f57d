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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/detector/detector.h"
#include "seedprop/store/ground_truth.h"

namespace seedprop {

struct MatchConfig {
  double iou_threshold = 0.5;
  double confidence_floor = 0.2;
  bool class_agnostic = false;

  void validate() const;
};

struct FrameMatch {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<std::pair<int, int>> pairs;  // (detection index, gt index)
  std::vector<bool> det_is_tp;             // per input detection

  bool operator==(const FrameMatch&) const = default;
};

// Greedy matching. Detections are visited by confidence (descending), then
// by their best same-class IoU (descending), then by index. Each takes the
// unmatched GT of its class with the highest IoU >= threshold, lower GT
// index on ties. No confidence filtering happens here.
FrameMatch match_frame(std::span<const NormBox> gt, std::span<const Detection> dets,
                       double iou_threshold, bool class_agnostic = false);
FrameMatch match_frame(const FrameLabels& gt, std::span<const Detection> dets,
                       const MatchConfig& config);

struct ScoredDetection {
  double confidence = 0.0;
  bool tp = false;
};

// 101-point interpolated AP over one class. Detections are ranked by
// confidence (stable, so callers control tie order). nullopt when
// num_gt == 0.
std::optional<double> average_precision(std::span<const ScoredDetection> ranked,
                                        std::size_t num_gt);

struct ClassMetrics {
  std::size_t gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::optional<double> ap50;
  std::optional<double> ap;  // mean over IoU 0.50:0.05:0.95
};

struct EvalReport {
  std::string method;
  std::size_t total_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fp_pct = 0.0;  // fp / total_gt
  double fn_pct = 0.0;  // fn / total_gt
  double map50 = 0.0;
  double map = 0.0;
  std::map<int, ClassMetrics> per_class;

  // Fills the ratio fields from the counts. total_gt = tp + fn.
  static EvalReport from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
};

// Matches every frame of `gt` at config thresholds. Frames missing from
// `detections` count all their GT as misses; detection frames absent from
// `gt` count as empty GT frames. Throws ValidationError when gt holds no
// boxes.
EvalReport evaluate(const FrameLabelMap& gt, const DetectionMap& detections,
                    const MatchConfig& config);

// Pooled counts over several videos (micro) and the per-video mean of each
// ratio (macro).
struct MultiVideoReport {
  EvalReport micro;
  EvalReport macro;
  std::vector<EvalReport> per_video;
};
MultiVideoReport evaluate_videos(std::span<const EvalReport> per_video);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ThroughputReport {
  std::vector<StageTiming> stages;
  double total_seconds = 0.0;
  std::size_t total_frames = 0;
  double fps = 0.0;  // 0 when there are no frames or no time
};

ThroughputReport throughput_report(std::span<const StageTiming> stages,
                                   std::size_t total_frames);

// Automatic frames per manual seed frame, shown as "1:274".
struct AnnotationRatio {
  std::size_t seed_frames = 0;
  std::size_t inferred_frames = 0;

  double value() const;
  std::string display() const;
};

// Report files: the CSV header matches the ablation table columns.
std::string report_csv(std::span<const EvalReport> rows);
std::string report_json(std::span<const EvalReport> rows);
std::vector<EvalReport> parse_report_json(const std::string& text);

}  // namespace seedprop
