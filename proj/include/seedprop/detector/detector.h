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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seedprop/core/geometry.h"
#include "seedprop/propagation/propagate.h"
#include "seedprop/propagation/tracker_backend.h"

namespace seedprop {

struct TrainSpec {
  std::filesystem::path dataset;
  int epochs = 25;
  int batch = 12;
  int image_size = 640;
  double confidence = 0.2;
  double iou_threshold = 0.5;
  bool class_agnostic_nms = true;
  // Forwarded to the backend untouched.
  std::map<std::string, std::string> extensions{
      {"lr0", "0.01"}, {"optimizer", "SGD"}, {"pretrained", "false"}, {"augment", "false"}};

  void validate() const;
  bool operator==(const TrainSpec&) const = default;
};

struct Detection {
  int frame_index = 0;
  NormBox box;
  double confidence = 0.0;

  bool operator==(const Detection&) const = default;
};

using DetectionMap = std::map<int, std::vector<Detection>>;

struct PixelDetection {
  int class_id = 0;
  PixelBox box;
  double confidence = 0.0;
};

struct TrainRequest {
  std::string job_id;
  std::string dataset_path;
  TrainSpec spec;
};

struct TrainResponse {
  std::string job_id;
  std::string model_token;
  double wall_seconds = 0.0;
};

struct InferRequest {
  std::string job_id;
  std::string model_token;
  std::vector<int> frame_indices;
  std::vector<std::string> frame_paths;
  ImageGeometry geometry;
  double confidence = 0.2;
  double iou_threshold = 0.5;
  bool class_agnostic_nms = true;
};

struct InferResponse {
  std::string job_id;
  std::vector<std::vector<PixelDetection>> frames;  // request order
};

// A trainable detector reached over the wire (or in-process).
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual BackendInfo info() = 0;
  virtual TrainResponse train(const TrainRequest& request) = 0;
  virtual InferResponse infer(const InferRequest& request) = 0;
};

struct TrainResult {
  std::string model_token;
  double backend_seconds = 0.0;  // as reported by the backend
  double wall_seconds = 0.0;     // measured around the call
};

// Checks the dataset (read_dataset) and its class list, then trains.
TrainResult train(const TrainSpec& spec, std::span<const std::string> class_names,
                  DetectorBackend& backend, const std::string& job_id = "train");

// Runs inference over `frames`. Every requested frame appears in the result,
// possibly empty. Detections below spec.confidence are dropped with a
// warning; malformed responses throw BackendError.
DetectionMap infer(const std::string& model_token, std::span<const int> frames,
                   const FramePathFn& frame_path, const ImageGeometry& geometry,
                   const TrainSpec& spec, DetectorBackend& backend,
                   const std::string& job_id = "infer");

// NNNNNN.txt per frame, lines `class cx cy w h confidence`.
void write_detections(const std::filesystem::path& dir, const DetectionMap& detections);
DetectionMap read_detections(const std::filesystem::path& dir, std::size_t num_classes = 0);

}  // namespace seedprop
