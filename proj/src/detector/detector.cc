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

#include "seedprop/detector/detector.h"

#include <chrono>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/dataset/dataset.h"
#include "seedprop/store/label_io.h"

namespace seedprop {
namespace fs = std::filesystem;

void TrainSpec::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch < 1) throw ValidationError("batch must be >= 1");
  if (image_size < 1) throw ValidationError("image_size must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("confidence must lie in (0, 1)");
  }
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ValidationError("iou_threshold must lie in (0, 1)");
  }
}

TrainResult train(const TrainSpec& spec, std::span<const std::string> class_names,
                  DetectorBackend& backend, const std::string& job_id) {
  spec.validate();
  const Dataset dataset = read_dataset(spec.dataset);
  if (!std::equal(class_names.begin(), class_names.end(),
                  dataset.manifest.class_names.begin(), dataset.manifest.class_names.end())) {
    throw ValidationError(fmt::format("dataset classes [{}] differ from project classes [{}]",
                                      fmt::join(dataset.manifest.class_names, ", "),
                                      fmt::join(class_names, ", ")));
  }
  TrainRequest request{job_id, spec.dataset.string(), spec};
  const auto start = std::chrono::steady_clock::now();
  const TrainResponse response = backend.train(request);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  if (response.job_id != job_id) {
    throw BackendError("detector answered job '" + response.job_id + "', expected '" +
                       job_id + "'");
  }
  if (response.model_token.empty()) throw BackendError("detector returned an empty model token");
  return TrainResult{response.model_token, response.wall_seconds, elapsed.count()};
}

DetectionMap infer(const std::string& model_token, std::span<const int> frames,
                   const FramePathFn& frame_path, const ImageGeometry& geometry,
                   const TrainSpec& spec, DetectorBackend& backend, const std::string& job_id) {
  spec.validate();
  geometry.validate();
  DetectionMap out;
  if (frames.empty()) return out;

  InferRequest request;
  request.job_id = job_id;
  request.model_token = model_token;
  request.geometry = geometry;
  request.confidence = spec.confidence;
  request.iou_threshold = spec.iou_threshold;
  request.class_agnostic_nms = spec.class_agnostic_nms;
  for (int f : frames) {
    request.frame_indices.push_back(f);
    request.frame_paths.push_back(frame_path(f));
  }
  const InferResponse response = backend.infer(request);
  if (response.job_id != job_id) {
    throw BackendError("detector answered job '" + response.job_id + "', expected '" +
                       job_id + "'");
  }
  if (response.frames.size() != frames.size()) {
    throw BackendError(fmt::format("detector returned {} frames for {} requested",
                                   response.frames.size(), frames.size()));
  }

  std::size_t dropped = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::vector<Detection>& slot = out[frames[i]];
    for (const PixelDetection& d : response.frames[i]) {
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        throw BackendError(fmt::format("detector confidence {} outside [0, 1]", d.confidence));
      }
      if (d.class_id < 0) throw BackendError("detector returned a negative class id");
      if (d.confidence < spec.confidence) {
        ++dropped;
        continue;
      }
      NormBox box;
      try {
        box = pixel_to_norm(d.box, geometry, d.class_id);
      } catch (const ValidationError&) {
        ++dropped;
        continue;
      }
      slot.push_back(Detection{frames[i], box, d.confidence});
    }
  }
  if (dropped > 0) {
    spdlog::warn("dropped {} detection(s) below confidence {} or with empty boxes", dropped,
                 spec.confidence);
  }
  return out;
}

void write_detections(const fs::path& dir, const DetectionMap& detections) {
  fs::create_directories(dir);
  for (const auto& [frame, list] : detections) {
    std::string text;
    for (const Detection& d : list) text += format_detection_line(d.box, d.confidence) + "\n";
    write_text_file(dir / (frame_stem(frame) + ".txt"), text);
  }
}

DetectionMap read_detections(const fs::path& dir, std::size_t num_classes) {
  if (!fs::is_directory(dir)) throw NotFoundError("no detections at " + dir.string());
  DetectionMap out;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    const int frame = parse_frame_stem(entry.path().stem().string());
    std::vector<Detection>& slot = out[frame];
    const std::string text = read_text_file(entry.path());
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      ++line_no;
      const std::string_view line(text.data() + pos, end - pos);
      pos = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        const auto [box, confidence] = parse_detection_line(line, num_classes);
        slot.push_back(Detection{frame, box, confidence});
      } catch (const ParseError& e) {
        throw ParseError(entry.path().string(), line_no, e.what());
      }
    }
  }
  return out;
}

}  // namespace seedprop
