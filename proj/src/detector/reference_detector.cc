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

#include "seedprop/detector/reference_detector.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "seedprop/core/error.h"

namespace seedprop {
namespace {

using Memory = std::map<int, std::vector<NormBox>>;

NormBox polygon_box(const PolygonLabel& polygon) {
  double x0 = 1.0, y0 = 1.0, x1 = 0.0, y1 = 0.0;
  for (const Point2& p : polygon.vertices) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  return NormBox{polygon.class_id, (x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
}

Memory memorize(const Dataset& dataset) {
  Memory memory;
  for (const FrameLabels& frame : dataset.frames) {
    std::vector<NormBox>& boxes = memory[frame.frame_index];
    boxes = frame.boxes;
    for (const PolygonLabel& p : frame.polygons) {
      const NormBox b = polygon_box(p);
      if (b.w > 0.0 && b.h > 0.0) boxes.push_back(b);
    }
  }
  return memory;
}

}  // namespace

ReferenceDetector::ReferenceDetector(ImageGeometry geometry, double decay)
    : geometry_(geometry), decay_(decay) {
  geometry_.validate();
  if (!(decay > 0.0 && decay <= 1.0)) throw ValidationError("decay must lie in (0, 1]");
}

BackendInfo ReferenceDetector::info() { return BackendInfo{"reference-detector", "1", 0, 0, 0}; }

std::shared_ptr<const Memory> ReferenceDetector::memory_for(const std::string& token) {
  const std::string_view prefix(kTokenPrefix);
  if (token.rfind(prefix, 0) != 0) {
    throw BackendError("reference detector: unknown model token '" + token + "'");
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(token);
  if (it != cache_.end()) return it->second;
  Dataset dataset;
  try {
    dataset = read_dataset(token.substr(prefix.size()));
  } catch (const Error& e) {
    throw BackendError("reference detector: model token '" + token + "' is unusable: " +
                       e.what());
  }
  auto memory = std::make_shared<const Memory>(memorize(dataset));
  cache_.emplace(token, memory);
  return memory;
}

TrainResponse ReferenceDetector::train(const TrainRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  const std::string token =
      kTokenPrefix + std::filesystem::absolute(request.dataset_path).lexically_normal().string();
  memory_for(token);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return TrainResponse{request.job_id, token, elapsed.count()};
}

InferResponse ReferenceDetector::infer(const InferRequest& request) {
  const std::shared_ptr<const Memory> memory = memory_for(request.model_token);
  InferResponse response;
  response.job_id = request.job_id;
  for (int frame : request.frame_indices) {
    std::vector<PixelDetection>& out = response.frames.emplace_back();
    if (memory->empty()) continue;
    // Nearest trained frame; the earlier one wins a tie.
    auto after = memory->lower_bound(frame);
    auto nearest = after;
    if (after == memory->end()) {
      nearest = std::prev(after);
    } else if (after->first != frame && after != memory->begin()) {
      auto before = std::prev(after);
      if (frame - before->first <= after->first - frame) nearest = before;
    }
    const int distance = std::abs(nearest->first - frame);
    const double confidence = std::pow(decay_, distance);
    if (confidence < request.confidence) continue;
    for (const NormBox& b : nearest->second) {
      out.push_back(PixelDetection{b.class_id, norm_to_pixel(b, geometry_), confidence});
    }
  }
  return response;
}

}  // namespace seedprop
