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
#include <vector>

#include "seedprop/core/geometry.h"

namespace seedprop {

// What a backend advertises on handshake. Zero limits mean "unbounded".
struct BackendInfo {
  std::string name;
  std::string version;
  int max_points = 0;
  int max_chunk = 0;
  int max_prompts = 0;
};

struct TrackQueryPoint {
  int track_id = 0;
  double x = 0.0;  // normalized
  double y = 0.0;
};

struct TrackedPoint {
  int track_id = 0;
  double x = 0.0;  // normalized
  double y = 0.0;
  bool visible = true;
};

// One chunk: query points live on frames[0]; the response carries one
// point list per requested frame, in request order.
struct TrackRequest {
  std::string job_id;
  std::vector<int> frame_indices;
  std::vector<std::string> frame_paths;
  std::vector<TrackQueryPoint> points;
  ImageGeometry geometry;
};

struct TrackResponse {
  std::string job_id;
  std::vector<std::vector<TrackedPoint>> frames;
};

// A long-range point tracker. Implementations must be safe to call from
// several threads.
class TrackerBackend {
 public:
  virtual ~TrackerBackend() = default;
  virtual BackendInfo info() = 0;
  virtual TrackResponse track(const TrackRequest& request) = 0;
};

}  // namespace seedprop
