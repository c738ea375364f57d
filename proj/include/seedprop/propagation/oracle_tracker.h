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

#include <atomic>
#include <cstdint>

#include "seedprop/propagation/tracker_backend.h"
#include "seedprop/synthetic/scene.h"

namespace seedprop {

struct OracleTrackerOptions {
  // Query points bind to the nearest target within this normalized radius.
  double binding_radius = 0.05;
  // Uniform noise in [-a, a] added to reported positions (normalized).
  double noise_amplitude = 0.0;
  // Exited targets keep reporting a border-clamped position, the way a
  // particle tracker re-initializes a lost point. Otherwise they report
  // their true off-image position with visible = false.
  bool border_sticking = true;
  std::uint64_t noise_seed = 0;
  int max_points = 0;
  int max_chunk = 0;
};

// Deterministic tracker that reads positions straight from a synthetic scene.
class OracleTracker final : public TrackerBackend {
 public:
  OracleTracker(synthetic::SyntheticScene scene, OracleTrackerOptions options = {});

  BackendInfo info() override;
  TrackResponse track(const TrackRequest& request) override;

  // Position the oracle reports for a target at a frame (noise included).
  Point2 reported_position(const synthetic::SceneTarget& target, int frame) const;
  int call_count() const { return calls_.load(); }

 private:
  synthetic::SyntheticScene scene_;
  OracleTrackerOptions options_;
  std::atomic<int> calls_{0};
};

}  // namespace seedprop
