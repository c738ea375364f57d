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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"
#include "seedprop/store/ground_truth.h"

namespace seedprop::synthetic {

enum class ShapeKind { kRectangle, kEllipse };

// A target moving on a straight line. Center and velocity are normalized
// (fraction of image per frame); size is in pixels.
struct SceneTarget {
  int target_id = 0;
  int class_id = 0;
  ShapeKind shape = ShapeKind::kRectangle;
  Point2 start;     // center at frame 0
  Point2 velocity;  // per frame
  double width_px = 20.0;
  double height_px = 20.0;

  Point2 center_at(int frame) const {
    return Point2{start.x + frame * velocity.x, start.y + frame * velocity.y};
  }
};

// Deterministic stand-in for a real video: the scene knows every target's
// true shape and position in every frame.
struct SyntheticScene {
  ImageGeometry geometry;
  int frame_count = 60;
  std::vector<SceneTarget> targets;

  // Pixel (x, y) belongs to the shape iff its center (x+.5, y+.5) lies in it.
  bool covers(const SceneTarget& target, int frame, double px, double py) const;
  // Continuous pixel-space extent of the shape (not clipped to the image).
  PixelBox extent(const SceneTarget& target, int frame) const;
  // Rasterizes the shape, restricted to `region` (pixel box) if given.
  MaskGrid rasterize(const SceneTarget& target, int frame,
                     const std::optional<PixelBox>& region = std::nullopt) const;
  // Number of pixels rasterize() would set.
  std::size_t coverage(const SceneTarget& target, int frame,
                       const std::optional<PixelBox>& region = std::nullopt) const;
  // Tight box of the rasterized, image-clipped shape; nullopt if no pixel
  // is covered.
  std::optional<PixelBox> raster_box(const SceneTarget& target, int frame) const;
  // True while the target's center is inside the image and at least one
  // of its pixels is visible.
  bool in_view(const SceneTarget& target, int frame) const;

  // Every in-view target as a normalized raster box, for each frame.
  FrameLabelMap ground_truth() const;

  // A seed for `frame` covering every in-view target. Fixed mode uses the
  // mean box size of those targets as fixed_dims.
  AnnotationSequencePair make_pair(int frame, int frame_count, SelectionMode mode) const;

  // Renders frames as binary PGM images named NNNNNN.pgm.
  void write_frames(const std::filesystem::path& dir) const;
};

struct MovingRectanglesParams {
  ImageGeometry geometry{1280, 720};
  int frame_count = 60;
  int stationary_targets = 12;  // slow drifters that never leave the image
  int exiting_targets = 3;      // fast movers that leave through the right edge
  double size_min_px = 30.0;
  double size_max_px = 70.0;
  double slow_speed_px = 0.15;  // max drift per frame of the slow targets
  double exit_speed_px = 24.0;
  int exit_by_frame = 20;       // exiting targets leave before this frame
  std::uint64_t seed = 7;
};

// Non-overlapping rectangles placed by a seeded RNG.
SyntheticScene make_moving_rectangles(const MovingRectanglesParams& params);

std::string to_json_text(const SyntheticScene& scene);
SyntheticScene scene_from_json_text(const std::string& text);
SyntheticScene load_scene(const std::filesystem::path& path);

}  // namespace seedprop::synthetic
