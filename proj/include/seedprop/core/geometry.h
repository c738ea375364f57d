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

#include <compare>

namespace seedprop {

// Tolerance for float noise at the image border (normalized units).
inline constexpr double kClampEpsilon = 1e-6;

struct ImageGeometry {
  int width_px = 1280;
  int height_px = 720;

  void validate() const;
  bool operator==(const ImageGeometry&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

// Canonical label representation: YOLO center/size, normalized to [0,1].
struct NormBox {
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  auto operator<=>(const NormBox&) const = default;
};

// Pixel corner form. Real-valued; rounding only happens at file emission.
struct PixelBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const;
  bool degenerate() const { return !(width() > 0.0 && height() > 0.0); }

  bool operator==(const PixelBox&) const = default;
};

// Throws ValidationError unless the box satisfies the NormBox invariants.
void validate(const NormBox& box);

// Clips the box extent to the unit square. The result may be degenerate
// (w or h == 0) when the box lies entirely outside the image. Boxes already
// inside are returned unchanged.
NormBox clamp_to_image(const NormBox& box);

PixelBox norm_to_pixel(const NormBox& box, const ImageGeometry& geometry);

// Clamps to the image first; throws ValidationError for zero-area boxes.
NormBox pixel_to_norm(const PixelBox& box, const ImageGeometry& geometry,
                      int class_id);

// Intersection over union; 0 when the union is empty.
double iou(const PixelBox& a, const PixelBox& b);
double iou(const NormBox& a, const NormBox& b);

PixelBox clip_to_image(const PixelBox& box, const ImageGeometry& geometry);

}  // namespace seedprop
