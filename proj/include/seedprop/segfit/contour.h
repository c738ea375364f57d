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
#include <span>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"

namespace seedprop {

struct PixelCoord {
  int x = 0;
  int y = 0;

  auto operator<=>(const PixelCoord&) const = default;
};

struct ComponentInfo {
  MaskGrid mask;              // the largest 8-connected component only
  std::size_t pixel_count = 0;
  std::size_t component_count = 0;
};

// Largest 8-connected foreground component; ties go to the component whose
// first pixel comes first in raster order. Throws ValidationError on an
// empty mask.
ComponentInfo largest_component(const MaskGrid& mask);

// Outer boundary of the largest 8-connected component, traced clockwise
// (image coordinates, y down) from its top-left pixel with Moore-neighbor
// tracing. Every returned pixel is foreground with at least one background
// 4-neighbor (outside the image counts as background). Throws
// ValidationError on an empty mask.
std::vector<PixelCoord> extract_contour(const MaskGrid& mask);

// Smallest axis-aligned box holding every pixel; inclusive-exclusive, so a
// single pixel (4,4) gives (4,4,5,5). Throws ValidationError if empty.
PixelBox min_bounding_box(const MaskGrid& mask);
PixelBox min_bounding_box(std::span<const PixelCoord> pixels);

// Douglas-Peucker on a closed ring. The output is a subsequence of the input.
std::vector<PixelCoord> simplify_ring(std::span<const PixelCoord> ring,
                                      double tolerance_px);

}  // namespace seedprop
