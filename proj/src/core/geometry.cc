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

#include "seedprop/core/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "seedprop/core/error.h"

namespace seedprop {

void ImageGeometry::validate() const {
  if (width_px < 1 || height_px < 1) {
    throw ValidationError("image geometry must be at least 1x1, got " +
                          std::to_string(width_px) + "x" +
                          std::to_string(height_px));
  }
}

double PixelBox::area() const {
  return std::max(0.0, width()) * std::max(0.0, height());
}

void validate(const NormBox& box) {
  auto fail = [&](const char* what) {
    throw ValidationError(std::string("invalid box: ") + what);
  };
  if (box.class_id < 0) fail("negative class id");
  if (!std::isfinite(box.cx) || !std::isfinite(box.cy) ||
      !std::isfinite(box.w) || !std::isfinite(box.h)) {
    fail("non-finite coordinate");
  }
  if (box.cx < 0.0 || box.cx > 1.0 || box.cy < 0.0 || box.cy > 1.0) {
    fail("center outside [0,1]");
  }
  if (!(box.w > 0.0) || box.w > 1.0 || !(box.h > 0.0) || box.h > 1.0) {
    fail("size outside (0,1]");
  }
  if (box.cx - box.w / 2 < -kClampEpsilon ||
      box.cx + box.w / 2 > 1.0 + kClampEpsilon ||
      box.cy - box.h / 2 < -kClampEpsilon ||
      box.cy + box.h / 2 > 1.0 + kClampEpsilon) {
    fail("extent outside the image");
  }
}

NormBox clamp_to_image(const NormBox& box) {
  // Boxes already inside come back bit-identical.
  if (box.cx - box.w / 2 >= 0.0 && box.cx + box.w / 2 <= 1.0 &&
      box.cy - box.h / 2 >= 0.0 && box.cy + box.h / 2 <= 1.0) {
    return box;
  }
  const double x0 = std::clamp(box.cx - box.w / 2, 0.0, 1.0);
  const double x1 = std::clamp(box.cx + box.w / 2, 0.0, 1.0);
  const double y0 = std::clamp(box.cy - box.h / 2, 0.0, 1.0);
  const double y1 = std::clamp(box.cy + box.h / 2, 0.0, 1.0);
  NormBox out = box;
  out.cx = (x0 + x1) / 2;
  out.cy = (y0 + y1) / 2;
  out.w = x1 - x0;
  out.h = y1 - y0;
  return out;
}

PixelBox norm_to_pixel(const NormBox& box, const ImageGeometry& geometry) {
  const double width = geometry.width_px;
  const double height = geometry.height_px;
  return PixelBox{
      std::clamp((box.cx - box.w / 2) * width, 0.0, width),
      std::clamp((box.cy - box.h / 2) * height, 0.0, height),
      std::clamp((box.cx + box.w / 2) * width, 0.0, width),
      std::clamp((box.cy + box.h / 2) * height, 0.0, height),
  };
}

PixelBox clip_to_image(const PixelBox& box, const ImageGeometry& geometry) {
  const double width = geometry.width_px;
  const double height = geometry.height_px;
  return PixelBox{std::clamp(box.x_min, 0.0, width),
                  std::clamp(box.y_min, 0.0, height),
                  std::clamp(box.x_max, 0.0, width),
                  std::clamp(box.y_max, 0.0, height)};
}

NormBox pixel_to_norm(const PixelBox& box, const ImageGeometry& geometry,
                      int class_id) {
  const PixelBox clipped = clip_to_image(box, geometry);
  if (clipped.degenerate()) {
    throw ValidationError("degenerate pixel box cannot be used as a label");
  }
  const double width = geometry.width_px;
  const double height = geometry.height_px;
  NormBox out;
  out.class_id = class_id;
  out.cx = (clipped.x_min + clipped.x_max) / 2 / width;
  out.cy = (clipped.y_min + clipped.y_max) / 2 / height;
  out.w = clipped.width() / width;
  out.h = clipped.height() / height;
  return out;
}

double iou(const PixelBox& a, const PixelBox& b) {
  const double iw =
      std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih =
      std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const NormBox& a, const NormBox& b) {
  auto corners = [](const NormBox& n) {
    return PixelBox{n.cx - n.w / 2, n.cy - n.h / 2, n.cx + n.w / 2,
                    n.cy + n.h / 2};
  };
  return iou(corners(a), corners(b));
}

}  // namespace seedprop
