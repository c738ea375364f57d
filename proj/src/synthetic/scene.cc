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

#include "seedprop/synthetic/scene.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "seedprop/core/error.h"
#include "seedprop/store/label_io.h"
#include "seedprop/store/serialization.h"

namespace seedprop::synthetic {
namespace fs = std::filesystem;

bool SyntheticScene::covers(const SceneTarget& target, int frame, double px,
                            double py) const {
  const Point2 c = target.center_at(frame);
  const double cx = c.x * geometry.width_px;
  const double cy = c.y * geometry.height_px;
  const double hw = target.width_px / 2;
  const double hh = target.height_px / 2;
  if (target.shape == ShapeKind::kRectangle) {
    return px >= cx - hw && px < cx + hw && py >= cy - hh && py < cy + hh;
  }
  const double dx = (px - cx) / hw;
  const double dy = (py - cy) / hh;
  return dx * dx + dy * dy <= 1.0;
}

PixelBox SyntheticScene::extent(const SceneTarget& target, int frame) const {
  const Point2 c = target.center_at(frame);
  const double cx = c.x * geometry.width_px;
  const double cy = c.y * geometry.height_px;
  return PixelBox{cx - target.width_px / 2, cy - target.height_px / 2,
                  cx + target.width_px / 2, cy + target.height_px / 2};
}

namespace {

struct PixelRange {
  int x0, y0, x1, y1;  // half-open
};

PixelRange pixel_range(const PixelBox& box, const ImageGeometry& g) {
  auto lo = [](double v, int limit) {
    return std::clamp(static_cast<int>(std::floor(v - 0.5)), 0, limit);
  };
  auto hi = [](double v, int limit) {
    return std::clamp(static_cast<int>(std::ceil(v + 0.5)), 0, limit);
  };
  return PixelRange{lo(box.x_min, g.width_px), lo(box.y_min, g.height_px),
                    hi(box.x_max, g.width_px), hi(box.y_max, g.height_px)};
}

bool center_in(const PixelBox& region, double px, double py) {
  return px >= region.x_min && px < region.x_max && py >= region.y_min &&
         py < region.y_max;
}

}  // namespace

namespace {

// Calls fn(x, y) for every covered pixel whose center lies in `region`.
template <typename Fn>
void for_each_covered(const SyntheticScene& scene, const SceneTarget& target, int frame,
                      const std::optional<PixelBox>& region, Fn fn) {
  PixelBox bounds = scene.extent(target, frame);
  if (region) {
    bounds = PixelBox{std::max(bounds.x_min, region->x_min),
                      std::max(bounds.y_min, region->y_min),
                      std::min(bounds.x_max, region->x_max),
                      std::min(bounds.y_max, region->y_max)};
    if (bounds.degenerate()) return;
  }
  const PixelRange range = pixel_range(bounds, scene.geometry);
  for (int y = range.y0; y < range.y1; ++y) {
    for (int x = range.x0; x < range.x1; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      if (scene.covers(target, frame, px, py) && (!region || center_in(*region, px, py))) {
        fn(x, y);
      }
    }
  }
}

}  // namespace

MaskGrid SyntheticScene::rasterize(const SceneTarget& target, int frame,
                                   const std::optional<PixelBox>& region) const {
  MaskGrid mask(geometry);
  for_each_covered(*this, target, frame, region, [&](int x, int y) { mask.set(x, y); });
  return mask;
}

std::size_t SyntheticScene::coverage(const SceneTarget& target, int frame,
                                     const std::optional<PixelBox>& region) const {
  std::size_t count = 0;
  for_each_covered(*this, target, frame, region, [&](int, int) { ++count; });
  return count;
}

std::optional<PixelBox> SyntheticScene::raster_box(const SceneTarget& target,
                                                   int frame) const {
  const PixelRange range = pixel_range(extent(target, frame), geometry);
  int x_min = geometry.width_px, y_min = geometry.height_px, x_max = -1, y_max = -1;
  for (int y = range.y0; y < range.y1; ++y) {
    for (int x = range.x0; x < range.x1; ++x) {
      if (!covers(target, frame, x + 0.5, y + 0.5)) continue;
      x_min = std::min(x_min, x);
      y_min = std::min(y_min, y);
      x_max = std::max(x_max, x);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max < 0) return std::nullopt;
  return PixelBox{double(x_min), double(y_min), double(x_max + 1), double(y_max + 1)};
}

bool SyntheticScene::in_view(const SceneTarget& target, int frame) const {
  const Point2 c = target.center_at(frame);
  if (c.x < 0.0 || c.x > 1.0 || c.y < 0.0 || c.y > 1.0) return false;
  return raster_box(target, frame).has_value();
}

FrameLabelMap SyntheticScene::ground_truth() const {
  FrameLabelMap labels;
  for (int frame = 0; frame < frame_count; ++frame) {
    FrameLabels& out = labels[frame];
    out.frame_index = frame;
    out.provenance = Provenance::kManual;
    for (const SceneTarget& target : targets) {
      if (!in_view(target, frame)) continue;
      out.boxes.push_back(pixel_to_norm(*raster_box(target, frame), geometry,
                                        target.class_id));
    }
  }
  return labels;
}

AnnotationSequencePair SyntheticScene::make_pair(int frame, int count,
                                                 SelectionMode mode) const {
  AnnotationSequencePair pair;
  pair.frame_count = count;
  pair.seed.frame_index = frame;
  pair.seed.mode = mode;
  double sum_w = 0.0, sum_h = 0.0;
  for (const SceneTarget& target : targets) {
    if (!in_view(target, frame)) continue;
    const NormBox box = pixel_to_norm(*raster_box(target, frame), geometry, target.class_id);
    SeedEntry entry{target.class_id, Point2{box.cx, box.cy}, std::nullopt};
    if (mode == SelectionMode::kVariableBox) entry.extent = NormSize{box.w, box.h};
    sum_w += box.w;
    sum_h += box.h;
    pair.seed.entries.push_back(entry);
  }
  if (mode == SelectionMode::kFixedBox && !pair.seed.entries.empty()) {
    const double n = static_cast<double>(pair.seed.entries.size());
    pair.seed.fixed_dims = NormSize{sum_w / n, sum_h / n};
  }
  pair.validate();
  return pair;
}

void SyntheticScene::write_frames(const fs::path& dir) const {
  fs::create_directories(dir);
  const std::size_t pixels =
      static_cast<std::size_t>(geometry.width_px) * geometry.height_px;
  std::vector<char> image(pixels);
  for (int frame = 0; frame < frame_count; ++frame) {
    std::fill(image.begin(), image.end(), char(32));
    for (const SceneTarget& target : targets) {
      const PixelRange range = pixel_range(extent(target, frame), geometry);
      for (int y = range.y0; y < range.y1; ++y) {
        for (int x = range.x0; x < range.x1; ++x) {
          if (covers(target, frame, x + 0.5, y + 0.5)) {
            image[static_cast<std::size_t>(y) * geometry.width_px + x] = char(224);
          }
        }
      }
    }
    std::ofstream out(dir / (frame_stem(frame) + ".pgm"), std::ios::binary);
    out << "P5\n" << geometry.width_px << ' ' << geometry.height_px << "\n255\n";
    out.write(image.data(), static_cast<std::streamsize>(image.size()));
    if (!out) throw Error("cannot write frame " + std::to_string(frame));
  }
}

SyntheticScene make_moving_rectangles(const MovingRectanglesParams& params) {
  params.geometry.validate();
  std::mt19937_64 rng(params.seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const double width = params.geometry.width_px;
  const double height = params.geometry.height_px;
  const int last = params.frame_count - 1;

  SyntheticScene scene;
  scene.geometry = params.geometry;
  scene.frame_count = params.frame_count;

  // Swept areas (pixels) already claimed by earlier targets.
  std::vector<PixelBox> claimed;
  auto swept = [&](const SceneTarget& t, int until_frame) {
    const PixelBox a = scene.extent(t, 0);
    const PixelBox b = scene.extent(t, until_frame);
    return PixelBox{std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min),
                    std::max(a.x_max, b.x_max), std::max(a.y_max, b.y_max)};
  };
  auto free_of_claims = [&](const PixelBox& box) {
    constexpr double kGap = 12.0;
    return std::none_of(claimed.begin(), claimed.end(), [&](const PixelBox& c) {
      return box.x_min < c.x_max + kGap && c.x_min < box.x_max + kGap &&
             box.y_min < c.y_max + kGap && c.y_min < box.y_max + kGap;
    });
  };

  int next_id = 0;
  for (int i = 0; i < params.exiting_targets; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw ValidationError("cannot place exiting target");
      SceneTarget t;
      t.target_id = next_id;
      t.width_px = uniform(params.size_min_px, params.size_max_px);
      t.height_px = uniform(params.size_min_px, params.size_max_px);
      const int exit_frame = std::max(
          2, params.exit_by_frame - static_cast<int>(uniform(2.0, 8.0)));
      const double x0 = width - exit_frame * params.exit_speed_px;
      const double y0 = uniform(t.height_px + 20, height - t.height_px - 20);
      t.start = Point2{x0 / width, y0 / height};
      t.velocity = Point2{params.exit_speed_px / width, 0.0};
      PixelBox path = swept(t, std::max(exit_frame + 4, 0));
      path.x_max = width + params.size_max_px;
      if (x0 - t.width_px / 2 < 20 || !free_of_claims(path)) continue;
      claimed.push_back(path);
      scene.targets.push_back(t);
      ++next_id;
      break;
    }
  }
  for (int i = 0; i < params.stationary_targets; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) throw ValidationError("cannot place stationary target");
      SceneTarget t;
      t.target_id = next_id;
      t.width_px = uniform(params.size_min_px, params.size_max_px);
      t.height_px = uniform(params.size_min_px, params.size_max_px);
      const double margin = params.size_max_px + params.slow_speed_px * last + 16;
      t.start = Point2{uniform(margin, width - margin) / width,
                       uniform(margin, height - margin) / height};
      const double angle = uniform(0.0, 6.283185307179586);
      const double speed = uniform(0.0, params.slow_speed_px);
      t.velocity = Point2{speed * std::cos(angle) / width, speed * std::sin(angle) / height};
      const PixelBox path = swept(t, last);
      if (!free_of_claims(path)) continue;
      claimed.push_back(path);
      scene.targets.push_back(t);
      ++next_id;
      break;
    }
  }
  return scene;
}

std::string to_json_text(const SyntheticScene& scene) {
  Json j = Json::object();
  j["version"] = 1;
  j["geometry"] = scene.geometry;
  j["frame_count"] = scene.frame_count;
  Json targets = Json::array();
  for (const SceneTarget& t : scene.targets) {
    targets.push_back(Json{{"target_id", t.target_id},
                           {"class_id", t.class_id},
                           {"shape", t.shape == ShapeKind::kEllipse ? "ellipse" : "rectangle"},
                           {"start", t.start},
                           {"velocity", t.velocity},
                           {"width_px", t.width_px},
                           {"height_px", t.height_px}});
  }
  j["targets"] = std::move(targets);
  return j.dump(2) + "\n";
}

SyntheticScene scene_from_json_text(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("version").get<int>() != 1) throw ValidationError("unsupported scene version");
    SyntheticScene scene;
    j.at("geometry").get_to(scene.geometry);
    j.at("frame_count").get_to(scene.frame_count);
    for (const Json& t : j.at("targets")) {
      SceneTarget target;
      t.at("target_id").get_to(target.target_id);
      target.class_id = t.value("class_id", 0);
      target.shape = t.value("shape", std::string("rectangle")) == "ellipse"
                         ? ShapeKind::kEllipse
                         : ShapeKind::kRectangle;
      t.at("start").get_to(target.start);
      t.at("velocity").get_to(target.velocity);
      t.at("width_px").get_to(target.width_px);
      t.at("height_px").get_to(target.height_px);
      scene.targets.push_back(target);
    }
    scene.geometry.validate();
    return scene;
  } catch (const Json::exception& e) {
    throw ParseError("scene", 0, e.what());
  }
}

SyntheticScene load_scene(const fs::path& path) {
  return scene_from_json_text(read_text_file(path));
}

}  // namespace seedprop::synthetic
