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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "seedprop/core/error.h"
#include "seedprop/segfit/contour.h"
#include "seedprop/segfit/oracle_segmenter.h"
#include "seedprop/segfit/segment_fit.h"
#include "seedprop/synthetic/scene.h"
#include "test_util.h"

namespace seedprop {
namespace {

std::string any_path(int frame) { return "frame" + std::to_string(frame); }

MaskGrid filled(int width, int height, int x0, int y0, int x1, int y1) {
  MaskGrid mask(ImageGeometry{width, height});
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) mask.set(x, y);
  }
  return mask;
}

// Foreground pixels with a background (or out-of-image) 4-neighbor.
std::set<PixelCoord> boundary_pixels(const MaskGrid& mask) {
  std::set<PixelCoord> out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      if (!mask.test_or_background(x - 1, y) || !mask.test_or_background(x + 1, y) ||
          !mask.test_or_background(x, y - 1) || !mask.test_or_background(x, y + 1)) {
        out.insert({x, y});
      }
    }
  }
  return out;
}

TEST(Contour, SquareRingIsAllButTheCenter) {
  const MaskGrid mask = filled(10, 10, 0, 0, 2, 2);
  const std::vector<PixelCoord> ring = extract_contour(mask);
  EXPECT_EQ(ring.size(), 8u);
  const std::set<PixelCoord> as_set(ring.begin(), ring.end());
  EXPECT_EQ(as_set, boundary_pixels(mask));
  EXPECT_FALSE(as_set.contains(PixelCoord{1, 1}));
  EXPECT_EQ(ring.front(), (PixelCoord{0, 0}));
}

TEST(Contour, SinglePixel) {
  MaskGrid mask(ImageGeometry{5, 5});
  mask.set(2, 3);
  EXPECT_EQ(extract_contour(mask), (std::vector<PixelCoord>{{2, 3}}));
}

TEST(Contour, KeepsOnlyTheLargestComponent) {
  MaskGrid mask = filled(30, 30, 2, 2, 11, 6);  // 50 pixels
  mask.set(20, 20);
  mask.set(21, 20);
  mask.set(22, 20);
  const ComponentInfo info = largest_component(mask);
  EXPECT_EQ(info.pixel_count, 50u);
  EXPECT_EQ(info.component_count, 2u);
  for (const PixelCoord& p : extract_contour(mask)) {
    EXPECT_TRUE(p.x <= 11 && p.y <= 6);
  }
  EXPECT_EQ(min_bounding_box(extract_contour(mask)), (PixelBox{2, 2, 12, 7}));
}

TEST(Contour, EmptyMaskIsAnError) {
  EXPECT_THROW(extract_contour(MaskGrid(ImageGeometry{4, 4})), ValidationError);
  EXPECT_THROW(min_bounding_box(MaskGrid(ImageGeometry{4, 4})), ValidationError);
  EXPECT_THROW(min_bounding_box(std::vector<PixelCoord>{}), ValidationError);
}

double signed_area(const std::vector<PixelCoord>& ring) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const PixelCoord& a = ring[i];
    const PixelCoord& b = ring[(i + 1) % ring.size()];
    sum += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
  }
  return sum / 2;
}

TEST(Contour, ClockwiseOnScreen) {
  const std::vector<PixelCoord> ring = extract_contour(filled(20, 20, 3, 4, 12, 9));
  // With y pointing down a clockwise ring has positive shoelace area.
  EXPECT_GT(signed_area(ring), 0.0);
  EXPECT_EQ(ring[1], (PixelCoord{4, 4}));
}

// Random masks: ring pixels satisfy the boundary predicate, consecutive
// ring pixels are 8-neighbors, and the ring spans the component.
TEST(Contour, RingPropertiesOnRandomMasks) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 500; ++trial) {
    const MaskGrid mask = testing::random_mask(rng, 24, 18);
    const ComponentInfo component = largest_component(mask);
    const std::vector<PixelCoord> ring = extract_contour(mask);
    const std::set<PixelCoord> boundary = boundary_pixels(component.mask);
    for (std::size_t i = 0; i < ring.size(); ++i) {
      EXPECT_TRUE(boundary.contains(ring[i])) << "trial " << trial;
      const PixelCoord& next = ring[(i + 1) % ring.size()];
      if (ring.size() > 1) {
        EXPECT_LE(std::abs(next.x - ring[i].x), 1);
        EXPECT_LE(std::abs(next.y - ring[i].y), 1);
      }
    }
    EXPECT_EQ(min_bounding_box(ring), min_bounding_box(component.mask)) << "trial " << trial;
  }
}

// Filled convex shapes have no holes, so the ring is the whole boundary.
TEST(Contour, ConvexShapesTraceEveryBoundaryPixel) {
  synthetic::SyntheticScene scene;
  scene.geometry = ImageGeometry{64, 48};
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> pos(0.2, 0.8);
  std::uniform_real_distribution<double> size(3.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    synthetic::SceneTarget t;
    t.shape = trial % 2 == 0 ? synthetic::ShapeKind::kEllipse : synthetic::ShapeKind::kRectangle;
    t.start = Point2{pos(rng), pos(rng)};
    t.width_px = size(rng);
    t.height_px = size(rng);
    const MaskGrid mask = scene.rasterize(t, 0);
    if (mask.foreground_count() == 0) continue;
    const std::vector<PixelCoord> ring = extract_contour(mask);
    EXPECT_EQ(std::set<PixelCoord>(ring.begin(), ring.end()), boundary_pixels(mask))
        << "trial " << trial;
  }
}

TEST(MinBoundingBox, Examples) {
  MaskGrid mask(ImageGeometry{10, 10});
  mask.set(3, 7);
  mask.set(5, 2);
  EXPECT_EQ(min_bounding_box(mask), (PixelBox{3, 2, 6, 8}));
  MaskGrid single(ImageGeometry{10, 10});
  single.set(4, 4);
  EXPECT_EQ(min_bounding_box(single), (PixelBox{4, 4, 5, 5}));
  EXPECT_EQ(min_bounding_box(filled(16, 9, 0, 0, 15, 8)), (PixelBox{0, 0, 16, 9}));
}

TEST(MinBoundingBox, MatchesPixelScanOnRandomMasks) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 1000; ++trial) {
    const MaskGrid mask = testing::random_mask(rng, 40, 30);
    std::vector<int> xs, ys;
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 40; ++x) {
        if (mask.test(x, y)) {
          xs.push_back(x);
          ys.push_back(y);
        }
      }
    }
    const auto [x_lo, x_hi] = std::minmax_element(xs.begin(), xs.end());
    const auto [y_lo, y_hi] = std::minmax_element(ys.begin(), ys.end());
    const PixelBox expected{double(*x_lo), double(*y_lo), double(*x_hi + 1), double(*y_hi + 1)};
    EXPECT_EQ(min_bounding_box(mask), expected);
  }
}

double point_segment_distance(const PixelCoord& p, const PixelCoord& a, const PixelCoord& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 == 0 ? 0 : ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * vx, p.y - a.y - t * vy);
}

TEST(Simplify, RectangleKeepsCornersOnly) {
  const std::vector<PixelCoord> ring = extract_contour(filled(30, 30, 5, 5, 20, 12));
  const std::vector<PixelCoord> simple = simplify_ring(ring, 1.5);
  EXPECT_EQ(std::set<PixelCoord>(simple.begin(), simple.end()),
            (std::set<PixelCoord>{{5, 5}, {20, 5}, {20, 12}, {5, 12}}));
}

// Output is a subsequence; every dropped pixel stays within tolerance of
// the simplified edge that replaced it.
TEST(Simplify, DeviationBoundedOnRandomRings) {
  std::mt19937_64 rng(61);
  synthetic::SyntheticScene scene;
  scene.geometry = ImageGeometry{120, 90};
  std::uniform_real_distribution<double> pos(0.3, 0.7);
  std::uniform_real_distribution<double> size(8.0, 60.0);
  for (int trial = 0; trial < 100; ++trial) {
    synthetic::SceneTarget t;
    t.shape = synthetic::ShapeKind::kEllipse;
    t.start = Point2{pos(rng), pos(rng)};
    t.width_px = size(rng);
    t.height_px = size(rng);
    const std::vector<PixelCoord> ring = extract_contour(scene.rasterize(t, 0));
    const std::vector<PixelCoord> simple = simplify_ring(ring, 1.5);
    std::vector<std::size_t> kept;
    std::size_t j = 0;
    for (std::size_t i = 0; i < ring.size() && j < simple.size(); ++i) {
      if (ring[i] == simple[j]) {
        kept.push_back(i);
        ++j;
      }
    }
    ASSERT_EQ(kept.size(), simple.size()) << "not a subsequence";
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const std::size_t from = kept[k];
      const std::size_t to = k + 1 < kept.size() ? kept[k + 1] : kept[0] + ring.size();
      for (std::size_t i = from + 1; i < to; ++i) {
        EXPECT_LE(point_segment_distance(ring[i % ring.size()], ring[from],
                                         ring[to % ring.size()]),
                  1.5 + 1e-9);
      }
    }
  }
}

TEST(FitMask, SquareGivesExactBoxAndBoundaryPolygon) {
  const ImageGeometry g{100, 80};
  const MaskGrid mask = [&] {
    MaskGrid m(g);
    for (int y = 40; y <= 49; ++y) {
      for (int x = 20; x <= 29; ++x) m.set(x, y);
    }
    return m;
  }();
  std::size_t fragments = 99;
  const FittedInstance fit = fit_mask(mask, 3, 1.5, &fragments);
  EXPECT_EQ(fragments, 0u);
  EXPECT_EQ(norm_to_pixel(fit.box, g), (PixelBox{20, 40, 30, 50}));
  EXPECT_EQ(fit.box.class_id, 3);
  EXPECT_EQ(fit.polygon.class_id, 3);
  ASSERT_EQ(fit.polygon.vertices.size(), 4u);
  const std::set<PixelCoord> boundary = boundary_pixels(mask);
  for (const Point2& v : fit.polygon.vertices) {
    const PixelCoord p{static_cast<int>(std::floor(v.x * 100)),
                       static_cast<int>(std::floor(v.y * 80))};
    EXPECT_TRUE(boundary.contains(p));
  }
}

// The fitted box contains the polygon, and every vertex sits on a
// boundary pixel of the mask.
TEST(FitMask, PolygonInsideBoxOnRandomMasks) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 300; ++trial) {
    const MaskGrid mask = testing::random_mask(rng, 50, 40);
    const FittedInstance fit = fit_mask(mask, 0, 1.5);
    EXPECT_NO_THROW(fit.polygon.validate());
    const PixelBox box = norm_to_pixel(fit.box, mask.geometry());
    const std::set<PixelCoord> boundary = boundary_pixels(largest_component(mask).mask);
    for (const Point2& v : fit.polygon.vertices) {
      const double px = v.x * 50;
      const double py = v.y * 40;
      EXPECT_GE(px, box.x_min - 1e-9);
      EXPECT_LE(px, box.x_max + 1e-9);
      EXPECT_GE(py, box.y_min - 1e-9);
      EXPECT_LE(py, box.y_max + 1e-9);
      if (fit.polygon.vertices.size() > 4 || boundary.size() > 2) {
        const PixelCoord p{static_cast<int>(std::floor(px)), static_cast<int>(std::floor(py))};
        EXPECT_TRUE(boundary.contains(p) || boundary.size() < 3) << "trial " << trial;
      }
    }
  }
}

TEST(FitMask, CountsFragments) {
  MaskGrid mask = filled(40, 40, 1, 1, 10, 10);
  mask.set(30, 30);
  mask.set(35, 5);
  std::size_t fragments = 0;
  fit_mask(mask, 0, 1.5, &fragments);
  EXPECT_EQ(fragments, 2u);
}

synthetic::SyntheticScene one_target_scene(double cx_px, double cy_px, double w, double h) {
  synthetic::SyntheticScene scene;
  scene.geometry = ImageGeometry{1280, 720};
  synthetic::SceneTarget t;
  t.start = Point2{cx_px / 1280.0, cy_px / 720.0};
  t.width_px = w;
  t.height_px = h;
  scene.targets = {t};
  return scene;
}

TEST(OracleSegmenterTest, ShrinksOntoTheTrueShape) {
  const auto scene = one_target_scene(400, 300, 20, 30);  // pixels 390..409 x 285..314
  OracleSegmenter segmenter(scene);
  const MaskGrid mask = segmenter.mask_for(0, PixelBox{370, 260, 430, 340});
  EXPECT_EQ(min_bounding_box(mask), (PixelBox{390, 285, 410, 315}));
}

TEST(OracleSegmenterTest, DilationLetsTheBoxGrow) {
  const auto scene = one_target_scene(400, 300, 20, 30);
  const PixelBox prompt{385, 280, 408, 320};  // clips 2 px off the right edge
  OracleSegmenter tight(scene);
  EXPECT_EQ(min_bounding_box(tight.mask_for(0, prompt)).x_max, 408);
  OracleSegmenter loose(scene, OracleSegmenterOptions{2.0, 0});
  EXPECT_EQ(min_bounding_box(loose.mask_for(0, prompt)).x_max, 410);
}

TEST(OracleSegmenterTest, EmptyRegionGivesEmptyMask) {
  OracleSegmenter segmenter(one_target_scene(400, 300, 20, 30));
  EXPECT_EQ(segmenter.mask_for(0, PixelBox{900, 500, 950, 550}).foreground_count(), 0u);
}

TrackSet single_frame_tracks(const std::vector<NormBox>& boxes, int frame = 0) {
  TrackSet t;
  TrackFrame f;
  f.frame_index = frame;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const NormBox& b = boxes[i];
    f.points.push_back(TrackPoint{static_cast<int>(i), b.class_id, b.cx, b.cy, b.w, b.h});
  }
  t.frames.push_back(f);
  return t;
}

// Answers every prompt with its own (pixel-rounded) box; counts calls.
class BoxSegmenter final : public SegmenterBackend {
 public:
  BackendInfo info() override { return {"box", "1", 0, 0, max_prompts}; }
  SegmentResponse segment(const SegmentRequest& request) override {
    ++calls;
    sizes.push_back(request.boxes.size());
    SegmentResponse r;
    r.job_id = request.job_id;
    for (const SegmentPrompt& p : request.boxes) {
      MaskGrid mask(request.geometry);
      for (int y = static_cast<int>(p.box.y_min); y < static_cast<int>(p.box.y_max); ++y) {
        for (int x = static_cast<int>(p.box.x_min); x < static_cast<int>(p.box.x_max); ++x) {
          mask.set(x, y);
        }
      }
      r.masks.push_back(MaskResult{p.track_id, encode_rle(mask), mask.height(), mask.width()});
    }
    return r;
  }
  int max_prompts = 0;
  int calls = 0;
  std::vector<std::size_t> sizes;
};

TEST(SegmentAndFit, BatchesPromptsPerCall) {
  std::vector<NormBox> boxes;
  for (int i = 0; i < 120; ++i) {
    boxes.push_back(NormBox{0, 0.05 + 0.0075 * i, 0.5, 0.005, 0.01});
  }
  BoxSegmenter backend;
  SegfitConfig config;
  config.batch_size = 50;
  SegfitStats stats;
  const auto labels = segment_and_fit(single_frame_tracks(boxes), &backend, config,
                                      ImageGeometry{1280, 720}, any_path, "segment", &stats);
  EXPECT_EQ(backend.calls, 3);
  EXPECT_EQ(backend.sizes, (std::vector<std::size_t>{50, 50, 20}));
  EXPECT_EQ(stats.backend_calls.load(), 3u);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].boxes.size(), 120u);
  EXPECT_EQ(labels[0].polygons.size(), 120u);

  BoxSegmenter limited;
  limited.max_prompts = 40;
  segment_and_fit(single_frame_tracks(boxes), &limited, config, ImageGeometry{1280, 720},
                  any_path);
  EXPECT_EQ(limited.calls, 3);
  EXPECT_EQ(limited.sizes, (std::vector<std::size_t>{40, 40, 40}));
}

TEST(SegmentAndFit, DisabledPassesBoxesThroughBitEqual) {
  const synthetic::SyntheticScene scene = synthetic::make_moving_rectangles({});
  const AnnotationSequencePair pair = scene.make_pair(0, 10, SelectionMode::kFixedBox);
  TrackSet tracks = single_frame_tracks(pair.seed.initial_boxes());
  tracks.frames.push_back(tracks.frames[0]);
  tracks.frames[1].frame_index = 1;
  tracks.frames[1].points[0].status = TrackStatus::kTerminatedEdge;
  SegfitConfig config;
  config.enabled = false;
  const auto labels = segment_and_fit(tracks, nullptr, config, scene.geometry, any_path);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0].boxes, pair.seed.initial_boxes());
  EXPECT_TRUE(labels[0].polygons.empty());
  EXPECT_EQ(labels[0].provenance, Provenance::kManual);
  EXPECT_EQ(labels[1].provenance, Provenance::kPropagated);
  EXPECT_EQ(labels[1].boxes.size(), pair.seed.initial_boxes().size() - 1);
}

TEST(SegmentAndFit, BatchSizeAndWorkersDoNotChangeResults) {
  const synthetic::SyntheticScene scene = synthetic::make_moving_rectangles({});
  const AnnotationSequencePair pair = scene.make_pair(0, 6, SelectionMode::kFixedBox);
  TrackSet tracks;
  for (int f = 0; f < 6; ++f) {
    TrackSet one = single_frame_tracks(pair.seed.initial_boxes(), f);
    tracks.frames.push_back(one.frames[0]);
  }
  OracleSegmenter segmenter(scene, OracleSegmenterOptions{8.0, 0});
  SegfitConfig base;
  const auto reference = segment_and_fit(tracks, &segmenter, base, scene.geometry, any_path);
  SegfitConfig one_by_one = base;
  one_by_one.batch_size = 1;
  EXPECT_EQ(segment_and_fit(tracks, &segmenter, one_by_one, scene.geometry, any_path),
            reference);
  SegfitConfig parallel = base;
  parallel.workers = 4;
  EXPECT_EQ(segment_and_fit(tracks, &segmenter, parallel, scene.geometry, any_path), reference);
}

TEST(SegmentAndFit, EmptyMaskFallsBackToPromptBox) {
  OracleSegmenter segmenter(one_target_scene(400, 300, 20, 30));
  const NormBox nowhere{0, 0.8, 0.8, 0.02, 0.02};
  const NormBox on_target{0, 400.0 / 1280, 300.0 / 720, 0.03, 0.06};
  SegfitStats stats;
  const auto labels = segment_and_fit(single_frame_tracks({nowhere, on_target}), &segmenter,
                                      SegfitConfig{}, ImageGeometry{1280, 720}, any_path,
                                      "segment", &stats);
  EXPECT_EQ(stats.fallbacks.load(), 1u);
  ASSERT_EQ(labels[0].boxes.size(), 2u);
  EXPECT_NEAR(labels[0].boxes[0].cx, nowhere.cx, 1e-12);
  EXPECT_NEAR(labels[0].boxes[0].w, nowhere.w, 1e-12);
  EXPECT_EQ(labels[0].polygons[0], box_polygon(labels[0].boxes[0]));
  EXPECT_EQ(norm_to_pixel(labels[0].boxes[1], ImageGeometry{1280, 720}),
            (PixelBox{390, 285, 410, 315}));
}

// Breaks one aspect of the response.
class BadSegmenter final : public SegmenterBackend {
 public:
  explicit BadSegmenter(int mode) : mode_(mode) {}
  BackendInfo info() override { return {}; }
  SegmentResponse segment(const SegmentRequest& request) override {
    SegmentResponse r = inner_.segment(request);
    switch (mode_) {
      case 0: r.job_id = "other"; break;
      case 1: r.masks.pop_back(); break;
      case 2: r.masks[0].rle.push_back(5); break;
      case 3: r.masks[0].rows = 10; break;
      default: r.masks[0].track_id = 99; break;
    }
    return r;
  }

 private:
  int mode_;
  BoxSegmenter inner_;
};

TEST(SegmentAndFit, RejectsMalformedResponses) {
  for (int mode = 0; mode < 5; ++mode) {
    BadSegmenter backend(mode);
    EXPECT_THROW(segment_and_fit(single_frame_tracks({NormBox{0, 0.5, 0.5, 0.1, 0.1}}),
                                 &backend, SegfitConfig{}, ImageGeometry{64, 48}, any_path),
                 BackendError)
        << "mode " << mode;
  }
}

TEST(SegfitConfigTest, Validation) {
  SegfitConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = SegfitConfig{};
  c.workers = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

}  // namespace
}  // namespace seedprop
