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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "seedprop/core/error.h"
#include "seedprop/propagation/oracle_tracker.h"
#include "seedprop/propagation/propagate.h"
#include "seedprop/synthetic/scene.h"

namespace seedprop {
namespace {

using synthetic::SceneTarget;
using synthetic::SyntheticScene;

std::string any_path(int frame) { return "frame" + std::to_string(frame); }

SyntheticScene scene_with(std::vector<SceneTarget> targets, int frames = 60) {
  SyntheticScene scene;
  scene.geometry = ImageGeometry{1280, 720};
  scene.frame_count = frames;
  scene.targets = std::move(targets);
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    scene.targets[i].target_id = static_cast<int>(i);
  }
  return scene;
}

AnnotationSequencePair variable_pair(const std::vector<Point2>& centers, int frame_count,
                                     int first = 0) {
  AnnotationSequencePair pair;
  pair.seed.frame_index = first;
  pair.frame_count = frame_count;
  for (const Point2& c : centers) pair.seed.entries.push_back(SeedEntry{0, c, NormSize{0.02, 0.03}});
  return pair;
}

// Grid of stationary targets well inside the image.
std::vector<Point2> grid_centers(int count) {
  std::vector<Point2> centers;
  for (int i = 0; i < count; ++i) {
    centers.push_back(Point2{0.1 + 0.1 * (i % 8), 0.15 + 0.15 * (i / 8)});
  }
  return centers;
}

SyntheticScene scene_at(const std::vector<Point2>& centers, Point2 velocity = {}) {
  std::vector<SceneTarget> targets;
  for (const Point2& c : centers) {
    SceneTarget t;
    t.start = c;
    t.velocity = velocity;
    targets.push_back(t);
  }
  return scene_with(targets);
}

TEST(Filter, Examples) {
  const FilterConfig on{0.01, true};
  const TrackPoint center{0, 0, 0.5, 0.5, 0.1, 0.1};
  TrackPoint edge = center;
  edge.cx = 0.005;
  TrackPoint corner = center;
  corner.cx = 0.0;
  corner.cy = 0.0;

  FilterResult r = positional_filter(std::vector<TrackPoint>{center, edge}, on);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0], center);
  ASSERT_EQ(r.terminated.size(), 1u);
  EXPECT_EQ(r.terminated[0].status, TrackStatus::kTerminatedEdge);

  r = positional_filter(std::vector<TrackPoint>{corner}, FilterConfig{0.01, false});
  EXPECT_EQ(r.kept.size(), 1u);
  EXPECT_TRUE(r.terminated.empty());
}

// Terminated iff the center is within the margin band of any border,
// checked on a 1/1000 grid against an integer predicate.
TEST(Filter, MatchesBoundaryPredicate) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> coord(0, 1000);
  std::uniform_int_distribution<int> margin(0, 499);
  for (int trial = 0; trial < 5000; ++trial) {
    const int m = margin(rng);
    const int x = coord(rng);
    const int y = coord(rng);
    const bool expect_terminated = x <= m || x >= 1000 - m || y <= m || y >= 1000 - m;
    const TrackPoint p{0, 0, x / 1000.0, y / 1000.0, 0.01, 0.01};
    const FilterResult r = positional_filter(std::vector<TrackPoint>{p}, FilterConfig{m / 1000.0, true});
    EXPECT_EQ(r.terminated.size(), expect_terminated ? 1u : 0u)
        << "x=" << x << " y=" << y << " m=" << m;
    EXPECT_EQ(r.kept.size() + r.terminated.size(), 1u);
  }
}

TEST(Filter, RejectsBadMargin) {
  EXPECT_THROW(FilterConfig({0.5, true}).validate(), ValidationError);
  EXPECT_THROW(FilterConfig({-0.1, true}).validate(), ValidationError);
  EXPECT_NO_THROW(FilterConfig({0.0, true}).validate());
}

TEST(OracleTrackerTest, FollowsTrajectory) {
  SceneTarget t;
  t.start = Point2{0.1, 0.5};
  t.velocity = Point2{0.05, 0.0};
  OracleTracker tracker(scene_with({t}));
  TrackRequest request;
  request.job_id = "j";
  request.frame_indices = {0, 1, 2, 3, 4};
  request.frame_paths = {"a", "b", "c", "d", "e"};
  request.points = {TrackQueryPoint{7, 0.1, 0.5}};
  const TrackResponse response = tracker.track(request);
  ASSERT_EQ(response.frames.size(), 5u);
  EXPECT_NEAR(response.frames[4][0].x, 0.3, 1e-12);
  EXPECT_NEAR(response.frames[4][0].y, 0.5, 1e-12);
  EXPECT_EQ(response.frames[4][0].track_id, 7);
}

TEST(OracleTrackerTest, StickingClampsExitedTargets) {
  SceneTarget t;
  t.start = Point2{0.75, 0.5};
  t.velocity = Point2{0.05, 0.0};  // center leaves at frame 5, past it from frame 6
  OracleTracker sticky(scene_with({t}), OracleTrackerOptions{});
  OracleTrackerOptions loose_options;
  loose_options.border_sticking = false;
  OracleTracker loose(scene_with({t}), loose_options);
  TrackRequest request;
  request.job_id = "j";
  for (int f = 0; f < 10; ++f) {
    request.frame_indices.push_back(f);
    request.frame_paths.push_back(any_path(f));
  }
  request.points = {TrackQueryPoint{0, 0.75, 0.5}};
  const TrackResponse a = sticky.track(request);
  const TrackResponse b = loose.track(request);
  for (int f = 6; f < 10; ++f) {
    EXPECT_EQ(a.frames[f][0].x, 1.0);
    EXPECT_TRUE(a.frames[f][0].visible);
    EXPECT_GT(b.frames[f][0].x, 1.0);
    EXPECT_FALSE(b.frames[f][0].visible);
  }
}

TEST(OracleTrackerTest, DeterministicWithAndWithoutNoise) {
  const SyntheticScene scene = scene_at(grid_centers(5), Point2{0.001, 0.0});
  for (double noise : {0.0, 0.002}) {
    OracleTrackerOptions options;
    options.noise_amplitude = noise;
    options.noise_seed = 99;
    OracleTracker a(scene, options);
    OracleTracker b(scene, options);
    const AnnotationSequencePair pair = variable_pair(grid_centers(5), 20);
    const TrackSet ta = propagate_pair(pair, a, FilterConfig{}, scene.geometry, any_path);
    const TrackSet tb = propagate_pair(pair, b, FilterConfig{}, scene.geometry, any_path);
    EXPECT_EQ(ta, tb);
  }
}

TEST(OracleTrackerTest, RejectsUnboundSeed) {
  OracleTracker tracker(scene_at({Point2{0.5, 0.5}}));
  const AnnotationSequencePair pair = variable_pair({Point2{0.1, 0.1}}, 5);
  EXPECT_THROW(propagate_pair(pair, tracker, FilterConfig{}, ImageGeometry{}, any_path),
               BackendError);
}

TEST(Propagate, StationaryIdentity) {
  OracleTracker tracker(scene_at({Point2{0.5, 0.5}}));
  const TrackSet tracks = propagate_pair(variable_pair({Point2{0.5, 0.5}}, 5), tracker,
                                         FilterConfig{}, ImageGeometry{}, any_path);
  ASSERT_EQ(tracks.frames.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(tracks.frames[i].frame_index, static_cast<int>(i));
    ASSERT_EQ(tracks.frames[i].points.size(), 1u);
    const TrackPoint& p = tracks.frames[i].points[0];
    EXPECT_TRUE(p.alive());
    EXPECT_EQ(p.cx, 0.5);
    EXPECT_EQ(p.cy, 0.5);
  }
}

TEST(Propagate, TerminatesAtTheEdgeAndNeverReturns) {
  SceneTarget t;
  t.start = Point2{0.95, 0.5};
  t.velocity = Point2{0.02, 0.0};
  OracleTracker tracker(scene_with({t}));
  const TrackSet tracks = propagate_pair(variable_pair({Point2{0.95, 0.5}}, 10), tracker,
                                         FilterConfig{0.01, true}, ImageGeometry{}, any_path);
  ASSERT_EQ(tracks.frames.size(), 10u);
  EXPECT_TRUE(tracks.frames[1].points.at(0).alive());
  ASSERT_EQ(tracks.frames[2].points.size(), 1u);
  EXPECT_EQ(tracks.frames[2].points[0].status, TrackStatus::kTerminatedEdge);
  for (std::size_t i = 3; i < 10; ++i) {
    EXPECT_TRUE(tracks.frames[i].points.empty()) << "frame " << i;
    EXPECT_EQ(tracks.frames[i].frame_index, static_cast<int>(i));
  }
  EXPECT_NO_THROW(validate(tracks));
}

TEST(Propagate, SeedCountAccounting) {
  for (int k : {20, 40}) {
    const std::vector<Point2> centers = grid_centers(k);
    OracleTracker tracker(scene_at(centers, Point2{0.0005, 0.0003}));
    const TrackSet tracks = propagate_pair(variable_pair(centers, 30), tracker, FilterConfig{},
                                           ImageGeometry{}, any_path);
    EXPECT_EQ(tracks.frames.size(), 30u);
    EXPECT_EQ(tracks.propagated_record_count(), static_cast<std::size_t>(k * 29));
    EXPECT_EQ(tracks.labeled_instance_count(), static_cast<std::size_t>(k * 30));
  }
}

// Class ids, track ids and box sizes survive propagation; alive sets
// only shrink.
TEST(Propagate, ConservesIdentityAndSize) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    synthetic::MovingRectanglesParams params;
    params.seed = rng();
    params.frame_count = 40;
    const SyntheticScene scene = synthetic::make_moving_rectangles(params);
    OracleTrackerOptions options;
    options.noise_amplitude = 0.001;
    options.noise_seed = rng();
    OracleTracker tracker(scene, options);
    for (SelectionMode mode : {SelectionMode::kFixedBox, SelectionMode::kVariableBox}) {
      const AnnotationSequencePair pair = scene.make_pair(0, 40, mode);
      const TrackSet tracks =
          propagate_pair(pair, tracker, FilterConfig{}, scene.geometry, any_path);
      ASSERT_NO_THROW(validate(tracks));
      const std::vector<NormBox> seeds = pair.seed.initial_boxes();
      std::set<int> previous_alive;
      for (const TrackPoint& p : tracks.frames[0].points) previous_alive.insert(p.track_id);
      for (const TrackFrame& frame : tracks.frames) {
        std::set<int> alive;
        for (const TrackPoint& p : frame.points) {
          const NormBox& seed = seeds.at(p.track_id);
          EXPECT_EQ(p.class_id, seed.class_id);
          EXPECT_EQ(p.w, seed.w);
          EXPECT_EQ(p.h, seed.h);
          EXPECT_TRUE(previous_alive.contains(p.track_id));
          if (p.alive()) alive.insert(p.track_id);
        }
        previous_alive = alive;
      }
    }
  }
}

TEST(Propagate, FilterOnlyRemovesPoints) {
  const SyntheticScene scene = synthetic::make_moving_rectangles({});
  OracleTracker tracker(scene);
  const AnnotationSequencePair pair = scene.make_pair(0, 30, SelectionMode::kVariableBox);
  const TrackSet on = propagate_pair(pair, tracker, FilterConfig{0.01, true}, scene.geometry,
                                     any_path);
  const TrackSet off = propagate_pair(pair, tracker, FilterConfig{0.01, false}, scene.geometry,
                                      any_path);
  ASSERT_EQ(on.frames.size(), off.frames.size());
  std::size_t removed = 0;
  for (std::size_t i = 0; i < on.frames.size(); ++i) {
    std::set<int> unfiltered;
    for (const TrackPoint& p : off.frames[i].points) unfiltered.insert(p.track_id);
    for (const TrackPoint& p : on.frames[i].points) {
      if (p.alive()) EXPECT_TRUE(unfiltered.contains(p.track_id));
    }
    removed += off.frames[i].alive_count() - on.frames[i].alive_count();
  }
  EXPECT_GT(removed, 0u);  // the scene has exiting targets
}

TEST(Propagate, ChunkingHonorsBackendLimits) {
  const std::vector<Point2> centers = grid_centers(20);
  OracleTrackerOptions options;
  options.max_points = 7;
  options.max_chunk = 5;
  OracleTracker limited(scene_at(centers, Point2{0.001, 0.0}), options);
  OracleTracker whole(scene_at(centers, Point2{0.001, 0.0}));
  const AnnotationSequencePair pair = variable_pair(centers, 30);
  const TrackSet a = propagate_pair(pair, limited, FilterConfig{}, ImageGeometry{}, any_path);
  // 29 steps in chunks of 4 steps -> 8 chunks, each split into 3 point groups.
  EXPECT_EQ(limited.call_count(), 8 * 3);
  PropagationOptions single;
  single.chunk_length = 30;
  const TrackSet b =
      propagate_pair(pair, whole, FilterConfig{}, ImageGeometry{}, any_path, single);
  EXPECT_EQ(whole.call_count(), 1);
  EXPECT_EQ(a, b);

  OracleTracker eight(scene_at(centers, Point2{0.001, 0.0}));
  propagate_pair(pair, eight, FilterConfig{}, ImageGeometry{}, any_path);
  EXPECT_EQ(eight.call_count(), 5);  // ceil(29 / 7)
}

// Fails on a chosen call; used to check the all-or-nothing rule.
class FailingTracker final : public TrackerBackend {
 public:
  FailingTracker(TrackerBackend& inner, int fail_on) : inner_(inner), fail_on_(fail_on) {}
  BackendInfo info() override { return inner_.info(); }
  TrackResponse track(const TrackRequest& request) override {
    if (++calls_ == fail_on_) throw BackendError("tracker crashed");
    return inner_.track(request);
  }

 private:
  TrackerBackend& inner_;
  int fail_on_;
  int calls_ = 0;
};

TEST(Propagate, BackendFailureDiscardsTheWindow) {
  OracleTracker oracle(scene_at({Point2{0.5, 0.5}}));
  FailingTracker failing(oracle, 3);
  EXPECT_THROW(propagate_pair(variable_pair({Point2{0.5, 0.5}}, 30), failing, FilterConfig{},
                              ImageGeometry{}, any_path),
               BackendError);
}

// Answers with a wrong job id or a missing point.
class BrokenTracker final : public TrackerBackend {
 public:
  explicit BrokenTracker(int mode) : mode_(mode) {}
  BackendInfo info() override { return {}; }
  TrackResponse track(const TrackRequest& request) override {
    TrackResponse r;
    r.job_id = mode_ == 0 ? "other" : request.job_id;
    for (std::size_t i = 0; i < request.frame_indices.size(); ++i) {
      std::vector<TrackedPoint> points;
      for (const TrackQueryPoint& q : request.points) {
        if (mode_ == 1) continue;
        points.push_back(TrackedPoint{q.track_id, mode_ == 2 ? std::nan("") : q.x, q.y, true});
      }
      r.frames.push_back(points);
    }
    if (mode_ == 3) r.frames.pop_back();
    return r;
  }

 private:
  int mode_;
};

TEST(Propagate, RejectsMalformedResponses) {
  for (int mode = 0; mode < 4; ++mode) {
    BrokenTracker tracker(mode);
    EXPECT_THROW(propagate_pair(variable_pair({Point2{0.5, 0.5}}, 5), tracker, FilterConfig{},
                                ImageGeometry{}, any_path),
                 BackendError)
        << "mode " << mode;
  }
}

TEST(Propagate, MissingSeedFrameFails) {
  OracleTracker tracker(scene_at({Point2{0.5, 0.5}}));
  const FramePathFn missing = [](int frame) -> std::string {
    throw NotFoundError("frame " + std::to_string(frame) + " missing");
  };
  EXPECT_THROW(propagate_pair(variable_pair({Point2{0.5, 0.5}}, 5), tracker, FilterConfig{},
                              ImageGeometry{}, missing),
               NotFoundError);
}

TEST(Propagate, RejectsShortChunks) {
  OracleTracker tracker(scene_at({Point2{0.5, 0.5}}));
  PropagationOptions options;
  options.chunk_length = 1;
  EXPECT_THROW(propagate_pair(variable_pair({Point2{0.5, 0.5}}, 5), tracker, FilterConfig{},
                              ImageGeometry{}, any_path, options),
               ValidationError);
}

}  // namespace
}  // namespace seedprop
