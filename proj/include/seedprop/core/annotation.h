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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seedprop/core/geometry.h"

namespace seedprop {

enum class SelectionMode { kFixedBox, kVariableBox };

std::string_view to_string(SelectionMode mode);
SelectionMode parse_selection_mode(std::string_view text);

struct NormSize {
  double w = 0.0;
  double h = 0.0;

  bool operator==(const NormSize&) const = default;
};

// One clicked center (fixed mode) or one drawn box (variable mode).
struct SeedEntry {
  int class_id = 0;
  Point2 center;
  std::optional<NormSize> extent;

  bool operator==(const SeedEntry&) const = default;
};

struct SeedAnnotation {
  int frame_index = 0;
  SelectionMode mode = SelectionMode::kVariableBox;
  std::vector<SeedEntry> entries;
  // Normalized; required iff mode == kFixedBox.
  std::optional<NormSize> fixed_dims;

  void validate() const;
  // Seed boxes in entry order; box i becomes track i.
  std::vector<NormBox> initial_boxes() const;

  bool operator==(const SeedAnnotation&) const = default;
};

struct AnnotationSequencePair {
  SeedAnnotation seed;
  int frame_count = 30;

  int first_frame() const { return seed.frame_index; }
  int last_frame() const { return seed.frame_index + frame_count - 1; }
  bool overlaps(const AnnotationSequencePair& other) const;
  void validate() const;

  bool operator==(const AnnotationSequencePair&) const = default;
};

// Throws ValidationError if any two pairs share a frame.
void validate_disjoint(std::span<const AnnotationSequencePair> pairs);

enum class TrackStatus { kAlive, kTerminatedEdge };

struct TrackPoint {
  int track_id = 0;
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  TrackStatus status = TrackStatus::kAlive;

  NormBox box() const;
  bool alive() const { return status == TrackStatus::kAlive; }

  bool operator==(const TrackPoint&) const = default;
};

struct TrackFrame {
  int frame_index = 0;
  std::vector<TrackPoint> points;

  std::size_t alive_count() const;
  // Boxes of the alive points clipped to the image. A box left with no
  // area (center pushed off-image) is dropped.
  std::vector<NormBox> label_boxes() const;

  bool operator==(const TrackFrame&) const = default;
};

// Per-frame track states for one pair. frames[0] is the seed frame; frames
// are consecutive.
struct TrackSet {
  std::vector<TrackFrame> frames;

  // Alive records in frames after the seed frame.
  std::size_t propagated_record_count() const;
  // Alive records in every frame, seed included.
  std::size_t labeled_instance_count() const;

  bool operator==(const TrackSet&) const = default;
};

// Throws ValidationError on a broken TrackSet invariant: non-consecutive
// frames, a track reappearing after termination, or ids not present in
// the seed frame.
void validate(const TrackSet& tracks);

// Binary foreground mask over one image.
class MaskGrid {
 public:
  MaskGrid() = default;
  explicit MaskGrid(ImageGeometry geometry);

  const ImageGeometry& geometry() const { return geometry_; }
  int width() const { return geometry_.width_px; }
  int height() const { return geometry_.height_px; }

  bool test(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * geometry_.width_px + x] != 0;
  }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * geometry_.width_px + x] = value;
  }
  // Out-of-bounds coordinates read as background.
  bool test_or_background(int x, int y) const {
    return x >= 0 && y >= 0 && x < geometry_.width_px &&
           y < geometry_.height_px && test(x, y);
  }

  std::size_t foreground_count() const;
  const std::vector<std::uint8_t>& data() const { return bits_; }

  bool operator==(const MaskGrid&) const = default;

 private:
  ImageGeometry geometry_{0, 0};
  std::vector<std::uint8_t> bits_;
};

// Row-major alternating background/foreground run lengths, starting with
// a (possibly zero) background run.
std::vector<std::uint32_t> encode_rle(const MaskGrid& mask);
// Throws ValidationError unless the runs sum to rows * cols.
MaskGrid decode_rle(std::span<const std::uint32_t> runs, int rows, int cols);

struct PolygonLabel {
  int class_id = 0;
  std::vector<Point2> vertices;  // normalized; closure implicit

  void validate() const;

  bool operator==(const PolygonLabel&) const = default;
};

enum class Provenance { kManual, kPropagated, kInferred };

std::string_view to_string(Provenance provenance);
Provenance parse_provenance(std::string_view text);

struct FrameLabels {
  int frame_index = 0;
  std::vector<NormBox> boxes;
  std::vector<PolygonLabel> polygons;
  Provenance provenance = Provenance::kPropagated;

  bool operator==(const FrameLabels&) const = default;
};

}  // namespace seedprop
