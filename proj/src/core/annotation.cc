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

#include "seedprop/core/annotation.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "seedprop/core/error.h"

namespace seedprop {

std::string_view to_string(SelectionMode mode) {
  return mode == SelectionMode::kFixedBox ? "fixed" : "variable";
}

SelectionMode parse_selection_mode(std::string_view text) {
  if (text == "fixed") return SelectionMode::kFixedBox;
  if (text == "variable") return SelectionMode::kVariableBox;
  throw ValidationError("unknown selection mode '" + std::string(text) +
                        "' (expected fixed|variable)");
}

void SeedAnnotation::validate() const {
  if (frame_index < 0) throw ValidationError("seed frame index is negative");
  if (entries.empty()) throw ValidationError("seed has no entries");
  const bool fixed = mode == SelectionMode::kFixedBox;
  if (fixed != fixed_dims.has_value()) {
    throw ValidationError(fixed ? "fixed-box seed requires fixed_dims"
                                : "variable-box seed must not set fixed_dims");
  }
  if (fixed_dims && !(fixed_dims->w > 0.0 && fixed_dims->w <= 1.0 &&
                      fixed_dims->h > 0.0 && fixed_dims->h <= 1.0)) {
    throw ValidationError("fixed_dims must lie in (0,1]");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const SeedEntry& entry = entries[i];
    const std::string where = "seed entry " + std::to_string(i) + ": ";
    if (entry.class_id < 0) throw ValidationError(where + "negative class id");
    if (!(entry.center.x >= 0.0 && entry.center.x <= 1.0 &&
          entry.center.y >= 0.0 && entry.center.y <= 1.0)) {
      throw ValidationError(where + "center outside [0,1]");
    }
    if (fixed && entry.extent) {
      throw ValidationError(where + "fixed-box entries carry center points only");
    }
    if (!fixed) {
      if (!entry.extent) {
        throw ValidationError(where + "variable-box entries need a box size");
      }
      if (!(entry.extent->w > 0.0 && entry.extent->w <= 1.0 &&
            entry.extent->h > 0.0 && entry.extent->h <= 1.0)) {
        throw ValidationError(where + "box size outside (0,1]");
      }
    }
  }
}

std::vector<NormBox> SeedAnnotation::initial_boxes() const {
  std::vector<NormBox> boxes;
  boxes.reserve(entries.size());
  for (const SeedEntry& entry : entries) {
    const NormSize size = entry.extent.value_or(fixed_dims.value_or(NormSize{}));
    boxes.push_back(NormBox{entry.class_id, entry.center.x, entry.center.y,
                            size.w, size.h});
  }
  return boxes;
}

bool AnnotationSequencePair::overlaps(const AnnotationSequencePair& other) const {
  return first_frame() <= other.last_frame() &&
         other.first_frame() <= last_frame();
}

void AnnotationSequencePair::validate() const {
  seed.validate();
  if (frame_count < 1) {
    throw ValidationError("annotation-sequence pair needs at least one frame");
  }
}

void validate_disjoint(std::span<const AnnotationSequencePair> pairs) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      if (pairs[i].overlaps(pairs[j])) {
        throw ValidationError(
            "annotation-sequence pairs starting at frames " +
            std::to_string(pairs[i].first_frame()) + " and " +
            std::to_string(pairs[j].first_frame()) + " overlap");
      }
    }
  }
}

NormBox TrackPoint::box() const { return NormBox{class_id, cx, cy, w, h}; }

std::size_t TrackFrame::alive_count() const {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(), [](const TrackPoint& p) { return p.alive(); }));
}

std::vector<NormBox> TrackFrame::label_boxes() const {
  std::vector<NormBox> boxes;
  for (const TrackPoint& p : points) {
    if (!p.alive()) continue;
    const NormBox b = clamp_to_image(p.box());
    if (b.w > 0.0 && b.h > 0.0) boxes.push_back(b);
  }
  return boxes;
}

std::size_t TrackSet::propagated_record_count() const {
  std::size_t total = 0;
  for (std::size_t i = 1; i < frames.size(); ++i) total += frames[i].alive_count();
  return total;
}

std::size_t TrackSet::labeled_instance_count() const {
  std::size_t total = 0;
  for (const TrackFrame& frame : frames) total += frame.alive_count();
  return total;
}

void validate(const TrackSet& tracks) {
  if (tracks.frames.empty()) return;
  std::map<int, TrackPoint> seeds;
  for (const TrackPoint& p : tracks.frames.front().points) {
    if (!seeds.emplace(p.track_id, p).second) {
      throw ValidationError("duplicate track id " + std::to_string(p.track_id) +
                            " in seed frame");
    }
  }
  std::set<int> terminated;
  int expected = tracks.frames.front().frame_index;
  for (const TrackFrame& frame : tracks.frames) {
    if (frame.frame_index != expected) {
      throw ValidationError("track frames are not consecutive at frame " +
                            std::to_string(frame.frame_index));
    }
    ++expected;
    std::set<int> seen;
    for (const TrackPoint& p : frame.points) {
      const auto seed = seeds.find(p.track_id);
      if (seed == seeds.end()) {
        throw ValidationError("track id " + std::to_string(p.track_id) +
                              " not present in the seed frame");
      }
      if (seed->second.class_id != p.class_id) {
        throw ValidationError("track " + std::to_string(p.track_id) +
                              " changed class");
      }
      if (!seen.insert(p.track_id).second) {
        throw ValidationError("track " + std::to_string(p.track_id) +
                              " appears twice in frame " +
                              std::to_string(frame.frame_index));
      }
      if (terminated.contains(p.track_id)) {
        throw ValidationError("track " + std::to_string(p.track_id) +
                              " reappears after termination at frame " +
                              std::to_string(frame.frame_index));
      }
    }
    for (const TrackPoint& p : frame.points) {
      if (!p.alive()) terminated.insert(p.track_id);
    }
  }
}

MaskGrid::MaskGrid(ImageGeometry geometry)
    : geometry_(geometry),
      bits_(static_cast<std::size_t>(geometry.width_px) * geometry.height_px, 0) {
  geometry.validate();
}

std::size_t MaskGrid::foreground_count() const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

std::vector<std::uint32_t> encode_rle(const MaskGrid& mask) {
  std::vector<std::uint32_t> runs;
  bool current = false;
  std::uint32_t length = 0;
  for (std::uint8_t bit : mask.data()) {
    const bool value = bit != 0;
    if (value != current) {
      runs.push_back(length);
      current = value;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

MaskGrid decode_rle(std::span<const std::uint32_t> runs, int rows, int cols) {
  MaskGrid mask(ImageGeometry{cols, rows});
  const std::uint64_t total =
      std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  if (total != static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols)) {
    throw ValidationError("RLE run lengths sum to " + std::to_string(total) +
                          ", expected " + std::to_string(std::uint64_t(rows) * cols));
  }
  std::size_t offset = 0;
  bool value = false;
  for (std::uint32_t run : runs) {
    if (value) {
      for (std::size_t i = offset; i < offset + run; ++i) {
        mask.set(static_cast<int>(i % cols), static_cast<int>(i / cols));
      }
    }
    offset += run;
    value = !value;
  }
  return mask;
}

void PolygonLabel::validate() const {
  if (class_id < 0) throw ValidationError("polygon has a negative class id");
  if (vertices.size() < 3) {
    throw ValidationError("polygon needs at least 3 vertices, got " +
                          std::to_string(vertices.size()));
  }
  if (vertices.front() == vertices.back()) {
    throw ValidationError("polygon ring must not repeat its first vertex");
  }
  for (const Point2& v : vertices) {
    if (!(v.x >= 0.0 && v.x <= 1.0 && v.y >= 0.0 && v.y <= 1.0)) {
      throw ValidationError("polygon vertex outside [0,1]^2");
    }
  }
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kManual:
      return "manual";
    case Provenance::kPropagated:
      return "propagated";
    case Provenance::kInferred:
      return "inferred";
  }
  return "propagated";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "manual") return Provenance::kManual;
  if (text == "propagated") return Provenance::kPropagated;
  if (text == "inferred") return Provenance::kInferred;
  throw ValidationError("unknown provenance '" + std::string(text) + "'");
}

}  // namespace seedprop
