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

// nlohmann::json adapters for the domain types. Field names here are the
// on-disk and wire names.

#include <json.hpp>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"
#include "seedprop/store/project.h"

namespace seedprop {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const ImageGeometry& g);
void from_json(const Json& j, ImageGeometry& g);
void to_json(Json& j, const NormBox& b);
void from_json(const Json& j, NormBox& b);
void to_json(Json& j, const PixelBox& b);
void from_json(const Json& j, PixelBox& b);
void to_json(Json& j, const Point2& p);
void from_json(const Json& j, Point2& p);
void to_json(Json& j, const SeedAnnotation& s);
void from_json(const Json& j, SeedAnnotation& s);
void to_json(Json& j, const AnnotationSequencePair& p);
void from_json(const Json& j, AnnotationSequencePair& p);
void to_json(Json& j, const TrackPoint& p);
void from_json(const Json& j, TrackPoint& p);
void to_json(Json& j, const TrackFrame& f);
void from_json(const Json& j, TrackFrame& f);
void to_json(Json& j, const TrackSet& t);
void from_json(const Json& j, TrackSet& t);
void to_json(Json& j, const PolygonLabel& p);
void from_json(const Json& j, PolygonLabel& p);
void to_json(Json& j, const FrameLabels& f);
void from_json(const Json& j, FrameLabels& f);
void to_json(Json& j, const JobRecord& r);
void from_json(const Json& j, JobRecord& r);
void to_json(Json& j, const Project& p);
void from_json(const Json& j, Project& p);

inline constexpr int kSeedFileVersion = 1;
inline constexpr int kManifestVersion = 1;

// Seed file shared by the CLI and the web UI:
//   {"version":1, "frame_index":0, "frame_count":30, "mode":"fixed",
//    "fixed_dims":{"w":..,"h":..}, "entries":[{"class_id":0,"cx":..,"cy":..}]}
// Variable-mode entries carry "w" and "h" instead of fixed_dims.
// Throws ParseError / ValidationError.
AnnotationSequencePair parse_seed_file(std::string_view text,
                                       std::string_view source = "seed");
std::string format_seed_file(const AnnotationSequencePair& pair);

}  // namespace seedprop
