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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"

namespace seedprop {

// Fixed-point with six decimals, rounded half-up.
std::string format_fixed6(double value);

// "000042" for frame 42.
std::string frame_stem(int frame_index);
// Parses a zero-padded numeric stem; throws ParseError otherwise.
int parse_frame_stem(std::string_view stem);

// `class cx cy w h`
std::string format_box_line(const NormBox& box);
// `class x1 y1 x2 y2 ...`
std::string format_polygon_line(const PolygonLabel& polygon);
// `class cx cy w h confidence`
std::string format_detection_line(const NormBox& box, double confidence);

// These throw ParseError (line 0) with a description; the file readers
// re-throw with the source path and line number. num_classes == 0 skips
// the class-range check.
NormBox parse_box_line(std::string_view line, std::size_t num_classes = 0);
PolygonLabel parse_polygon_line(std::string_view line,
                                std::size_t num_classes = 0);
std::pair<NormBox, double> parse_detection_line(std::string_view line,
                                                std::size_t num_classes = 0);

void write_box_file(const std::filesystem::path& path,
                    std::span<const NormBox> boxes);
void write_polygon_file(const std::filesystem::path& path,
                        std::span<const PolygonLabel> polygons);

std::vector<NormBox> read_box_file(const std::filesystem::path& path,
                                   std::size_t num_classes = 0);
std::vector<PolygonLabel> read_polygon_file(const std::filesystem::path& path,
                                            std::size_t num_classes = 0);

// Writes `contents` to `path` via a sibling temp file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace seedprop
