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

#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"

namespace seedprop {

using FrameLabelMap = std::map<int, FrameLabels>;

enum class GroundTruthFormat { kYoloTxtDir, kMotCsv };

std::string_view to_string(GroundTruthFormat format);
GroundTruthFormat parse_ground_truth_format(std::string_view text);

// One `frame,id,x,y,w,h[,...]` row. Columns past the sixth (conf, class,
// visibility, ...) are kept verbatim in `extra`.
struct MotRow {
  int frame = 0;  // 1-based, as written in the file
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::vector<double> extra;

  bool operator==(const MotRow&) const = default;
};

// Throws ParseError naming the line for malformed rows.
std::vector<MotRow> read_mot_csv(const std::filesystem::path& path);

// Normalizes every label to NormBox. MOT frames become 0-based; MOT boxes
// all get class 0. num_classes == 0 disables the class-range check.
FrameLabelMap load_ground_truth(const std::filesystem::path& path,
                                GroundTruthFormat format,
                                const ImageGeometry& geometry,
                                std::size_t num_classes = 0);

std::size_t count_boxes(const FrameLabelMap& labels);

}  // namespace seedprop
