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

#include "seedprop/store/ground_truth.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "seedprop/core/error.h"
#include "seedprop/store/label_io.h"

namespace seedprop {
namespace fs = std::filesystem;

std::string_view to_string(GroundTruthFormat format) {
  return format == GroundTruthFormat::kMotCsv ? "mot" : "yolo";
}

GroundTruthFormat parse_ground_truth_format(std::string_view text) {
  if (text == "yolo") return GroundTruthFormat::kYoloTxtDir;
  if (text == "mot") return GroundTruthFormat::kMotCsv;
  throw ValidationError("unknown ground-truth format '" + std::string(text) +
                        "' (expected yolo|mot)");
}

std::vector<MotRow> read_mot_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open MOT file " + path.string());
  std::vector<MotRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::size_t begin = pos;
      while (begin < end && line[begin] == ' ') ++begin;
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + begin, line.data() + end, value);
      if (begin == end || ec != std::errc() || ptr != line.data() + end ||
          !std::isfinite(value)) {
        throw ParseError(path.string(), number,
                         "bad MOT field '" + line.substr(pos, end - pos) + "'");
      }
      values.push_back(value);
      pos = end + 1;
    }
    if (values.size() < 6) {
      throw ParseError(path.string(), number,
                       "expected at least 6 MOT columns, got " + std::to_string(values.size()));
    }
    MotRow row;
    if (values[0] != std::floor(values[0]) || values[0] < 1) {
      throw ParseError(path.string(), number, "MOT frame numbers are 1-based integers");
    }
    row.frame = static_cast<int>(values[0]);
    row.id = static_cast<int>(values[1]);
    row.x = values[2];
    row.y = values[3];
    row.w = values[4];
    row.h = values[5];
    row.extra.assign(values.begin() + 6, values.end());
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

FrameLabels& frame_slot(FrameLabelMap& labels, int index) {
  auto [it, inserted] = labels.try_emplace(index);
  if (inserted) {
    it->second.frame_index = index;
    it->second.provenance = Provenance::kManual;
  }
  return it->second;
}

}  // namespace

FrameLabelMap load_ground_truth(const fs::path& path, GroundTruthFormat format,
                                const ImageGeometry& geometry, std::size_t num_classes) {
  geometry.validate();
  FrameLabelMap labels;
  if (format == GroundTruthFormat::kMotCsv) {
    const std::vector<MotRow> rows = read_mot_csv(path);
    std::size_t number = 0;
    for (const MotRow& row : rows) {
      ++number;
      const PixelBox box{row.x, row.y, row.x + row.w, row.y + row.h};
      try {
        frame_slot(labels, row.frame - 1).boxes.push_back(pixel_to_norm(box, geometry, 0));
      } catch (const ValidationError& e) {
        throw ParseError(path.string(), number, e.what());
      }
    }
    return labels;
  }

  if (!fs::is_directory(path)) {
    throw NotFoundError("YOLO ground truth must be a directory: " + path.string());
  }
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    int index = 0;
    try {
      index = parse_frame_stem(entry.path().stem().string());
    } catch (const ParseError&) {
      continue;  // classes.txt and friends
    }
    FrameLabels& frame = frame_slot(labels, index);
    for (const NormBox& box : read_box_file(entry.path(), num_classes)) {
      frame.boxes.push_back(box);
    }
  }
  return labels;
}

std::size_t count_boxes(const FrameLabelMap& labels) {
  std::size_t total = 0;
  for (const auto& [index, frame] : labels) total += frame.boxes.size();
  return total;
}

}  // namespace seedprop
