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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seedprop/core/annotation.h"

namespace seedprop {

enum class DatasetVariant { kDetect, kSegment };

std::string_view to_string(DatasetVariant variant);
DatasetVariant parse_dataset_variant(std::string_view text);

// The three ablation axes a label set was produced under.
struct AblationTag {
  SelectionMode mode = SelectionMode::kVariableBox;
  bool segment_fit = true;
  bool positional_filter = true;

  // Row label in the ablation table, e.g.
  // "Variable Box Selection / SAM / Positional Filter".
  std::string label() const;

  bool operator==(const AblationTag&) const = default;
};

// Every tag in ablation-table row order: fixed before variable, then
// segment fit off/on, then filter off/on.
std::vector<AblationTag> ablation_grid();

struct DatasetFrame {
  FrameLabels labels;
  std::filesystem::path image;
};

struct DatasetSpec {
  DatasetVariant variant = DatasetVariant::kDetect;
  std::vector<AnnotationSequencePair> pairs;
  // Leading fraction of frames (in frame order) used for training. At 1.0
  // validation reuses the training frames.
  double train_fraction = 1.0;
  AblationTag tag;
  std::string config_hash;

  void validate() const;
};

// Parsed dataset_manifest.
struct DatasetManifest {
  int version = 1;
  DatasetVariant variant = DatasetVariant::kDetect;
  AblationTag tag;
  std::string config_hash;
  std::vector<std::string> class_names;
  std::vector<int> frames;
  std::vector<int> train;
  std::vector<int> val;
  std::map<int, Provenance> provenance;
  std::map<int, std::string> images;            // frame -> relative path
  std::map<std::string, std::string> checksums;  // relative path -> sha256
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<FrameLabels> frames;  // manifest frame order
};

inline constexpr int kDatasetVersion = 1;
inline constexpr char kDatasetManifestName[] = "dataset_manifest";

// Writes images/, labels/ or labels_seg/, classes.txt and finally
// dataset_manifest under `out_dir`. Every frame of every pair must be
// supplied exactly once. Throws ValidationError otherwise.
DatasetManifest emit_dataset(const std::filesystem::path& out_dir,
                             std::span<const DatasetFrame> frames,
                             std::span<const std::string> class_names,
                             const DatasetSpec& spec);

// Verifies the manifest version and every listed checksum, then reads the
// labels back.
Dataset read_dataset(const std::filesystem::path& dir);

std::filesystem::path dataset_image_path(const std::filesystem::path& dir,
                                         const DatasetManifest& manifest, int frame);

}  // namespace seedprop
