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

#include "seedprop/dataset/dataset.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <system_error>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/store/checksum.h"
#include "seedprop/store/label_io.h"
#include "seedprop/store/serialization.h"

namespace seedprop {
namespace fs = std::filesystem;

std::string_view to_string(DatasetVariant variant) {
  return variant == DatasetVariant::kDetect ? "detect" : "segment";
}

DatasetVariant parse_dataset_variant(std::string_view text) {
  if (text == "detect") return DatasetVariant::kDetect;
  if (text == "segment") return DatasetVariant::kSegment;
  throw ValidationError(fmt::format("unknown dataset variant '{}'", text));
}

std::string AblationTag::label() const {
  return fmt::format("{} Box Selection / {} / {}",
                     mode == SelectionMode::kFixedBox ? "Fixed" : "Variable",
                     segment_fit ? "SAM" : "No SAM",
                     positional_filter ? "Positional Filter" : "No Positional Filter");
}

std::vector<AblationTag> ablation_grid() {
  std::vector<AblationTag> grid;
  for (SelectionMode mode : {SelectionMode::kFixedBox, SelectionMode::kVariableBox}) {
    for (bool fit : {false, true}) {
      for (bool filter : {false, true}) grid.push_back(AblationTag{mode, fit, filter});
    }
  }
  return grid;
}

void DatasetSpec::validate() const {
  if (pairs.empty()) throw ValidationError("dataset needs at least one source pair");
  for (const AnnotationSequencePair& pair : pairs) pair.validate();
  validate_disjoint(pairs);
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1]");
  }
}

namespace {

constexpr std::string_view label_dir(DatasetVariant variant) {
  return variant == DatasetVariant::kDetect ? "labels" : "labels_seg";
}

void link_or_copy(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_hard_link(from, to, ec);
  if (!ec) return;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

Json tag_json(const AblationTag& tag) {
  return Json{{"mode", to_string(tag.mode)},
              {"sam", tag.segment_fit},
              {"filter", tag.positional_filter},
              {"label", tag.label()}};
}

AblationTag tag_from_json(const Json& j) {
  return AblationTag{parse_selection_mode(j.at("mode").get<std::string>()),
                     j.at("sam").get<bool>(), j.at("filter").get<bool>()};
}

std::string format_range_list(const std::vector<int>& frames) {
  std::string out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0) out += ", ";
    if (i == 20) return out + fmt::format("... ({} total)", frames.size());
    out += std::to_string(frames[i]);
  }
  return out;
}

}  // namespace

DatasetManifest emit_dataset(const fs::path& out_dir, std::span<const DatasetFrame> frames,
                             std::span<const std::string> class_names,
                             const DatasetSpec& spec) {
  spec.validate();
  if (class_names.empty()) throw ValidationError("dataset needs at least one class name");
  if (frames.empty()) throw ValidationError("refusing to emit a dataset with 0 frames");

  std::map<int, const DatasetFrame*> by_index;
  for (const DatasetFrame& frame : frames) {
    if (!by_index.emplace(frame.labels.frame_index, &frame).second) {
      throw ValidationError(fmt::format("frame {} supplied twice", frame.labels.frame_index));
    }
  }
  std::set<int> expected;
  for (const AnnotationSequencePair& pair : spec.pairs) {
    for (int f = pair.first_frame(); f <= pair.last_frame(); ++f) expected.insert(f);
  }
  std::vector<int> missing, extra;
  for (int f : expected) {
    if (!by_index.contains(f)) missing.push_back(f);
  }
  for (const auto& [f, _] : by_index) {
    if (!expected.contains(f)) extra.push_back(f);
  }
  if (!missing.empty()) {
    throw ValidationError("missing labels for frames: " + format_range_list(missing));
  }
  if (!extra.empty()) {
    throw ValidationError("frames outside every source pair: " + format_range_list(extra));
  }

  const std::size_t num_classes = class_names.size();
  bool any_polygon = false;
  for (const auto& [f, frame] : by_index) {
    for (const NormBox& b : frame->labels.boxes) {
      validate(b);
      if (static_cast<std::size_t>(b.class_id) >= num_classes) {
        throw ValidationError(fmt::format("frame {}: class {} out of range", f, b.class_id));
      }
    }
    for (const PolygonLabel& p : frame->labels.polygons) {
      p.validate();
      if (static_cast<std::size_t>(p.class_id) >= num_classes) {
        throw ValidationError(fmt::format("frame {}: class {} out of range", f, p.class_id));
      }
    }
    any_polygon = any_polygon || !frame->labels.polygons.empty();
  }
  if (spec.variant == DatasetVariant::kSegment && !any_polygon) {
    throw ValidationError("segment dataset requested but the labels carry no polygons");
  }
  if (fs::exists(out_dir / kDatasetManifestName)) {
    throw ValidationError("dataset already exists at " + out_dir.string());
  }

  const std::string labels_name(label_dir(spec.variant));
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / labels_name);

  DatasetManifest manifest;
  manifest.variant = spec.variant;
  manifest.tag = spec.tag;
  manifest.config_hash = spec.config_hash;
  manifest.class_names.assign(class_names.begin(), class_names.end());

  std::string classes;
  for (const std::string& name : class_names) classes += name + "\n";
  write_text_file(out_dir / "classes.txt", classes);
  manifest.checksums["classes.txt"] = sha256_hex(classes);

  for (const auto& [f, frame] : by_index) {
    manifest.frames.push_back(f);
    manifest.provenance[f] = frame->labels.provenance;
    if (!fs::is_regular_file(frame->image)) {
      throw NotFoundError(fmt::format("frame {}: image {} not found", f, frame->image.string()));
    }
    const std::string image_rel =
        "images/" + frame_stem(f) + frame->image.extension().string();
    link_or_copy(frame->image, out_dir / image_rel);
    manifest.images[f] = image_rel;
    manifest.checksums[image_rel] = sha256_file(out_dir / image_rel);

    std::string text;
    if (spec.variant == DatasetVariant::kDetect) {
      for (const NormBox& b : frame->labels.boxes) text += format_box_line(b) + "\n";
    } else {
      for (const PolygonLabel& p : frame->labels.polygons) text += format_polygon_line(p) + "\n";
    }
    const std::string label_rel = labels_name + "/" + frame_stem(f) + ".txt";
    write_text_file(out_dir / label_rel, text);
    manifest.checksums[label_rel] = sha256_hex(text);
  }

  const std::size_t n = manifest.frames.size();
  const std::size_t n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n) - 1e-9)));
  manifest.train.assign(manifest.frames.begin(), manifest.frames.begin() + n_train);
  if (n_train == n) {
    manifest.val = manifest.train;
  } else {
    manifest.val.assign(manifest.frames.begin() + n_train, manifest.frames.end());
  }

  Json j;
  j["version"] = kDatasetVersion;
  j["variant"] = to_string(manifest.variant);
  j["tag"] = tag_json(manifest.tag);
  j["config_hash"] = manifest.config_hash;
  j["class_names"] = manifest.class_names;
  j["frame_count"] = n;
  Json frame_list = Json::array();
  for (int f : manifest.frames) {
    frame_list.push_back(Json{{"index", f},
                              {"provenance", to_string(manifest.provenance.at(f))},
                              {"image", manifest.images.at(f)}});
  }
  j["frames"] = std::move(frame_list);
  j["splits"] = Json{{"train", manifest.train}, {"val", manifest.val}};
  j["checksums"] = manifest.checksums;
  // The manifest goes last: a directory without one is an incomplete dataset.
  write_text_file(out_dir / kDatasetManifestName, j.dump(2) + "\n");
  spdlog::debug("emitted {} frames to {}", n, out_dir.string());
  return manifest;
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / kDatasetManifestName;
  if (!fs::exists(manifest_path)) {
    throw NotFoundError("no dataset_manifest in " + dir.string());
  }
  Json j;
  try {
    j = Json::parse(read_text_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw ParseError(manifest_path.string(), 0, e.what());
  }
  Dataset out;
  DatasetManifest& m = out.manifest;
  try {
    m.version = j.at("version").get<int>();
    if (m.version != kDatasetVersion) {
      throw ValidationError(fmt::format("dataset version {} is not supported (expected {})",
                                        m.version, kDatasetVersion));
    }
    m.variant = parse_dataset_variant(j.at("variant").get<std::string>());
    m.tag = tag_from_json(j.at("tag"));
    m.config_hash = j.at("config_hash").get<std::string>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const Json& f : j.at("frames")) {
      const int index = f.at("index").get<int>();
      m.frames.push_back(index);
      m.provenance[index] = parse_provenance(f.at("provenance").get<std::string>());
      m.images[index] = f.at("image").get<std::string>();
    }
    m.train = j.at("splits").at("train").get<std::vector<int>>();
    m.val = j.at("splits").at("val").get<std::vector<int>>();
    m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
  } catch (const Json::exception& e) {
    throw ParseError(manifest_path.string(), 0, e.what());
  }
  if (m.frames.empty()) throw ValidationError("dataset lists no frames");

  for (const auto& [rel, expected] : m.checksums) {
    const fs::path file = dir / rel;
    if (!fs::exists(file)) throw ValidationError("dataset file missing: " + rel);
    if (sha256_file(file) != expected) throw ValidationError("checksum mismatch: " + rel);
  }

  const std::string labels_name(label_dir(m.variant));
  for (int f : m.frames) {
    const std::string label_rel = labels_name + "/" + frame_stem(f) + ".txt";
    if (!m.checksums.contains(label_rel)) {
      throw ValidationError("manifest has no checksum for " + label_rel);
    }
    FrameLabels labels{f, {}, {}, m.provenance.at(f)};
    if (m.variant == DatasetVariant::kDetect) {
      labels.boxes = read_box_file(dir / label_rel, m.class_names.size());
    } else {
      labels.polygons = read_polygon_file(dir / label_rel, m.class_names.size());
    }
    out.frames.push_back(std::move(labels));
  }
  return out;
}

fs::path dataset_image_path(const fs::path& dir, const DatasetManifest& manifest, int frame) {
  auto it = manifest.images.find(frame);
  if (it == manifest.images.end()) {
    throw NotFoundError(fmt::format("frame {} is not in the dataset", frame));
  }
  return dir / it->second;
}

}  // namespace seedprop
