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

#include "seedprop/service/config.h"

#include <set>

#include <fmt/format.h>

#include "seedprop/core/error.h"
#include "seedprop/store/checksum.h"
#include "seedprop/store/serialization.h"

namespace seedprop {
namespace {

// Canonical form: nlohmann::json sorts object keys.
using CanonicalJson = nlohmann::json;

void check_keys(const CanonicalJson& j, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ValidationError(fmt::format("{} must be an object", where));
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || a == key;
    if (!known) throw ValidationError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <typename T>
void read(const CanonicalJson& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

CanonicalJson backend_json(const BackendSpec& b) {
  return CanonicalJson{{"kind", b.kind},
                       {"scene", b.scene},
                       {"command", b.command},
                       {"options", b.options},
                       {"timeout_seconds", b.timeout_seconds}};
}

BackendSpec backend_from(const CanonicalJson& j, std::string_view where, BackendSpec b) {
  check_keys(j, where, {"kind", "scene", "command", "options", "timeout_seconds"});
  read(j, "kind", b.kind);
  read(j, "scene", b.scene);
  read(j, "command", b.command);
  read(j, "options", b.options);
  read(j, "timeout_seconds", b.timeout_seconds);
  return b;
}

void validate_backend(const BackendSpec& b, std::string_view role,
                      std::initializer_list<std::string_view> kinds) {
  bool known = false;
  for (std::string_view k : kinds) known = known || k == b.kind;
  if (!known) throw ValidationError(fmt::format("{} backend kind '{}' is not supported", role, b.kind));
  if (b.kind == "process" && b.command.empty()) {
    throw ValidationError(fmt::format("{} backend needs a command", role));
  }
  if (b.kind == "oracle" && b.scene.empty()) {
    throw ValidationError(fmt::format("{} oracle backend needs a scene file", role));
  }
  if (!(b.timeout_seconds > 0.0)) {
    throw ValidationError(fmt::format("{} backend timeout must be positive", role));
  }
}

CanonicalJson to_canonical(const PipelineConfig& c) {
  CanonicalJson j;
  j["version"] = kConfigVersion;
  j["mode"] = to_string(c.mode);
  j["chunk_length"] = c.chunk_length;
  j["variant"] = to_string(c.variant);
  j["train_fraction"] = c.train_fraction;
  j["filter"] = {{"enabled", c.filter.enabled}, {"edge_margin", c.filter.edge_margin}};
  j["segfit"] = {{"enabled", c.segfit.enabled},
                 {"batch_size", c.segfit.batch_size},
                 {"min_mask_pixels", c.segfit.min_mask_pixels},
                 {"simplify_tolerance_px", c.segfit.simplify_tolerance_px},
                 {"workers", c.segfit.workers}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch", c.train.batch},
                {"image_size", c.train.image_size},
                {"confidence", c.train.confidence},
                {"iou_threshold", c.train.iou_threshold},
                {"class_agnostic_nms", c.train.class_agnostic_nms},
                {"extensions", c.train.extensions}};
  j["match"] = {{"iou_threshold", c.match.iou_threshold},
                {"confidence_floor", c.match.confidence_floor},
                {"class_agnostic", c.match.class_agnostic}};
  j["backends"] = {{"tracker", backend_json(c.tracker)},
                   {"segmenter", backend_json(c.segmenter)},
                   {"detector", backend_json(c.detector)}};
  if (c.ground_truth) {
    j["ground_truth"] = {{"path", c.ground_truth->path},
                         {"format", to_string(c.ground_truth->format)}};
  }
  j["infer_frames"] = c.infer_frames;
  return j;
}

}  // namespace

void PipelineConfig::validate() const {
  filter.validate();
  segfit.validate();
  train.validate();
  match.validate();
  if (chunk_length < 2) throw ValidationError("chunk_length must be >= 2");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1]");
  }
  validate_backend(tracker, "tracker", {"oracle", "process"});
  if (segfit.enabled) validate_backend(segmenter, "segmenter", {"oracle", "process"});
  validate_backend(detector, "detector", {"reference", "process"});
  for (int f : infer_frames) {
    if (f < 0) throw ValidationError("infer_frames holds a negative frame");
  }
}

AblationTag PipelineConfig::tag() const {
  return AblationTag{mode, segfit.enabled, filter.enabled};
}

std::string PipelineConfig::to_text() const { return to_canonical(*this).dump(2) + "\n"; }

std::string PipelineConfig::hash() const { return sha256_hex(to_canonical(*this).dump()).substr(0, 16); }

PipelineConfig parse_pipeline_config(std::string_view text, std::string_view source) {
  CanonicalJson j;
  try {
    j = CanonicalJson::parse(text);
  } catch (const CanonicalJson::parse_error& e) {
    throw ParseError(std::string(source), 0, e.what());
  }
  PipelineConfig c;
  try {
    check_keys(j, "config",
               {"version", "mode", "chunk_length", "variant", "train_fraction", "filter",
                "segfit", "train", "match", "backends", "ground_truth", "infer_frames"});
    const int version = j.value("version", kConfigVersion);
    if (version != kConfigVersion) {
      throw ValidationError(fmt::format("config version {} is not supported", version));
    }
    if (j.contains("mode")) c.mode = parse_selection_mode(j.at("mode").get<std::string>());
    if (j.contains("variant")) {
      c.variant = parse_dataset_variant(j.at("variant").get<std::string>());
    }
    read(j, "chunk_length", c.chunk_length);
    read(j, "train_fraction", c.train_fraction);
    read(j, "infer_frames", c.infer_frames);
    if (j.contains("filter")) {
      const CanonicalJson& f = j.at("filter");
      check_keys(f, "filter", {"enabled", "edge_margin"});
      read(f, "enabled", c.filter.enabled);
      read(f, "edge_margin", c.filter.edge_margin);
    }
    if (j.contains("segfit")) {
      const CanonicalJson& s = j.at("segfit");
      check_keys(s, "segfit",
                 {"enabled", "batch_size", "min_mask_pixels", "simplify_tolerance_px", "workers"});
      read(s, "enabled", c.segfit.enabled);
      read(s, "batch_size", c.segfit.batch_size);
      read(s, "min_mask_pixels", c.segfit.min_mask_pixels);
      read(s, "simplify_tolerance_px", c.segfit.simplify_tolerance_px);
      read(s, "workers", c.segfit.workers);
    }
    if (j.contains("train")) {
      const CanonicalJson& t = j.at("train");
      check_keys(t, "train",
                 {"epochs", "batch", "image_size", "confidence", "iou_threshold",
                  "class_agnostic_nms", "extensions"});
      read(t, "epochs", c.train.epochs);
      read(t, "batch", c.train.batch);
      read(t, "image_size", c.train.image_size);
      read(t, "confidence", c.train.confidence);
      read(t, "iou_threshold", c.train.iou_threshold);
      read(t, "class_agnostic_nms", c.train.class_agnostic_nms);
      read(t, "extensions", c.train.extensions);
    }
    if (j.contains("match")) {
      const CanonicalJson& m = j.at("match");
      check_keys(m, "match", {"iou_threshold", "confidence_floor", "class_agnostic"});
      read(m, "iou_threshold", c.match.iou_threshold);
      read(m, "confidence_floor", c.match.confidence_floor);
      read(m, "class_agnostic", c.match.class_agnostic);
    }
    if (j.contains("backends")) {
      const CanonicalJson& b = j.at("backends");
      check_keys(b, "backends", {"tracker", "segmenter", "detector"});
      if (b.contains("tracker")) c.tracker = backend_from(b.at("tracker"), "tracker", c.tracker);
      if (b.contains("segmenter")) {
        c.segmenter = backend_from(b.at("segmenter"), "segmenter", c.segmenter);
      }
      if (b.contains("detector")) {
        c.detector = backend_from(b.at("detector"), "detector", c.detector);
      }
    }
    if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
      const CanonicalJson& g = j.at("ground_truth");
      check_keys(g, "ground_truth", {"path", "format"});
      GroundTruthSource gt;
      gt.path = g.at("path").get<std::string>();
      if (g.contains("format")) {
        gt.format = parse_ground_truth_format(g.at("format").get<std::string>());
      }
      c.ground_truth = gt;
    }
  } catch (const CanonicalJson::exception& e) {
    throw ParseError(std::string(source), 0, e.what());
  }
  c.validate();
  return c;
}

}  // namespace seedprop
