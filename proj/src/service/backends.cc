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

#include "seedprop/service/backends.h"

#include <fmt/format.h>

#include "seedprop/core/error.h"
#include "seedprop/detector/reference_detector.h"
#include "seedprop/propagation/oracle_tracker.h"
#include "seedprop/segfit/oracle_segmenter.h"
#include "seedprop/service/process.h"
#include "seedprop/synthetic/scene.h"

namespace seedprop {
namespace fs = std::filesystem;
namespace {

double option(const BackendSpec& spec, const char* key, double fallback) {
  auto it = spec.options.find(key);
  return it == spec.options.end() ? fallback : it->second;
}

void check_options(const BackendSpec& spec, std::string_view role,
                   std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : spec.options) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || k == key;
    if (!ok) throw ValidationError(fmt::format("{} backend: unknown option '{}'", role, key));
  }
}

synthetic::SyntheticScene scene_for(const BackendSpec& spec, const ImageGeometry& geometry,
                                    const fs::path& base_dir) {
  fs::path path(spec.scene);
  if (path.is_relative()) path = base_dir / path;
  synthetic::SyntheticScene scene = synthetic::load_scene(path);
  if (scene.geometry != geometry) {
    throw ValidationError(fmt::format("scene {} is {}x{}, project is {}x{}", path.string(),
                                      scene.geometry.width_px, scene.geometry.height_px,
                                      geometry.width_px, geometry.height_px));
  }
  return scene;
}

}  // namespace

Backends make_backends(const PipelineConfig& config, const ImageGeometry& geometry,
                       const fs::path& base_dir) {
  config.validate();
  Backends out;

  const BackendSpec& t = config.tracker;
  if (t.kind == "oracle") {
    check_options(t, "tracker", {"binding_radius", "noise_amplitude", "border_sticking",
                                 "noise_seed", "max_points", "max_chunk"});
    OracleTrackerOptions o;
    o.binding_radius = option(t, "binding_radius", o.binding_radius);
    o.noise_amplitude = option(t, "noise_amplitude", o.noise_amplitude);
    o.border_sticking = option(t, "border_sticking", 1.0) != 0.0;
    o.noise_seed = static_cast<std::uint64_t>(option(t, "noise_seed", 0.0));
    o.max_points = static_cast<int>(option(t, "max_points", 0.0));
    o.max_chunk = static_cast<int>(option(t, "max_chunk", 0.0));
    out.tracker = std::make_shared<OracleTracker>(scene_for(t, geometry, base_dir), o);
  } else {
    out.tracker = std::make_shared<ProcessTracker>(t.command, t.timeout_seconds);
  }

  if (config.segfit.enabled) {
    const BackendSpec& s = config.segmenter;
    if (s.kind == "oracle") {
      check_options(s, "segmenter", {"dilation_px", "max_prompts"});
      OracleSegmenterOptions o;
      o.dilation_px = option(s, "dilation_px", o.dilation_px);
      o.max_prompts = static_cast<int>(option(s, "max_prompts", 0.0));
      out.segmenter = std::make_shared<OracleSegmenter>(scene_for(s, geometry, base_dir), o);
    } else {
      out.segmenter = std::make_shared<ProcessSegmenter>(s.command, s.timeout_seconds);
    }
  }

  const BackendSpec& d = config.detector;
  if (d.kind == "reference") {
    check_options(d, "detector", {"decay"});
    out.detector = std::make_shared<ReferenceDetector>(geometry, option(d, "decay", 0.98));
  } else {
    out.detector = std::make_shared<ProcessDetector>(d.command, d.timeout_seconds);
  }
  return out;
}

}  // namespace seedprop
