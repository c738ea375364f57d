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

// Serves one oracle backend over stdin/stdout with the NDJSON wire protocol.
// Lets the process adapters be exercised without a real model.

#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/detector/reference_detector.h"
#include "seedprop/propagation/oracle_tracker.h"
#include "seedprop/segfit/oracle_segmenter.h"
#include "seedprop/service/wire.h"
#include "seedprop/synthetic/scene.h"

int main(int argc, char** argv) {
  CLI::App app{"oracle backend speaking the seedprop wire protocol"};
  std::string role;
  std::string scene_path;
  double dilation = 0.0;
  int max_prompts = 0;
  int max_points = 0;
  int max_chunk = 0;
  double noise = 0.0;
  bool no_sticking = false;
  double decay = 0.98;
  int width = 1280;
  int height = 720;
  app.add_option("--role", role, "tracker, segmenter or detector")
      ->required()
      ->check(CLI::IsMember({"tracker", "segmenter", "detector"}));
  app.add_option("--scene", scene_path, "synthetic scene file (tracker, segmenter)");
  app.add_option("--dilation", dilation, "segmenter prompt dilation in pixels");
  app.add_option("--max-prompts", max_prompts, "segmenter prompts per request (0 = any)");
  app.add_option("--max-points", max_points, "tracker points per request (0 = any)");
  app.add_option("--max-chunk", max_chunk, "tracker frames per request (0 = any)");
  app.add_option("--noise", noise, "tracker position noise (normalized)");
  app.add_flag("--no-sticking", no_sticking, "report exited targets off-image");
  app.add_option("--decay", decay, "detector confidence decay per frame");
  app.add_option("--width", width, "detector image width");
  app.add_option("--height", height, "detector image height");
  CLI11_PARSE(app, argc, argv);

  // stdout carries the protocol; logs go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("backend"));
  std::ios::sync_with_stdio(false);

  try {
    if (role == "detector") {
      seedprop::ReferenceDetector detector(seedprop::ImageGeometry{width, height}, decay);
      seedprop::wire::serve(std::cin, std::cout, detector.info(), nullptr, nullptr, &detector);
      return 0;
    }
    if (scene_path.empty()) throw seedprop::ValidationError("--scene is required for " + role);
    seedprop::synthetic::SyntheticScene scene = seedprop::synthetic::load_scene(scene_path);
    if (role == "tracker") {
      seedprop::OracleTrackerOptions options;
      options.noise_amplitude = noise;
      options.border_sticking = !no_sticking;
      options.max_points = max_points;
      options.max_chunk = max_chunk;
      seedprop::OracleTracker tracker(std::move(scene), options);
      seedprop::wire::serve(std::cin, std::cout, tracker.info(), &tracker, nullptr, nullptr);
    } else {
      seedprop::OracleSegmenter segmenter(std::move(scene), {dilation, max_prompts});
      seedprop::wire::serve(std::cin, std::cout, segmenter.info(), nullptr, &segmenter, nullptr);
    }
  } catch (const std::exception& e) {
    std::cerr << "seedprop_backend: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
