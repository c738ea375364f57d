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

// Command-line front end: project setup, single stages, full runs, sweeps,
// reports and the HTTP service.

#include <csignal>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/service/config.h"
#include "seedprop/service/demo.h"
#include "seedprop/service/pipeline.h"
#include "seedprop/service/server.h"
#include "seedprop/store/label_io.h"
#include "seedprop/store/project.h"
#include "seedprop/store/serialization.h"
#include "seedprop/synthetic/scene.h"

namespace fs = std::filesystem;
using namespace seedprop;

namespace {

// Flags that override fields of the config file.
struct Overrides {
  std::string config_path;
  std::optional<bool> filter;
  std::optional<bool> sam;
  std::optional<std::string> mode;
  std::optional<int> chunk_length;
  std::optional<double> edge_margin;
  std::optional<int> batch_size;
  std::optional<int> epochs;
  std::optional<double> confidence;
  std::optional<double> iou;
  std::optional<std::string> variant;
  std::optional<std::string> gt_path;
  std::string gt_format = "yolo";
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "pipeline config file");
  cmd->add_flag_callback("--filter", [&o] { o.filter = true; }, "positional filter on");
  cmd->add_flag_callback("--no-filter", [&o] { o.filter = false; }, "positional filter off");
  cmd->add_flag_callback("--sam", [&o] { o.sam = true; }, "segmentation box fitting on");
  cmd->add_flag_callback("--no-sam", [&o] { o.sam = false; }, "segmentation box fitting off");
  cmd->add_option("--mode", o.mode, "seed selection mode")
      ->check(CLI::IsMember({"fixed", "variable"}));
  cmd->add_option("--chunk-length", o.chunk_length, "tracker chunk length");
  cmd->add_option("--edge-margin", o.edge_margin, "positional filter border band");
  cmd->add_option("--batch-size", o.batch_size, "segmenter prompts per call");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--confidence", o.confidence, "detection confidence threshold");
  cmd->add_option("--iou", o.iou, "matching IoU threshold");
  cmd->add_option("--variant", o.variant, "dataset variant")
      ->check(CLI::IsMember({"detect", "segment"}));
  cmd->add_option("--gt", o.gt_path, "ground truth (YOLO label dir or MOT csv)");
  cmd->add_option("--gt-format", o.gt_format, "yolo or mot")
      ->check(CLI::IsMember({"yolo", "mot"}));
}

// --config, else the project's config.json, else defaults; flags override.
PipelineConfig load_config(const ProjectStore& store, const std::string& project,
                           const Overrides& o) {
  fs::path path = o.config_path;
  if (path.empty() && fs::exists(store.project_dir(project) / "config.json")) {
    path = store.project_dir(project) / "config.json";
  }
  PipelineConfig c =
      path.empty() ? PipelineConfig{} : parse_pipeline_config(read_text_file(path), path.string());
  if (o.filter) c.filter.enabled = *o.filter;
  if (o.sam) c.segfit.enabled = *o.sam;
  if (o.mode) c.mode = parse_selection_mode(*o.mode);
  if (o.chunk_length) c.chunk_length = *o.chunk_length;
  if (o.edge_margin) c.filter.edge_margin = *o.edge_margin;
  if (o.batch_size) c.segfit.batch_size = *o.batch_size;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.confidence) {
    c.train.confidence = *o.confidence;
    c.match.confidence_floor = *o.confidence;
  }
  if (o.iou) c.match.iou_threshold = *o.iou;
  if (o.variant) c.variant = parse_dataset_variant(*o.variant);
  if (o.gt_path) {
    c.ground_truth = GroundTruthSource{fs::absolute(*o.gt_path).string(),
                                       parse_ground_truth_format(o.gt_format)};
  }
  c.validate();
  return c;
}

void print_report_row(const EvalReport& r) {
  std::cout << report_csv(std::span<const EvalReport>(&r, 1));
}

int run_stage(const ProjectStore& store, const std::string& project, const Overrides& o,
              Stage last) {
  const PipelineConfig config = load_config(store, project, o);
  Pipeline pipeline(store, project, config, default_backend_factory(store, project));
  const PipelineResult result = pipeline.run(last);
  std::cout << "run " << result.run_id << " (" << config.tag().label() << ")\n";
  for (Stage s : result.skipped) std::cout << "  " << to_string(s) << ": already committed\n";
  for (const JobRecord& r : result.records) {
    const double seconds = r.timings.empty() ? 0.0 : r.timings.begin()->second;
    std::cout << fmt::format("  {}: done in {:.3f} s\n", to_string(r.stage), seconds);
  }
  if (result.report) print_report_row(*result.report);
  return 0;
}

int synth(ProjectStore& store, const std::string& project, int frames, int pair_frames,
          std::uint64_t seed, const std::string& shape) {
  synthetic::MovingRectanglesParams params;
  params.frame_count = frames;
  params.seed = seed;
  synthetic::SyntheticScene scene = synthetic::make_moving_rectangles(params);
  if (shape == "ellipse") {
    for (auto& t : scene.targets) t.shape = synthetic::ShapeKind::kEllipse;
  }
  create_synthetic_project(store, project, scene, pair_frames);
  const fs::path dir = store.project_dir(project);
  std::cout << fmt::format("project {} with {} frames, {} targets; config at {}\n", project,
                           frames, scene.targets.size(), (dir / "config.json").string());
  return 0;
}

ApiServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seed-frame label propagation pipeline"};
  app.require_subcommand(1);
  std::string root = ".";
  bool verbose = false;
  app.add_option("--root", root, "directory holding the projects");
  app.add_flag("-v,--verbose", verbose, "debug logging");

  std::string project;
  Overrides overrides;

  auto* init = app.add_subcommand("init", "create a project");
  int frame_count = 0;
  ImageGeometry geometry;
  std::vector<std::string> classes;
  init->add_option("project", project)->required();
  init->add_option("--frames", frame_count, "number of frames")->required();
  init->add_option("--width", geometry.width_px, "image width in pixels");
  init->add_option("--height", geometry.height_px, "image height in pixels");
  init->add_option("--classes", classes, "class names, in class id order")->delimiter(',');

  auto* seed = app.add_subcommand("seed", "import a seed file as a new pair");
  std::string seed_file;
  seed->add_option("project", project)->required();
  seed->add_option("seed_file", seed_file)->required()->check(CLI::ExistingFile);

  struct StageCommand {
    const char* name;
    const char* help;
    Stage last;
  };
  const StageCommand stage_commands[] = {
      {"propagate", "track seed points through each pair window", Stage::kPropagate},
      {"segment", "fit boxes and polygons from segmentation masks", Stage::kSegment},
      {"emit", "write the training dataset", Stage::kEmit},
      {"train", "train the detector on the dataset", Stage::kTrain},
      {"infer", "run the trained detector over the video", Stage::kInfer},
      {"eval", "score detections against ground truth", Stage::kEval},
      {"run", "run every stage", Stage::kEval},
  };
  std::map<CLI::App*, Stage> stage_apps;
  for (const StageCommand& sc : stage_commands) {
    auto* cmd = app.add_subcommand(sc.name, sc.help);
    cmd->add_option("project", project)->required();
    add_config_flags(cmd, overrides);
    stage_apps[cmd] = sc.last;
  }

  auto* sweep = app.add_subcommand("sweep", "run the 8-way ablation grid");
  sweep->add_option("project", project)->required();
  add_config_flags(sweep, overrides);

  auto* report = app.add_subcommand("report", "print a report as CSV");
  std::string report_id;
  report->add_option("project", project)->required();
  report->add_option("report_id", report_id, "defaults to the newest report");

  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  ServerOptions server_options;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--token", server_options.token, "shared bearer token");
  serve->add_option("--workers", server_options.workers, "concurrent jobs");

  auto* synth_cmd = app.add_subcommand("synth", "create a synthetic demo project");
  int synth_frames = 60;
  int pair_frames = 30;
  std::uint64_t synth_seed = 7;
  std::string shape = "rectangle";
  synth_cmd->add_option("project", project)->required();
  synth_cmd->add_option("--frames", synth_frames);
  synth_cmd->add_option("--pair-frames", pair_frames);
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--shape", shape)->check(CLI::IsMember({"rectangle", "ellipse"}));

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    ProjectStore store{fs::path(root)};
    if (init->parsed()) {
      const Project p = store.create_project(project, geometry, frame_count, classes);
      std::cout << "created " << store.project_dir(p.project_id).string() << "\n";
      return 0;
    }
    if (seed->parsed()) {
      const AnnotationSequencePair pair = parse_seed_file(read_text_file(seed_file), seed_file);
      ProjectLock lock = store.lock(project);
      Project p = store.load(project);
      std::vector<AnnotationSequencePair> same_mode = active_pairs(p, pair.seed.mode);
      same_mode.push_back(pair);
      validate_disjoint(same_mode);
      p.pairs.push_back(pair);
      store.save(p);
      std::cout << fmt::format("pair {}: frames {}..{}, {} entries ({})\n", p.pairs.size() - 1,
                               pair.first_frame(), pair.last_frame(), pair.seed.entries.size(),
                               to_string(pair.seed.mode));
      return 0;
    }
    for (const auto& [cmd, last] : stage_apps) {
      if (cmd->parsed()) return run_stage(store, project, overrides, last);
    }
    if (sweep->parsed()) {
      const PipelineConfig config = load_config(store, project, overrides);
      const std::vector<SweepRow> rows =
          ablation_sweep(store, project, config, default_backend_factory(store, project));
      std::vector<EvalReport> table;
      for (const SweepRow& r : rows) table.push_back(r.report);
      std::cout << report_csv(table);
      return 0;
    }
    if (report->parsed()) {
      const fs::path reports = store.project_dir(project) / "reports";
      if (report_id.empty()) {
        const std::optional<std::string> latest = latest_run(reports);
        if (!latest) throw NotFoundError("project has no reports");
        report_id = *latest;
      }
      std::cout << read_text_file(reports / report_id / "report.csv");
      return 0;
    }
    if (serve->parsed()) {
      ApiServer server(fs::path(root), server_options);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << fmt::format("listening on http://{}:{}\n", host, port);
      server.listen(host, port);
      g_server = nullptr;
      return 0;
    }
    if (synth_cmd->parsed()) {
      return synth(store, project, synth_frames, pair_frames, synth_seed, shape);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
