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

#include "seedprop/service/pipeline.h"

#include <chrono>
#include <future>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/dataset/dataset.h"
#include "seedprop/propagation/propagate.h"
#include "seedprop/segfit/segment_fit.h"
#include "seedprop/store/checksum.h"
#include "seedprop/store/label_io.h"
#include "seedprop/store/serialization.h"

namespace seedprop {
namespace fs = std::filesystem;

StageError::StageError(Stage stage, const std::string& cause)
    : Error(fmt::format("{} stage failed: {}", to_string(stage), cause)),
      stage_(stage),
      cause_(cause) {}

namespace {

constexpr char kTracksFile[] = "tracks.json";
constexpr char kLabelsFile[] = "labels.json";

// Builds a stage output in `<target>.tmp` and renames it into place.
template <typename Fn>
void commit_dir(const fs::path& target, Fn build) {
  fs::path tmp = target;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  build(tmp);
  fs::rename(tmp, target);
}

Json labels_json(const std::vector<FrameLabels>& frames) {
  Json j;
  j["version"] = 1;
  j["frames"] = frames;
  return j;
}

std::vector<FrameLabels> read_labels_json(const fs::path& path) {
  const Json j = Json::parse(read_text_file(path));
  return j.at("frames").get<std::vector<FrameLabels>>();
}

void write_frame_files(const fs::path& dir, const std::vector<FrameLabels>& frames) {
  bool any_polygon = false;
  for (const FrameLabels& f : frames) any_polygon = any_polygon || !f.polygons.empty();
  if (any_polygon) fs::create_directories(dir / "polygons");
  for (const FrameLabels& f : frames) {
    write_box_file(dir / (frame_stem(f.frame_index) + ".txt"), f.boxes);
    if (any_polygon) {
      write_polygon_file(dir / "polygons" / (frame_stem(f.frame_index) + ".txt"), f.polygons);
    }
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void upsert_record(const ProjectStore& store, const std::string& project_id,
                   const JobRecord& record) {
  ProjectLock lock = store.lock(project_id);
  Project project = store.load(project_id);
  auto it = std::find_if(project.job_history.begin(), project.job_history.end(),
                         [&](const JobRecord& r) { return r.job_id == record.job_id; });
  if (it == project.job_history.end()) {
    project.job_history.push_back(record);
  } else {
    *it = record;
  }
  store.save(project);
}

}  // namespace

Pipeline::Pipeline(const ProjectStore& store, std::string project_id, PipelineConfig config,
                   BackendFactory factory)
    : store_(store),
      project_id_(std::move(project_id)),
      config_(std::move(config)),
      factory_(std::move(factory)) {
  config_.validate();
  project_ = store_.load(project_id_);
  dir_ = store_.project_dir(project_id_);
  for (std::size_t i = 0; i < project_.pairs.size(); ++i) {
    const AnnotationSequencePair& pair = project_.pairs[i];
    if (project_.flagged_pairs.contains(static_cast<int>(i))) {
      spdlog::info("pair {} is flagged for re-seeding; skipped", i);
      continue;
    }
    if (pair.seed.mode == config_.mode) pairs_.push_back(pair);
  }
  std::sort(pairs_.begin(), pairs_.end(),
            [](const auto& a, const auto& b) { return a.first_frame() < b.first_frame(); });
  Json pairs_json = pairs_;
  run_id_ = sha256_hex(config_.to_text() + pairs_json.dump()).substr(0, 16);
}

fs::path Pipeline::output_path(Stage stage) const {
  switch (stage) {
    case Stage::kPropagate: return dir_ / "labels" / "propagated" / run_id_;
    case Stage::kSegment: return dir_ / "labels" / "segmented" / run_id_;
    case Stage::kEmit: return dir_ / "datasets" / run_id_;
    case Stage::kTrain: return dir_ / "models" / (run_id_ + ".json");
    case Stage::kInfer: return dir_ / "labels" / "inferred" / run_id_;
    case Stage::kEval: return dir_ / "reports" / run_id_;
  }
  throw ValidationError("unknown stage");
}

bool Pipeline::committed(Stage stage) const { return fs::exists(output_path(stage)); }

Backends& Pipeline::backends() {
  if (!backends_) backends_ = factory_(config_);
  return *backends_;
}

std::string Pipeline::frame_path(int frame) const {
  auto it = frames_.find(frame);
  if (it == frames_.end()) {
    throw NotFoundError(fmt::format("project '{}' has no image for frame {}", project_id_, frame));
  }
  return it->second.string();
}

std::vector<int> Pipeline::infer_frames() const {
  if (!config_.infer_frames.empty()) return config_.infer_frames;
  std::vector<int> all(project_.frame_count);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

PipelineResult Pipeline::run(Stage last) {
  if (project_.pairs.empty()) {
    throw ValidationError(fmt::format("project '{}' has no annotation-sequence pairs", project_id_));
  }
  if (pairs_.empty()) {
    throw ValidationError(fmt::format("project '{}' has no {} seed pairs", project_id_,
                                      to_string(config_.mode)));
  }
  validate_disjoint(pairs_);
  if (last == Stage::kEval && !config_.ground_truth) {
    throw ValidationError("the eval stage needs a ground_truth source in the config");
  }
  for (int f : config_.infer_frames) {
    if (f >= project_.frame_count) {
      throw ValidationError(fmt::format("infer frame {} is past the last frame", f));
    }
  }

  // One chain per project at a time.
  ProjectLock chain_lock(dir_ / ".run.lock");
  frames_ = store_.frame_files(project_id_);

  PipelineResult result;
  result.run_id = run_id_;
  const std::string snapshot = config_.to_text();
  for (Stage stage : kAllStages) {
    if (committed(stage)) {
      result.skipped.push_back(stage);
    } else {
      const Project current = store_.load(project_id_);
      int attempt = 1;
      for (const JobRecord& r : current.job_history) {
        if (r.run_id == run_id_ && r.stage == stage) ++attempt;
      }
      JobRecord record;
      record.job_id = fmt::format("{}-{}-{}", run_id_, to_string(stage), attempt);
      record.run_id = run_id_;
      record.stage = stage;
      record.config_snapshot = snapshot;
      record.status = JobStatus::kRunning;
      upsert_record(store_, project_id_, record);

      const auto start = std::chrono::steady_clock::now();
      try {
        execute(stage);
      } catch (const std::exception& e) {
        record.status = JobStatus::kFailed;
        record.timings[std::string(to_string(stage))] = seconds_since(start);
        record.error = e.what();
        upsert_record(store_, project_id_, record);
        spdlog::error("run {}: {} failed: {}", run_id_, to_string(stage), e.what());
        throw StageError(stage, e.what());
      }
      record.status = JobStatus::kDone;
      record.timings[std::string(to_string(stage))] = seconds_since(start);
      upsert_record(store_, project_id_, record);
      result.records.push_back(record);
    }
    if (stage == last) break;
  }

  if (committed(Stage::kEval) && static_cast<int>(last) >= static_cast<int>(Stage::kEval)) {
    const std::vector<EvalReport> rows =
        parse_report_json(read_text_file(output_path(Stage::kEval) / "report.json"));
    if (!rows.empty()) result.report = rows.front();
  }
  return result;
}

void Pipeline::execute(Stage stage) {
  switch (stage) {
    case Stage::kPropagate: return run_propagate();
    case Stage::kSegment: return run_segment();
    case Stage::kEmit: return run_emit();
    case Stage::kTrain: return run_train();
    case Stage::kInfer: return run_infer();
    case Stage::kEval: return run_eval();
  }
}

void Pipeline::run_propagate() {
  TrackerBackend& tracker = *backends().tracker;
  FramePathFn path_fn = [this](int f) { return frame_path(f); };
  std::vector<std::future<TrackSet>> jobs;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      PropagationOptions options{fmt::format("{}-propagate-{}", run_id_, i), config_.chunk_length};
      return propagate_pair(pairs_[i], tracker, config_.filter, project_.geometry, path_fn,
                            options);
    }));
  }
  std::vector<TrackSet> tracks;
  std::exception_ptr failure;
  for (auto& job : jobs) {
    try {
      tracks.push_back(job.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<FrameLabels> frames;
  for (const TrackSet& t : tracks) {
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      frames.push_back(FrameLabels{t.frames[i].frame_index, t.frames[i].label_boxes(), {},
                                   i == 0 ? Provenance::kManual : Provenance::kPropagated});
    }
  }
  commit_dir(output_path(Stage::kPropagate), [&](const fs::path& tmp) {
    Json j;
    j["version"] = 1;
    j["pairs"] = tracks;
    write_text_file(tmp / kTracksFile, j.dump() + "\n");
    write_text_file(tmp / kLabelsFile, labels_json(frames).dump() + "\n");
    write_frame_files(tmp, frames);
  });
}

void Pipeline::run_segment() {
  const Json j = Json::parse(read_text_file(output_path(Stage::kPropagate) / kTracksFile));
  const std::vector<TrackSet> tracks = j.at("pairs").get<std::vector<TrackSet>>();
  SegmenterBackend* segmenter = config_.segfit.enabled ? backends().segmenter.get() : nullptr;
  FramePathFn path_fn = [this](int f) { return frame_path(f); };
  std::vector<FrameLabels> frames;
  SegfitStats stats;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    std::vector<FrameLabels> fitted =
        segment_and_fit(tracks[i], segmenter, config_.segfit, project_.geometry, path_fn,
                        fmt::format("{}-segment-{}", run_id_, i), &stats);
    frames.insert(frames.end(), fitted.begin(), fitted.end());
  }
  if (stats.fallbacks > 0 || stats.fragment_losses > 0) {
    spdlog::info("run {}: {} prompt-box fallbacks, {} masks lost fragments", run_id_,
                 stats.fallbacks.load(), stats.fragment_losses.load());
  }
  commit_dir(output_path(Stage::kSegment), [&](const fs::path& tmp) {
    write_text_file(tmp / kLabelsFile, labels_json(frames).dump() + "\n");
    write_frame_files(tmp, frames);
  });
}

void Pipeline::run_emit() {
  const std::vector<FrameLabels> labels =
      read_labels_json(output_path(Stage::kSegment) / kLabelsFile);
  std::vector<DatasetFrame> frames;
  for (const FrameLabels& l : labels) frames.push_back(DatasetFrame{l, frame_path(l.frame_index)});
  DatasetSpec spec;
  spec.variant = config_.variant;
  spec.pairs = pairs_;
  spec.train_fraction = config_.train_fraction;
  spec.tag = config_.tag();
  spec.config_hash = config_.hash();
  commit_dir(output_path(Stage::kEmit), [&](const fs::path& tmp) {
    emit_dataset(tmp, frames, project_.class_names, spec);
  });
}

void Pipeline::run_train() {
  TrainSpec spec = config_.train;
  spec.dataset = output_path(Stage::kEmit);
  const TrainResult trained = train(spec, project_.class_names, *backends().detector,
                                    fmt::format("{}-train", run_id_));
  Json j{{"version", 1},
         {"model_token", trained.model_token},
         {"dataset", spec.dataset.string()},
         {"backend_seconds", trained.backend_seconds},
         {"wall_seconds", trained.wall_seconds}};
  write_text_file(output_path(Stage::kTrain), j.dump(2) + "\n");
}

void Pipeline::run_infer() {
  const Json model = Json::parse(read_text_file(output_path(Stage::kTrain)));
  const std::string token = model.at("model_token").get<std::string>();
  const std::vector<int> frames = infer_frames();
  FramePathFn path_fn = [this](int f) { return frame_path(f); };
  const DetectionMap detections = infer(token, frames, path_fn, project_.geometry, config_.train,
                                        *backends().detector, fmt::format("{}-infer", run_id_));
  commit_dir(output_path(Stage::kInfer),
             [&](const fs::path& tmp) { write_detections(tmp, detections); });
}

void Pipeline::run_eval() {
  fs::path gt_path(config_.ground_truth->path);
  if (gt_path.is_relative()) gt_path = dir_ / gt_path;
  FrameLabelMap gt = load_ground_truth(gt_path, config_.ground_truth->format, project_.geometry,
                                       project_.class_names.size());
  // Only the inferred frames are scored.
  const std::vector<int> frames = infer_frames();
  const std::set<int> wanted(frames.begin(), frames.end());
  for (auto it = gt.begin(); it != gt.end();) {
    it = wanted.contains(it->first) ? std::next(it) : gt.erase(it);
  }
  for (int f : frames) gt.try_emplace(f, FrameLabels{f, {}, {}, Provenance::kManual});
  const DetectionMap detections =
      read_detections(output_path(Stage::kInfer), project_.class_names.size());

  EvalReport report = evaluate(gt, detections, config_.match);
  report.method = config_.tag().label();

  // Stage timings of this run so far, for the throughput table.
  const Project current = store_.load(project_id_);
  std::map<Stage, double> seconds;
  for (const JobRecord& r : current.job_history) {
    if (r.run_id != run_id_ || r.status != JobStatus::kDone) continue;
    for (const auto& [_, s] : r.timings) seconds[r.stage] = s;
  }
  std::vector<StageTiming> timings;
  for (const auto& [stage, s] : seconds) timings.push_back(StageTiming{std::string(to_string(stage)), s});
  const ThroughputReport throughput = throughput_report(timings, frames.size());
  const AnnotationRatio ratio{pairs_.size(), frames.size()};

  commit_dir(output_path(Stage::kEval), [&](const fs::path& tmp) {
    const std::vector<EvalReport> rows{report};
    write_text_file(tmp / "report.json", report_json(rows));
    write_text_file(tmp / "report.csv", report_csv(rows));
    Json t;
    t["version"] = 1;
    Json stages = Json::array();
    for (const StageTiming& s : throughput.stages) {
      stages.push_back(Json{{"stage", s.stage}, {"seconds", s.seconds}});
    }
    t["stages"] = std::move(stages);
    t["total_seconds"] = throughput.total_seconds;
    t["total_frames"] = throughput.total_frames;
    t["fps"] = throughput.fps;
    t["annotation_ratio"] = ratio.display();
    t["tag"] = config_.tag().label();
    t["config_hash"] = config_.hash();
    write_text_file(tmp / "throughput.json", t.dump(2) + "\n");
  });
  report_ = report;
}

BackendFactory default_backend_factory(const ProjectStore& store, const std::string& project_id) {
  const fs::path dir = store.project_dir(project_id);
  const ImageGeometry geometry = store.load(project_id).geometry;
  return [dir, geometry](const PipelineConfig& config) {
    return make_backends(config, geometry, dir);
  };
}

std::optional<Stage> parse_label_stage(std::string_view name) {
  if (name == "propagated") return Stage::kPropagate;
  if (name == "segmented") return Stage::kSegment;
  if (name == "inferred") return Stage::kInfer;
  return std::nullopt;
}

std::optional<std::string> latest_run(const fs::path& stage_dir) {
  if (!fs::is_directory(stage_dir)) return std::nullopt;
  std::optional<std::string> best;
  fs::file_time_type best_time;
  for (const fs::directory_entry& e : fs::directory_iterator(stage_dir)) {
    const std::string name = e.path().filename().string();
    if (!e.is_directory() || name.ends_with(".tmp")) continue;
    const fs::file_time_type t = e.last_write_time();
    if (!best || t > best_time || (t == best_time && name > *best)) {
      best = name;
      best_time = t;
    }
  }
  return best;
}

FrameLabels read_stage_labels(const ProjectStore& store, const std::string& project_id,
                              Stage stage, const std::string& run_id, int frame) {
  const fs::path dir = store.project_dir(project_id);
  const std::string_view sub = stage == Stage::kPropagate ? "propagated"
                               : stage == Stage::kSegment ? "segmented"
                               : stage == Stage::kInfer   ? "inferred"
                                                          : "";
  if (sub.empty()) throw ValidationError("stage has no per-frame labels");
  const fs::path run_dir = dir / "labels" / std::string(sub) / run_id;
  if (!fs::is_directory(run_dir)) throw NotFoundError("no committed run '" + run_id + "'");
  if (stage == Stage::kInfer) {
    const fs::path file = run_dir / (frame_stem(frame) + ".txt");
    if (!fs::exists(file)) throw NotFoundError(fmt::format("no inferred labels for frame {}", frame));
    FrameLabels labels{frame, {}, {}, Provenance::kInferred};
    const DetectionMap dets = read_detections(run_dir);
    for (const Detection& d : dets.at(frame)) labels.boxes.push_back(d.box);
    return labels;
  }
  for (FrameLabels& labels : read_labels_json(run_dir / kLabelsFile)) {
    if (labels.frame_index == frame) return labels;
  }
  throw NotFoundError(fmt::format("no {} labels for frame {}", sub, frame));
}

std::vector<SweepRow> ablation_sweep(const ProjectStore& store, const std::string& project_id,
                                     const PipelineConfig& base, const BackendFactory& factory) {
  const Project project = store.load(project_id);
  if (project.pairs.empty()) {
    throw ValidationError(fmt::format("project '{}' has no annotation-sequence pairs", project_id));
  }
  // Pair windows keyed by (first frame, frame count).
  std::map<std::pair<int, int>, std::set<SelectionMode>> windows;
  for (std::size_t i = 0; i < project.pairs.size(); ++i) {
    if (project.flagged_pairs.contains(static_cast<int>(i))) continue;
    const AnnotationSequencePair& p = project.pairs[i];
    windows[{p.first_frame(), p.frame_count}].insert(p.seed.mode);
  }
  for (const auto& [window, modes] : windows) {
    for (SelectionMode mode : {SelectionMode::kFixedBox, SelectionMode::kVariableBox}) {
      if (!modes.contains(mode)) {
        throw ValidationError(fmt::format("pair at frame {} ({} frames) has no {} seed",
                                          window.first, window.second, to_string(mode)));
      }
    }
  }

  std::vector<SweepRow> rows;
  for (const AblationTag& tag : ablation_grid()) {
    PipelineConfig config = base;
    config.mode = tag.mode;
    config.segfit.enabled = tag.segment_fit;
    config.filter.enabled = tag.positional_filter;
    Pipeline pipeline(store, project_id, config, factory);
    PipelineResult result = pipeline.run(Stage::kEval);
    rows.push_back(SweepRow{tag, result.run_id, *result.report});
  }

  std::vector<EvalReport> table;
  std::string ids;
  for (const SweepRow& r : rows) {
    table.push_back(r.report);
    ids += r.run_id;
  }
  const fs::path out =
      store.project_dir(project_id) / "reports" / ("sweep-" + sha256_hex(ids).substr(0, 16));
  if (!fs::exists(out)) {
    commit_dir(out, [&](const fs::path& tmp) {
      write_text_file(tmp / "report.json", report_json(table));
      write_text_file(tmp / "report.csv", report_csv(table));
    });
  }
  return rows;
}

}  // namespace seedprop
