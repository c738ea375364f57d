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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "seedprop/core/annotation.h"
#include "seedprop/core/geometry.h"

namespace seedprop {

enum class Stage { kPropagate, kSegment, kEmit, kTrain, kInfer, kEval };
inline constexpr Stage kAllStages[] = {Stage::kPropagate, Stage::kSegment,
                                       Stage::kEmit,      Stage::kTrain,
                                       Stage::kInfer,     Stage::kEval};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

enum class JobStatus { kPending, kRunning, kDone, kFailed };

std::string_view to_string(JobStatus status);
JobStatus parse_job_status(std::string_view text);

struct JobRecord {
  std::string job_id;
  std::string run_id;
  Stage stage = Stage::kPropagate;
  std::string config_snapshot;  // the exact config text the stage ran with
  JobStatus status = JobStatus::kPending;
  // Wall seconds per stage; only populated once Done or Failed.
  std::map<std::string, double> timings;
  std::string error;

  bool operator==(const JobRecord&) const = default;
};

struct Project {
  std::string project_id;
  ImageGeometry geometry;
  int frame_count = 0;
  std::vector<std::string> class_names;
  std::vector<AnnotationSequencePair> pairs;
  // Pair indices a reviewer sent back for re-seeding; the pipeline skips them.
  std::set<int> flagged_pairs;
  std::vector<JobRecord> job_history;

  // Throws ValidationError on out-of-range class ids or frame indices.
  void validate() const;

  bool operator==(const Project&) const = default;
};

// Unflagged pairs of one seed mode. A new seed must be disjoint from these.
std::vector<AnnotationSequencePair> active_pairs(const Project& project, SelectionMode mode);

// Advisory exclusive lock on a project directory (flock). Released on
// destruction.
class ProjectLock {
 public:
  explicit ProjectLock(const std::filesystem::path& lock_file);
  ~ProjectLock();
  ProjectLock(ProjectLock&& other) noexcept;
  ProjectLock& operator=(ProjectLock&&) = delete;
  ProjectLock(const ProjectLock&) = delete;
  ProjectLock& operator=(const ProjectLock&) = delete;

 private:
  int fd_ = -1;
};

// On-disk layout, one directory per project:
//   manifest  frames/  labels/propagated/  labels/inferred/  datasets/  reports/
class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path project_dir(std::string_view project_id) const;

  Project create_project(const std::string& name, const ImageGeometry& geometry,
                         int frame_count, std::vector<std::string> class_names);
  bool exists(std::string_view project_id) const;
  Project load(std::string_view project_id) const;
  // Validates and atomically rewrites the manifest.
  void save(const Project& project) const;
  std::vector<std::string> list() const;

  // Exclusive advisory lock on the project. Throws NotFoundError when the
  // project directory does not exist.
  ProjectLock lock(std::string_view project_id) const;

  // frames/NNNNNN.<ext>
  std::filesystem::path frames_dir(std::string_view project_id) const;
  std::map<int, std::filesystem::path> frame_files(std::string_view project_id) const;

 private:
  std::filesystem::path root_;
};

}  // namespace seedprop
