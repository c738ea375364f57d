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

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <regex>
#include <system_error>

#include "seedprop/core/error.h"
#include "seedprop/store/label_io.h"
#include "seedprop/store/project.h"
#include "seedprop/store/serialization.h"

namespace seedprop {
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest";
constexpr const char* kLockName = ".lock";

void check_project_id(std::string_view id) {
  static const std::regex kPattern("[A-Za-z0-9][A-Za-z0-9_.-]{0,63}");
  if (!std::regex_match(id.begin(), id.end(), kPattern) ||
      id.find("..") != std::string_view::npos) {
    throw ValidationError("invalid project id '" + std::string(id) + "'");
  }
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kPropagate:
      return "propagate";
    case Stage::kSegment:
      return "segment";
    case Stage::kEmit:
      return "emit";
    case Stage::kTrain:
      return "train";
    case Stage::kInfer:
      return "infer";
    case Stage::kEval:
      return "eval";
  }
  return "propagate";
}

Stage parse_stage(std::string_view text) {
  for (Stage stage : kAllStages) {
    if (to_string(stage) == text) return stage;
  }
  throw ValidationError("unknown stage '" + std::string(text) + "'");
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::kPending:
      return "pending";
    case JobStatus::kRunning:
      return "running";
    case JobStatus::kDone:
      return "done";
    case JobStatus::kFailed:
      return "failed";
  }
  return "pending";
}

JobStatus parse_job_status(std::string_view text) {
  for (JobStatus s : {JobStatus::kPending, JobStatus::kRunning, JobStatus::kDone,
                      JobStatus::kFailed}) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown job status '" + std::string(text) + "'");
}

std::vector<AnnotationSequencePair> active_pairs(const Project& project, SelectionMode mode) {
  std::vector<AnnotationSequencePair> out;
  for (std::size_t i = 0; i < project.pairs.size(); ++i) {
    if (project.flagged_pairs.contains(static_cast<int>(i))) continue;
    if (project.pairs[i].seed.mode == mode) out.push_back(project.pairs[i]);
  }
  return out;
}

void Project::validate() const {
  check_project_id(project_id);
  geometry.validate();
  if (frame_count < 1) throw ValidationError("project needs at least one frame");
  const auto num_classes = static_cast<int>(class_names.size());
  for (const AnnotationSequencePair& pair : pairs) {
    pair.validate();
    if (pair.last_frame() >= frame_count) {
      throw ValidationError("pair starting at frame " +
                            std::to_string(pair.first_frame()) +
                            " runs past the last frame " +
                            std::to_string(frame_count - 1));
    }
    for (const SeedEntry& entry : pair.seed.entries) {
      if (entry.class_id >= num_classes) {
        throw ValidationError("class id " + std::to_string(entry.class_id) +
                              " has no class name");
      }
    }
  }
  for (int index : flagged_pairs) {
    if (index < 0 || static_cast<std::size_t>(index) >= pairs.size()) {
      throw ValidationError("flagged pair " + std::to_string(index) + " does not exist");
    }
  }
  for (const JobRecord& job : job_history) {
    const bool finished = job.status == JobStatus::kDone || job.status == JobStatus::kFailed;
    if (!finished && !job.timings.empty()) {
      throw ValidationError("job " + job.job_id + " has timings but is not finished");
    }
  }
}

ProjectLock::ProjectLock(const fs::path& lock_file) {
  fd_ = ::open(lock_file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error("cannot open lock file " + lock_file.string() + ": " +
                std::strerror(errno));
  }
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      ::close(fd_);
      throw Error("cannot lock " + lock_file.string());
    }
  }
}

ProjectLock::ProjectLock(ProjectLock&& other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

ProjectLock::~ProjectLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {}

fs::path ProjectStore::project_dir(std::string_view project_id) const {
  check_project_id(project_id);
  return root_ / std::string(project_id);
}

Project ProjectStore::create_project(const std::string& name,
                                     const ImageGeometry& geometry, int frame_count,
                                     std::vector<std::string> class_names) {
  Project project;
  project.project_id = name;
  project.geometry = geometry;
  project.frame_count = frame_count;
  project.class_names = std::move(class_names);
  if (project.class_names.empty()) project.class_names.push_back("object");
  project.validate();

  const fs::path dir = project_dir(name);
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::create_directory(dir, ec)) {
    if (ec) throw Error("cannot create project directory " + dir.string() + ": " + ec.message());
    throw ValidationError("project '" + name + "' already exists");
  }
  for (const char* sub : {"frames", "labels/propagated", "labels/segmented",
                          "labels/inferred", "datasets", "models", "reports"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw Error("cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  save(project);
  return project;
}

bool ProjectStore::exists(std::string_view project_id) const {
  return fs::exists(project_dir(project_id) / kManifestName);
}

Project ProjectStore::load(std::string_view project_id) const {
  const fs::path manifest = project_dir(project_id) / kManifestName;
  if (!fs::exists(manifest)) {
    throw NotFoundError("no project '" + std::string(project_id) + "'");
  }
  try {
    Project project = Json::parse(read_text_file(manifest)).get<Project>();
    project.validate();
    return project;
  } catch (const Json::exception& e) {
    throw ParseError(manifest.string(), 0, e.what());
  }
}

void ProjectStore::save(const Project& project) const {
  project.validate();
  write_text_file(project_dir(project.project_id) / kManifestName,
                  Json(project).dump(2) + "\n");
}

std::vector<std::string> ProjectStore::list() const {
  std::vector<std::string> ids;
  if (!fs::exists(root_)) return ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / kManifestName)) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

ProjectLock ProjectStore::lock(std::string_view project_id) const {
  const fs::path dir = project_dir(project_id);
  if (!fs::is_directory(dir)) {
    throw NotFoundError("no project '" + std::string(project_id) + "'");
  }
  return ProjectLock(dir / kLockName);
}

fs::path ProjectStore::frames_dir(std::string_view project_id) const {
  return project_dir(project_id) / "frames";
}

std::map<int, fs::path> ProjectStore::frame_files(std::string_view project_id) const {
  std::map<int, fs::path> files;
  const fs::path dir = frames_dir(project_id);
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    try {
      files[parse_frame_stem(entry.path().stem().string())] = entry.path();
    } catch (const ParseError&) {
      // not a frame file
    }
  }
  return files;
}

}  // namespace seedprop
