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
#include <memory>
#include <optional>
#include <string>

#include "seedprop/store/project.h"

namespace seedprop {

struct ServerOptions {
  // When set, every request needs "Authorization: Bearer <token>".
  std::string token;
  int workers = 2;
};

// Status of an asynchronous job started through POST /projects/{id}/jobs.
struct JobState {
  std::string job_id;
  std::string project_id;
  std::string kind;  // a stage name, "run" or "sweep"
  JobStatus status = JobStatus::kPending;
  std::string run_id;
  std::string report_id;
  std::map<std::string, double> timings;
  std::string error;
};

// HTTP API for the annotation UI. Routes:
//   POST /projects                         GET /projects, GET /projects/{id}
//   POST /projects/{id}/frames (multipart) GET /projects/{id}/frames/{n}
//   POST /projects/{id}/seeds              GET /projects/{id}/seeds
//   POST /projects/{id}/seeds/{n}/flag     body {"flagged": bool}, default true
//   POST /projects/{id}/jobs               GET /jobs/{job_id}
//     body {"stage": <stage>|"run"|"sweep", "config": {...}}; without
//     "config" the project's config.json is used
//   GET /projects/{id}/labels/{stage}/{frame}[?run=<run_id>]
//   GET /projects/{id}/reports/{report_id}
// Jobs for one project run one at a time, in submission order.
class ApiServer {
 public:
  ApiServer(std::filesystem::path root, ServerOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  std::optional<JobState> job(const std::string& job_id) const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace seedprop
