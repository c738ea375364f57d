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

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <sys/types.h>

#include "seedprop/detector/detector.h"
#include "seedprop/propagation/tracker_backend.h"
#include "seedprop/segfit/segmenter_backend.h"
#include "seedprop/store/serialization.h"

namespace seedprop {

// A child process whose stdin and stdout are one end of a local socket
// pair. stderr is inherited.
class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  void write_line(const std::string& line);
  // Throws BackendError on timeout or when the child closes its output.
  std::string read_line(double timeout_seconds);

  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

// Request/response client over a ChildProcess. Calls are serialized.
class WireClient {
 public:
  WireClient(const std::vector<std::string>& argv, double timeout_seconds);

  const BackendInfo& info() const { return info_; }
  Json call(const Json& request);

 private:
  std::mutex mu_;
  ChildProcess child_;
  double timeout_seconds_;
  BackendInfo info_;
  bool broken_ = false;
};

class ProcessTracker final : public TrackerBackend {
 public:
  ProcessTracker(const std::vector<std::string>& argv, double timeout_seconds);
  BackendInfo info() override { return client_.info(); }
  TrackResponse track(const TrackRequest& request) override;

 private:
  WireClient client_;
};

class ProcessSegmenter final : public SegmenterBackend {
 public:
  ProcessSegmenter(const std::vector<std::string>& argv, double timeout_seconds);
  BackendInfo info() override { return client_.info(); }
  SegmentResponse segment(const SegmentRequest& request) override;

 private:
  WireClient client_;
};

class ProcessDetector final : public DetectorBackend {
 public:
  ProcessDetector(const std::vector<std::string>& argv, double timeout_seconds);
  BackendInfo info() override { return client_.info(); }
  TrainResponse train(const TrainRequest& request) override;
  InferResponse infer(const InferRequest& request) override;

 private:
  WireClient client_;
};

}  // namespace seedprop
