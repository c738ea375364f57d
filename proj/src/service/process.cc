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

#include "seedprop/service/process.h"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "seedprop/core/error.h"
#include "seedprop/service/wire.h"

namespace seedprop {

ChildProcess::ChildProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw ValidationError("backend command is empty");
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw BackendError(std::string("socketpair: ") + std::strerror(errno));
  }
  std::vector<char*> args;
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw BackendError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    // dup2 clears close-on-exec on the duplicates.
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const char msg[] = "seedprop: exec of backend command failed\n";
    [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof(msg) - 1);
    ::_exit(127);
  }
  ::close(fds[1]);
  fd_ = fds[0];
}

ChildProcess::~ChildProcess() {
  if (fd_ >= 0) ::close(fd_);
  if (pid_ <= 0) return;
  // Closing our end is the shutdown signal; give the child a moment.
  for (int i = 0; i < 50; ++i) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  int status = 0;
  ::waitpid(pid_, &status, 0);
}

void ChildProcess::write_line(const std::string& line) {
  std::string data = line;
  data.push_back('\n');
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BackendError(std::string("backend write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string ChildProcess::read_line(double timeout_seconds) {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_seconds));
  while (true) {
    const std::size_t newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw BackendError("backend timed out");
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw BackendError(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[1 << 16];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BackendError(std::string("backend read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw BackendError("backend closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

WireClient::WireClient(const std::vector<std::string>& argv, double timeout_seconds)
    : child_(argv), timeout_seconds_(timeout_seconds) {
  try {
    info_ = wire::decode_handshake(Json::parse(child_.read_line(timeout_seconds_)));
  } catch (const Json::exception& e) {
    throw BackendError(std::string("bad handshake: ") + e.what());
  }
}

Json WireClient::call(const Json& request) {
  std::lock_guard<std::mutex> lock(mu_);
  if (broken_) throw BackendError("backend channel is unusable after an earlier failure");
  std::string line;
  try {
    child_.write_line(request.dump());
    line = child_.read_line(timeout_seconds_);
  } catch (const BackendError&) {
    // A late answer would pair with the wrong request.
    broken_ = true;
    throw;
  }
  try {
    return Json::parse(line);
  } catch (const Json::exception& e) {
    throw BackendError(std::string("unparseable backend response: ") + e.what());
  }
}

namespace {

// Decoding errors in a response are protocol errors.
template <typename Fn>
auto decode_or_throw(Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw BackendError(std::string("malformed backend response: ") + e.what());
  }
}

}  // namespace

ProcessTracker::ProcessTracker(const std::vector<std::string>& argv, double timeout_seconds)
    : client_(argv, timeout_seconds) {}

TrackResponse ProcessTracker::track(const TrackRequest& request) {
  const Json response = client_.call(wire::encode(request));
  return decode_or_throw([&] { return wire::decode_track_response(response); });
}

ProcessSegmenter::ProcessSegmenter(const std::vector<std::string>& argv,
                                   double timeout_seconds)
    : client_(argv, timeout_seconds) {}

SegmentResponse ProcessSegmenter::segment(const SegmentRequest& request) {
  const Json response = client_.call(wire::encode(request));
  return decode_or_throw([&] { return wire::decode_segment_response(response); });
}

ProcessDetector::ProcessDetector(const std::vector<std::string>& argv, double timeout_seconds)
    : client_(argv, timeout_seconds) {}

TrainResponse ProcessDetector::train(const TrainRequest& request) {
  const Json response = client_.call(wire::encode(request));
  return decode_or_throw([&] { return wire::decode_train_response(response); });
}

InferResponse ProcessDetector::infer(const InferRequest& request) {
  const Json response = client_.call(wire::encode(request));
  return decode_or_throw([&] { return wire::decode_infer_response(response); });
}

}  // namespace seedprop
