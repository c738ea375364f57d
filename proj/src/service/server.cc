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

#include "seedprop/service/server.h"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/service/pipeline.h"
#include "seedprop/store/checksum.h"
#include "seedprop/store/label_io.h"
#include "seedprop/store/serialization.h"

namespace seedprop {
namespace fs = std::filesystem;
namespace {

constexpr char kJsonType[] = "application/json";

Json job_json(const JobState& j) {
  return Json{{"job_id", j.job_id},     {"project_id", j.project_id},
              {"kind", j.kind},         {"status", to_string(j.status)},
              {"run_id", j.run_id},     {"report_id", j.report_id},
              {"timings", j.timings},   {"error", j.error}};
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", kJsonType);
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

std::string content_type_for(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".pgm") return "image/x-portable-graymap";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  return "application/octet-stream";
}

std::string sweep_report_id(const std::vector<SweepRow>& rows) {
  std::string ids;
  for (const SweepRow& r : rows) ids += r.run_id;
  return "sweep-" + sha256_hex(ids).substr(0, 16);
}

}  // namespace

class ApiServer::Impl {
 public:
  Impl(fs::path root, ServerOptions options)
      : store_(std::move(root)), options_(std::move(options)) {
    if (options_.workers < 1) throw ValidationError("server needs at least one worker");
    for (int i = 0; i < options_.workers; ++i) workers_.emplace_back([this] { work(); });
    routes();
  }

  ~Impl() {
    stop();
    {
      std::lock_guard<std::mutex> lock(mu_);
      shutting_down_ = true;
    }
    cv_.notify_all();
    for (std::thread& t : workers_) t.join();
  }

  int start(const std::string& host, int port) {
    const int bound = bind(host, port);
    listener_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
    return bound;
  }

  void listen(const std::string& host, int port) {
    bind(host, port);
    http_.listen_after_bind();
  }

  void stop() {
    http_.stop();
    if (listener_.joinable()) listener_.join();
  }

  std::optional<JobState> job(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

 private:
  int bind(const std::string& host, int port) {
    if (port == 0) {
      const int bound = http_.bind_to_any_port(host);
      if (bound < 0) throw Error("cannot bind " + host);
      return bound;
    }
    if (!http_.bind_to_port(host, port)) throw Error(fmt::format("cannot bind {}:{}", host, port));
    return port;
  }

  // Maps library exceptions onto HTTP status codes.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const NotFoundError& e) {
        send_error(res, 404, e.what());
      } catch (const ParseError& e) {
        send_error(res, 400, e.what());
      } catch (const ValidationError& e) {
        send_error(res, 400, e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  void routes() {
    http_.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (options_.token.empty()) return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == "Bearer " + options_.token) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      send_error(res, 401, "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    });

    http_.Post("/projects", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = Json::parse(req.body);
      const std::string id = body.at("project_id").get<std::string>();
      if (store_.exists(id)) {
        send_error(res, 409, "project '" + id + "' already exists");
        return;
      }
      const ImageGeometry geometry =
          body.contains("geometry") ? body.at("geometry").get<ImageGeometry>() : ImageGeometry{};
      const Project project = store_.create_project(
          id, geometry, body.at("frame_count").get<int>(),
          body.value("class_names", std::vector<std::string>{}));
      send_json(res, 201, Json(project));
    }));

    http_.Get("/projects", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, Json{{"projects", store_.list()}});
    }));

    http_.Get(R"(/projects/([^/]+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, Json(store_.load(req.matches[1].str())));
              }));

    http_.Post(R"(/projects/([^/]+)/frames)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 upload_frames(req, res);
               }));

    http_.Get(R"(/projects/([^/]+)/frames/(\d+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1].str();
                const int frame = std::stoi(req.matches[2].str());
                store_.load(id);
                const auto files = store_.frame_files(id);
                auto it = files.find(frame);
                if (it == files.end()) throw NotFoundError(fmt::format("no frame {}", frame));
                res.status = 200;
                res.set_content(read_text_file(it->second), content_type_for(it->second));
              }));

    http_.Post(R"(/projects/([^/]+)/seeds)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 add_seed(req, res);
               }));

    http_.Get(R"(/projects/([^/]+)/seeds)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Project project = store_.load(req.matches[1].str());
                Json pairs = Json::array();
                for (const AnnotationSequencePair& p : project.pairs) {
                  pairs.push_back(Json::parse(format_seed_file(p)));
                }
                send_json(res, 200,
                          Json{{"version", kSeedFileVersion},
                               {"pairs", pairs},
                               {"flagged", project.flagged_pairs}});
              }));

    http_.Post(R"(/projects/([^/]+)/seeds/(\d+)/flag)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 flag_pair(req, res);
               }));

    http_.Post(R"(/projects/([^/]+)/jobs)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 submit_job(req, res);
               }));

    http_.Get(R"(/jobs/([^/]+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::optional<JobState> state = job(req.matches[1].str());
                if (!state) throw NotFoundError("no job '" + req.matches[1].str() + "'");
                send_json(res, 200, job_json(*state));
              }));

    http_.Get(R"(/projects/([^/]+)/labels/([a-z]+)/(\d+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                get_labels(req, res);
              }));

    http_.Get(R"(/projects/([^/]+)/reports/([A-Za-z0-9_.-]+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1].str();
                const std::string report_id = req.matches[2].str();
                const fs::path dir = store_.project_dir(id) / "reports" / report_id;
                if (report_id.ends_with(".tmp") || !fs::exists(dir / "report.json")) {
                  throw NotFoundError("no report '" + report_id + "'");
                }
                Json body = Json::parse(read_text_file(dir / "report.json"));
                body["report_id"] = report_id;
                body["csv"] = read_text_file(dir / "report.csv");
                if (fs::exists(dir / "throughput.json")) {
                  body["throughput"] = Json::parse(read_text_file(dir / "throughput.json"));
                }
                send_json(res, 200, body);
              }));
  }

  void upload_frames(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1].str();
    const Project project = store_.load(id);
    if (!req.is_multipart_form_data() || req.files.empty()) {
      throw ValidationError("expected a multipart upload with one or more image files");
    }
    Json stored = Json::array();
    for (const auto& [field, file] : req.files) {
      if (field == "index") continue;
      int index = -1;
      if (req.files.count("index") == 1 && req.files.size() == 2) {
        index = std::stoi(req.get_file_value("index").content);
      } else {
        index = parse_frame_stem(fs::path(file.filename).stem().string());
      }
      if (index < 0 || index >= project.frame_count) {
        throw ValidationError(fmt::format("frame {} is outside 0..{}", index, project.frame_count - 1));
      }
      std::string ext = fs::path(file.filename).extension().string();
      if (ext.empty()) ext = ".png";
      const fs::path dir = store_.frames_dir(id);
      // Replace any earlier upload of this frame, whatever its extension.
      for (const auto& [f, path] : store_.frame_files(id)) {
        if (f == index) fs::remove(path);
      }
      write_text_file(dir / (frame_stem(index) + ext), file.content);
      stored.push_back(index);
    }
    send_json(res, 201, Json{{"stored", stored}});
  }

  void add_seed(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1].str();
    const AnnotationSequencePair pair = parse_seed_file(req.body, "request body");
    ProjectLock lock = store_.lock(id);
    Project project = store_.load(id);
    std::vector<AnnotationSequencePair> same_mode = active_pairs(project, pair.seed.mode);
    same_mode.push_back(pair);
    validate_disjoint(same_mode);
    project.pairs.push_back(pair);
    store_.save(project);  // validates frame range and class ids
    send_json(res, 201, Json{{"pair_index", project.pairs.size() - 1}});
  }

  // Review outcome for one pair: flagged pairs wait for a new seed and are
  // left out of pipeline runs.
  void flag_pair(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1].str();
    const int index = std::stoi(req.matches[2].str());
    const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
    const bool flagged = body.value("flagged", true);
    ProjectLock lock = store_.lock(id);
    Project project = store_.load(id);
    if (index < 0 || static_cast<std::size_t>(index) >= project.pairs.size()) {
      throw NotFoundError(fmt::format("project '{}' has no pair {}", id, index));
    }
    if (flagged) {
      project.flagged_pairs.insert(index);
    } else if (project.flagged_pairs.erase(index) > 0) {
      const AnnotationSequencePair& pair = project.pairs[index];
      std::vector<AnnotationSequencePair> same_mode = active_pairs(project, pair.seed.mode);
      validate_disjoint(same_mode);
    }
    store_.save(project);
    send_json(res, 200, Json{{"pair_index", index}, {"flagged", flagged}});
  }

  void get_labels(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1].str();
    const std::optional<Stage> stage = parse_label_stage(req.matches[2].str());
    if (!stage) throw NotFoundError("unknown label stage '" + req.matches[2].str() + "'");
    const int frame = std::stoi(req.matches[3].str());
    store_.load(id);
    std::string run = req.get_param_value("run");
    if (run.empty()) {
      const fs::path stage_dir = store_.project_dir(id) / "labels" / req.matches[2].str();
      const std::optional<std::string> latest = latest_run(stage_dir);
      if (!latest) throw NotFoundError("no committed " + req.matches[2].str() + " labels");
      run = *latest;
    }
    Json body = read_stage_labels(store_, id, *stage, run, frame);
    body["run_id"] = run;
    send_json(res, 200, body);
  }

  void submit_job(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1].str();
    store_.load(id);
    const Json body = Json::parse(req.body);
    const std::string kind = body.at("stage").get<std::string>();
    if (kind != "run" && kind != "sweep") parse_stage(kind);
    // Without an inline config the project's config.json applies.
    const fs::path project_config = store_.project_dir(id) / "config.json";
    const PipelineConfig config =
        body.contains("config")
            ? parse_pipeline_config(body.at("config").dump(), "job config")
        : fs::exists(project_config)
            ? parse_pipeline_config(read_text_file(project_config), project_config.string())
            : parse_pipeline_config("{}", "job config");

    JobState state;
    state.project_id = id;
    state.kind = kind;
    {
      std::lock_guard<std::mutex> lock(mu_);
      state.job_id = fmt::format("job-{}", ++job_counter_);
      jobs_[state.job_id] = state;
      queue_.push_back(Pending{state.job_id, id, kind, config});
    }
    cv_.notify_one();
    send_json(res, 202, job_json(state));
  }

  struct Pending {
    std::string job_id;
    std::string project_id;
    std::string kind;
    PipelineConfig config;
  };

  std::mutex& project_mutex(const std::string& project_id) {
    std::lock_guard<std::mutex> lock(mu_);
    return project_mu_[project_id];
  }

  void update(const std::string& job_id, const std::function<void(JobState&)>& fn) {
    std::lock_guard<std::mutex> lock(mu_);
    fn(jobs_.at(job_id));
  }

  void work() {
    while (true) {
      Pending pending;
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [this] { return shutting_down_ || !queue_.empty(); });
        if (shutting_down_) return;
        pending = std::move(queue_.front());
        queue_.pop_front();
      }
      std::lock_guard<std::mutex> project_lock(project_mutex(pending.project_id));
      update(pending.job_id, [](JobState& s) { s.status = JobStatus::kRunning; });
      try {
        run_job(pending);
      } catch (const std::exception& e) {
        spdlog::error("{} failed: {}", pending.job_id, e.what());
        update(pending.job_id, [&](JobState& s) {
          s.status = JobStatus::kFailed;
          s.error = e.what();
        });
      }
    }
  }

  void run_job(const Pending& pending) {
    const BackendFactory factory = default_backend_factory(store_, pending.project_id);
    if (pending.kind == "sweep") {
      const std::vector<SweepRow> rows =
          ablation_sweep(store_, pending.project_id, pending.config, factory);
      update(pending.job_id, [&](JobState& s) {
        s.status = JobStatus::kDone;
        s.report_id = sweep_report_id(rows);
      });
      return;
    }
    const Stage last = pending.kind == "run" ? Stage::kEval : parse_stage(pending.kind);
    Pipeline pipeline(store_, pending.project_id, pending.config, factory);
    update(pending.job_id, [&](JobState& s) { s.run_id = pipeline.run_id(); });
    const PipelineResult result = pipeline.run(last);
    update(pending.job_id, [&](JobState& s) {
      s.status = JobStatus::kDone;
      for (const JobRecord& r : result.records) {
        for (const auto& [k, v] : r.timings) s.timings[k] = v;
      }
      if (pipeline.committed(Stage::kEval) && last == Stage::kEval) s.report_id = result.run_id;
    });
  }

  ProjectStore store_;
  ServerOptions options_;
  httplib::Server http_;
  std::thread listener_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool shutting_down_ = false;
  std::size_t job_counter_ = 0;
  std::map<std::string, JobState> jobs_;
  std::deque<Pending> queue_;
  std::map<std::string, std::mutex> project_mu_;
  std::vector<std::thread> workers_;
};

ApiServer::ApiServer(fs::path root, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(root), std::move(options))) {}

ApiServer::~ApiServer() = default;

int ApiServer::start(const std::string& host, int port) { return impl_->start(host, port); }

void ApiServer::listen(const std::string& host, int port) { impl_->listen(host, port); }

void ApiServer::stop() { impl_->stop(); }

std::optional<JobState> ApiServer::job(const std::string& job_id) const {
  return impl_->job(job_id);
}

}  // namespace seedprop
