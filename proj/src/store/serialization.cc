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

#include "seedprop/store/serialization.h"

#include <string>

#include "seedprop/core/error.h"

namespace seedprop {

void to_json(Json& j, const ImageGeometry& g) {
  j = Json{{"width_px", g.width_px}, {"height_px", g.height_px}};
}
void from_json(const Json& j, ImageGeometry& g) {
  j.at("width_px").get_to(g.width_px);
  j.at("height_px").get_to(g.height_px);
}

void to_json(Json& j, const NormBox& b) {
  j = Json{{"class_id", b.class_id}, {"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}};
}
void from_json(const Json& j, NormBox& b) {
  b.class_id = j.value("class_id", 0);
  j.at("cx").get_to(b.cx);
  j.at("cy").get_to(b.cy);
  j.at("w").get_to(b.w);
  j.at("h").get_to(b.h);
}

void to_json(Json& j, const PixelBox& b) {
  j = Json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}
void from_json(const Json& j, PixelBox& b) {
  j.at("x_min").get_to(b.x_min);
  j.at("y_min").get_to(b.y_min);
  j.at("x_max").get_to(b.x_max);
  j.at("y_max").get_to(b.y_max);
}

void to_json(Json& j, const Point2& p) { j = Json::array({p.x, p.y}); }
void from_json(const Json& j, Point2& p) {
  j.at(0).get_to(p.x);
  j.at(1).get_to(p.y);
}

void to_json(Json& j, const SeedAnnotation& s) {
  j = Json::object();
  j["frame_index"] = s.frame_index;
  j["mode"] = std::string(to_string(s.mode));
  if (s.fixed_dims) j["fixed_dims"] = Json{{"w", s.fixed_dims->w}, {"h", s.fixed_dims->h}};
  Json entries = Json::array();
  for (const SeedEntry& e : s.entries) {
    Json entry{{"class_id", e.class_id}, {"cx", e.center.x}, {"cy", e.center.y}};
    if (e.extent) {
      entry["w"] = e.extent->w;
      entry["h"] = e.extent->h;
    }
    entries.push_back(std::move(entry));
  }
  j["entries"] = std::move(entries);
}
void from_json(const Json& j, SeedAnnotation& s) {
  j.at("frame_index").get_to(s.frame_index);
  s.mode = parse_selection_mode(j.at("mode").get<std::string>());
  s.fixed_dims.reset();
  if (j.contains("fixed_dims") && !j.at("fixed_dims").is_null()) {
    const Json& d = j.at("fixed_dims");
    s.fixed_dims = NormSize{d.at("w").get<double>(), d.at("h").get<double>()};
  }
  s.entries.clear();
  for (const Json& e : j.at("entries")) {
    SeedEntry entry;
    entry.class_id = e.value("class_id", 0);
    entry.center = Point2{e.at("cx").get<double>(), e.at("cy").get<double>()};
    if (e.contains("w") || e.contains("h")) {
      entry.extent = NormSize{e.at("w").get<double>(), e.at("h").get<double>()};
    }
    s.entries.push_back(entry);
  }
}

void to_json(Json& j, const AnnotationSequencePair& p) {
  to_json(j, p.seed);
  Json out = Json::object();
  out["frame_index"] = p.seed.frame_index;
  out["frame_count"] = p.frame_count;
  for (auto& [key, value] : j.items()) {
    if (key != "frame_index") out[key] = value;
  }
  j = std::move(out);
}
void from_json(const Json& j, AnnotationSequencePair& p) {
  from_json(j, p.seed);
  p.frame_count = j.value("frame_count", 30);
}

void to_json(Json& j, const TrackPoint& p) {
  j = Json{{"track_id", p.track_id}, {"class_id", p.class_id}, {"cx", p.cx},
           {"cy", p.cy},             {"w", p.w},               {"h", p.h},
           {"status", p.alive() ? "alive" : "terminated_edge"}};
}
void from_json(const Json& j, TrackPoint& p) {
  j.at("track_id").get_to(p.track_id);
  j.at("class_id").get_to(p.class_id);
  j.at("cx").get_to(p.cx);
  j.at("cy").get_to(p.cy);
  j.at("w").get_to(p.w);
  j.at("h").get_to(p.h);
  const std::string status = j.at("status").get<std::string>();
  if (status == "alive") {
    p.status = TrackStatus::kAlive;
  } else if (status == "terminated_edge") {
    p.status = TrackStatus::kTerminatedEdge;
  } else {
    throw ValidationError("unknown track status '" + status + "'");
  }
}

void to_json(Json& j, const TrackFrame& f) {
  j = Json{{"frame_index", f.frame_index}, {"points", f.points}};
}
void from_json(const Json& j, TrackFrame& f) {
  j.at("frame_index").get_to(f.frame_index);
  f.points = j.at("points").get<std::vector<TrackPoint>>();
}

void to_json(Json& j, const TrackSet& t) { j = Json{{"frames", t.frames}}; }
void from_json(const Json& j, TrackSet& t) {
  t.frames = j.at("frames").get<std::vector<TrackFrame>>();
}

void to_json(Json& j, const PolygonLabel& p) {
  j = Json{{"class_id", p.class_id}, {"vertices", p.vertices}};
}
void from_json(const Json& j, PolygonLabel& p) {
  j.at("class_id").get_to(p.class_id);
  p.vertices = j.at("vertices").get<std::vector<Point2>>();
}

void to_json(Json& j, const FrameLabels& f) {
  j = Json{{"frame_index", f.frame_index},
           {"provenance", std::string(to_string(f.provenance))},
           {"boxes", f.boxes},
           {"polygons", f.polygons}};
}
void from_json(const Json& j, FrameLabels& f) {
  j.at("frame_index").get_to(f.frame_index);
  f.provenance = parse_provenance(j.value("provenance", std::string("propagated")));
  f.boxes = j.at("boxes").get<std::vector<NormBox>>();
  f.polygons = j.value("polygons", std::vector<PolygonLabel>{});
}

void to_json(Json& j, const JobRecord& r) {
  j = Json{{"job_id", r.job_id},
           {"run_id", r.run_id},
           {"stage", std::string(to_string(r.stage))},
           {"status", std::string(to_string(r.status))},
           {"config", r.config_snapshot},
           {"timings", r.timings},
           {"error", r.error}};
}
void from_json(const Json& j, JobRecord& r) {
  j.at("job_id").get_to(r.job_id);
  r.run_id = j.value("run_id", std::string());
  r.stage = parse_stage(j.at("stage").get<std::string>());
  r.status = parse_job_status(j.at("status").get<std::string>());
  r.config_snapshot = j.value("config", std::string());
  r.timings = j.value("timings", std::map<std::string, double>{});
  r.error = j.value("error", std::string());
}

void to_json(Json& j, const Project& p) {
  j = Json::object();
  j["version"] = kManifestVersion;
  j["project_id"] = p.project_id;
  j["geometry"] = p.geometry;
  j["frame_count"] = p.frame_count;
  j["class_names"] = p.class_names;
  j["pairs"] = p.pairs;
  j["flagged_pairs"] = p.flagged_pairs;
  j["job_history"] = p.job_history;
}
void from_json(const Json& j, Project& p) {
  const int version = j.at("version").get<int>();
  if (version != kManifestVersion) {
    throw ValidationError("unsupported manifest version " + std::to_string(version));
  }
  j.at("project_id").get_to(p.project_id);
  j.at("geometry").get_to(p.geometry);
  j.at("frame_count").get_to(p.frame_count);
  p.class_names = j.at("class_names").get<std::vector<std::string>>();
  p.pairs = j.at("pairs").get<std::vector<AnnotationSequencePair>>();
  p.flagged_pairs = j.value("flagged_pairs", std::set<int>{});
  p.job_history = j.at("job_history").get<std::vector<JobRecord>>();
}

AnnotationSequencePair parse_seed_file(std::string_view text, std::string_view source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(source), 0, e.what());
  }
  AnnotationSequencePair pair;
  try {
    const int version = j.at("version").get<int>();
    if (version != kSeedFileVersion) {
      throw ParseError(std::string(source), 0,
                       "unsupported seed file version " + std::to_string(version));
    }
    pair = j.get<AnnotationSequencePair>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string(source), 0, e.what());
  }
  pair.validate();
  return pair;
}

std::string format_seed_file(const AnnotationSequencePair& pair) {
  Json j = Json::object();
  j["version"] = kSeedFileVersion;
  const Json body = pair;
  for (const auto& [key, value] : body.items()) j[key] = value;
  return j.dump(2) + "\n";
}

}  // namespace seedprop
