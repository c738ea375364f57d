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

#include "seedprop/service/wire.h"

#include <istream>
#include <ostream>

#include "seedprop/core/error.h"

namespace seedprop::wire {
namespace {

Json point_json(int track_id, double x, double y) {
  return Json{{"track_id", track_id}, {"x", x}, {"y", y}};
}

std::string type_of(const Json& j) { return j.at("type").get<std::string>(); }

void expect_type(const Json& j, std::string_view type) {
  const std::string actual = type_of(j);
  if (actual == "error") {
    throw BackendError("backend error: " + j.value("message", std::string("(no message)")));
  }
  if (actual != type) {
    throw BackendError("expected a '" + std::string(type) + "' message, got '" + actual + "'");
  }
}

}  // namespace

Json encode_handshake(const BackendInfo& info) {
  return Json{{"type", "handshake"},          {"name", info.name},
              {"version", info.version},      {"max_points", info.max_points},
              {"max_chunk", info.max_chunk},  {"max_prompts", info.max_prompts}};
}

BackendInfo decode_handshake(const Json& j) {
  expect_type(j, "handshake");
  return BackendInfo{j.at("name").get<std::string>(), j.at("version").get<std::string>(),
                     j.value("max_points", 0), j.value("max_chunk", 0),
                     j.value("max_prompts", 0)};
}

Json encode(const TrackRequest& r) {
  Json points = Json::array();
  for (const TrackQueryPoint& p : r.points) points.push_back(point_json(p.track_id, p.x, p.y));
  return Json{{"type", "track"},       {"job_id", r.job_id},        {"frame_indices", r.frame_indices},
              {"frames", r.frame_paths}, {"points", std::move(points)}, {"geometry", r.geometry}};
}

TrackRequest decode_track_request(const Json& j) {
  expect_type(j, "track");
  TrackRequest r;
  r.job_id = j.at("job_id").get<std::string>();
  r.frame_indices = j.at("frame_indices").get<std::vector<int>>();
  r.frame_paths = j.at("frames").get<std::vector<std::string>>();
  for (const Json& p : j.at("points")) {
    r.points.push_back(TrackQueryPoint{p.at("track_id").get<int>(), p.at("x").get<double>(),
                                       p.at("y").get<double>()});
  }
  r.geometry = j.at("geometry").get<ImageGeometry>();
  return r;
}

Json encode(const TrackResponse& r) {
  Json frames = Json::array();
  for (const auto& frame : r.frames) {
    Json points = Json::array();
    for (const TrackedPoint& p : frame) {
      Json q = point_json(p.track_id, p.x, p.y);
      q["visible"] = p.visible;
      points.push_back(std::move(q));
    }
    frames.push_back(std::move(points));
  }
  return Json{{"type", "track_result"}, {"job_id", r.job_id}, {"frames", std::move(frames)}};
}

TrackResponse decode_track_response(const Json& j) {
  expect_type(j, "track_result");
  TrackResponse r;
  r.job_id = j.at("job_id").get<std::string>();
  for (const Json& frame : j.at("frames")) {
    std::vector<TrackedPoint>& points = r.frames.emplace_back();
    for (const Json& p : frame) {
      points.push_back(TrackedPoint{p.at("track_id").get<int>(), p.at("x").get<double>(),
                                    p.at("y").get<double>(), p.value("visible", true)});
    }
  }
  return r;
}

Json encode(const SegmentRequest& r) {
  Json boxes = Json::array();
  for (const SegmentPrompt& p : r.boxes) {
    boxes.push_back(Json{{"track_id", p.track_id}, {"x_min", p.box.x_min}, {"y_min", p.box.y_min},
                         {"x_max", p.box.x_max}, {"y_max", p.box.y_max}});
  }
  return Json{{"type", "segment"}, {"job_id", r.job_id},     {"frame_index", r.frame_index},
              {"frame", r.frame_path}, {"geometry", r.geometry}, {"boxes", std::move(boxes)}};
}

SegmentRequest decode_segment_request(const Json& j) {
  expect_type(j, "segment");
  SegmentRequest r;
  r.job_id = j.at("job_id").get<std::string>();
  r.frame_index = j.value("frame_index", 0);
  r.frame_path = j.at("frame").get<std::string>();
  r.geometry = j.at("geometry").get<ImageGeometry>();
  for (const Json& b : j.at("boxes")) {
    r.boxes.push_back(SegmentPrompt{
        b.at("track_id").get<int>(),
        PixelBox{b.at("x_min").get<double>(), b.at("y_min").get<double>(),
                 b.at("x_max").get<double>(), b.at("y_max").get<double>()}});
  }
  return r;
}

Json encode(const SegmentResponse& r) {
  Json masks = Json::array();
  for (const MaskResult& m : r.masks) {
    masks.push_back(Json{{"track_id", m.track_id}, {"rle", m.rle}, {"rows", m.rows}, {"cols", m.cols}});
  }
  return Json{{"type", "segment_result"}, {"job_id", r.job_id}, {"masks", std::move(masks)}};
}

SegmentResponse decode_segment_response(const Json& j) {
  expect_type(j, "segment_result");
  SegmentResponse r;
  r.job_id = j.at("job_id").get<std::string>();
  for (const Json& m : j.at("masks")) {
    r.masks.push_back(MaskResult{m.at("track_id").get<int>(),
                                 m.at("rle").get<std::vector<std::uint32_t>>(),
                                 m.at("rows").get<int>(), m.at("cols").get<int>()});
  }
  return r;
}

Json encode(const TrainRequest& r) {
  const TrainSpec& s = r.spec;
  return Json{{"type", "train"},
              {"job_id", r.job_id},
              {"dataset", r.dataset_path},
              {"epochs", s.epochs},
              {"batch", s.batch},
              {"image_size", s.image_size},
              {"confidence", s.confidence},
              {"iou_threshold", s.iou_threshold},
              {"class_agnostic_nms", s.class_agnostic_nms},
              {"extensions", s.extensions}};
}

TrainRequest decode_train_request(const Json& j) {
  expect_type(j, "train");
  TrainRequest r;
  r.job_id = j.at("job_id").get<std::string>();
  r.dataset_path = j.at("dataset").get<std::string>();
  r.spec.dataset = r.dataset_path;
  r.spec.epochs = j.at("epochs").get<int>();
  r.spec.batch = j.at("batch").get<int>();
  r.spec.image_size = j.at("image_size").get<int>();
  r.spec.confidence = j.at("confidence").get<double>();
  r.spec.iou_threshold = j.at("iou_threshold").get<double>();
  r.spec.class_agnostic_nms = j.at("class_agnostic_nms").get<bool>();
  r.spec.extensions = j.value("extensions", std::map<std::string, std::string>{});
  return r;
}

Json encode(const TrainResponse& r) {
  return Json{{"type", "train_result"}, {"job_id", r.job_id}, {"model_token", r.model_token},
              {"wall_seconds", r.wall_seconds}};
}

TrainResponse decode_train_response(const Json& j) {
  expect_type(j, "train_result");
  return TrainResponse{j.at("job_id").get<std::string>(), j.at("model_token").get<std::string>(),
                       j.value("wall_seconds", 0.0)};
}

Json encode(const InferRequest& r) {
  return Json{{"type", "infer"},
              {"job_id", r.job_id},
              {"model_token", r.model_token},
              {"frame_indices", r.frame_indices},
              {"frames", r.frame_paths},
              {"geometry", r.geometry},
              {"confidence", r.confidence},
              {"iou_threshold", r.iou_threshold},
              {"class_agnostic_nms", r.class_agnostic_nms}};
}

InferRequest decode_infer_request(const Json& j) {
  expect_type(j, "infer");
  InferRequest r;
  r.job_id = j.at("job_id").get<std::string>();
  r.model_token = j.at("model_token").get<std::string>();
  r.frame_indices = j.at("frame_indices").get<std::vector<int>>();
  r.frame_paths = j.at("frames").get<std::vector<std::string>>();
  r.geometry = j.at("geometry").get<ImageGeometry>();
  r.confidence = j.value("confidence", 0.2);
  r.iou_threshold = j.value("iou_threshold", 0.5);
  r.class_agnostic_nms = j.value("class_agnostic_nms", true);
  return r;
}

Json encode(const InferResponse& r) {
  Json frames = Json::array();
  for (const auto& frame : r.frames) {
    Json dets = Json::array();
    for (const PixelDetection& d : frame) {
      dets.push_back(Json{{"class_id", d.class_id}, {"x_min", d.box.x_min}, {"y_min", d.box.y_min},
                          {"x_max", d.box.x_max}, {"y_max", d.box.y_max},
                          {"confidence", d.confidence}});
    }
    frames.push_back(std::move(dets));
  }
  return Json{{"type", "infer_result"}, {"job_id", r.job_id}, {"frames", std::move(frames)}};
}

InferResponse decode_infer_response(const Json& j) {
  expect_type(j, "infer_result");
  InferResponse r;
  r.job_id = j.at("job_id").get<std::string>();
  for (const Json& frame : j.at("frames")) {
    std::vector<PixelDetection>& dets = r.frames.emplace_back();
    for (const Json& d : frame) {
      dets.push_back(PixelDetection{
          d.at("class_id").get<int>(),
          PixelBox{d.at("x_min").get<double>(), d.at("y_min").get<double>(),
                   d.at("x_max").get<double>(), d.at("y_max").get<double>()},
          d.at("confidence").get<double>()});
    }
  }
  return r;
}

Json encode_error(const std::string& job_id, const std::string& message) {
  return Json{{"type", "error"}, {"job_id", job_id}, {"message", message}};
}

std::string handle_line(const std::string& line, TrackerBackend* tracker,
                        SegmenterBackend* segmenter, DetectorBackend* detector) {
  std::string job_id;
  try {
    const Json j = Json::parse(line);
    job_id = j.value("job_id", std::string());
    const std::string type = type_of(j);
    if (type == "track" && tracker != nullptr) {
      return encode(tracker->track(decode_track_request(j))).dump();
    }
    if (type == "segment" && segmenter != nullptr) {
      return encode(segmenter->segment(decode_segment_request(j))).dump();
    }
    if (type == "train" && detector != nullptr) {
      return encode(detector->train(decode_train_request(j))).dump();
    }
    if (type == "infer" && detector != nullptr) {
      return encode(detector->infer(decode_infer_request(j))).dump();
    }
    return encode_error(job_id, "unsupported request type '" + type + "'").dump();
  } catch (const std::exception& e) {
    return encode_error(job_id, e.what()).dump();
  }
}

void serve(std::istream& in, std::ostream& out, const BackendInfo& info,
           TrackerBackend* tracker, SegmenterBackend* segmenter, DetectorBackend* detector) {
  out << encode_handshake(info).dump() << '\n' << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle_line(line, tracker, segmenter, detector) << '\n' << std::flush;
  }
}

}  // namespace seedprop::wire
