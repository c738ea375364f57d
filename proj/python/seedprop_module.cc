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

// Python bindings: geometry, contour fitting, the positional filter,
// metrics, and running the pipeline on a project store.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/operators.h>
#include <pybind11/stl/filesystem.h>

#include "seedprop/core/error.h"
#include "seedprop/core/geometry.h"
#include "seedprop/eval/metrics.h"
#include "seedprop/propagation/propagate.h"
#include "seedprop/segfit/contour.h"
#include "seedprop/service/config.h"
#include "seedprop/service/demo.h"
#include "seedprop/service/pipeline.h"
#include "seedprop/store/label_io.h"
#include "seedprop/synthetic/scene.h"

namespace py = pybind11;
using namespace seedprop;

namespace {

MaskGrid mask_from_rows(const std::vector<std::vector<bool>>& rows) {
  if (rows.empty() || rows[0].empty()) throw ValidationError("mask must be non-empty");
  MaskGrid mask(ImageGeometry{static_cast<int>(rows[0].size()), static_cast<int>(rows.size())});
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != rows[0].size()) throw ValidationError("mask rows differ in length");
    for (std::size_t x = 0; x < rows[y].size(); ++x) {
      if (rows[y][x]) mask.set(static_cast<int>(x), static_cast<int>(y));
    }
  }
  return mask;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["total_gt"] = r.total_gt;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["fn"] = r.fn;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["fp_pct"] = r.fp_pct;
  d["fn_pct"] = r.fn_pct;
  d["map50"] = r.map50;
  d["map"] = r.map;
  return d;
}

}  // namespace

PYBIND11_MODULE(_seedprop, m) {
  m.attr("__version__") = "0.1.0";

  // Translators run newest first, so the base class goes in first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());

  py::class_<ImageGeometry>(m, "ImageGeometry")
      .def(py::init<int, int>(), py::arg("width_px"), py::arg("height_px"))
      .def_readwrite("width_px", &ImageGeometry::width_px)
      .def_readwrite("height_px", &ImageGeometry::height_px);

  py::class_<NormBox>(m, "NormBox")
      .def(py::init([](double cx, double cy, double w, double h, int class_id) {
             return NormBox{class_id, cx, cy, w, h};
           }),
           py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"), py::arg("class_id") = 0)
      .def_readwrite("class_id", &NormBox::class_id)
      .def_readwrite("cx", &NormBox::cx)
      .def_readwrite("cy", &NormBox::cy)
      .def_readwrite("w", &NormBox::w)
      .def_readwrite("h", &NormBox::h)
      .def(py::self == py::self)
      .def("__repr__", [](const NormBox& b) { return "NormBox(" + format_box_line(b) + ")"; });

  py::class_<PixelBox>(m, "PixelBox")
      .def(py::init<double, double, double, double>(), py::arg("x_min"), py::arg("y_min"),
           py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &PixelBox::x_min)
      .def_readwrite("y_min", &PixelBox::y_min)
      .def_readwrite("x_max", &PixelBox::x_max)
      .def_readwrite("y_max", &PixelBox::y_max)
      .def(py::self == py::self);

  m.def("iou", py::overload_cast<const NormBox&, const NormBox&>(&iou));
  m.def("iou", py::overload_cast<const PixelBox&, const PixelBox&>(&iou));
  m.def("norm_to_pixel", &norm_to_pixel);
  m.def("pixel_to_norm", &pixel_to_norm, py::arg("box"), py::arg("geometry"),
        py::arg("class_id") = 0);
  m.def("clamp_to_image", &clamp_to_image);
  m.def("format_box_line", &format_box_line);
  m.def("parse_box_line", &parse_box_line, py::arg("line"), py::arg("num_classes") = 0);

  // Masks are lists of rows of booleans.
  m.def("min_bounding_box", [](const std::vector<std::vector<bool>>& rows) {
    return min_bounding_box(mask_from_rows(rows));
  });
  m.def("extract_contour", [](const std::vector<std::vector<bool>>& rows) {
    std::vector<std::pair<int, int>> out;
    for (const PixelCoord& p : extract_contour(mask_from_rows(rows))) out.emplace_back(p.x, p.y);
    return out;
  });

  // Returns (kept, terminated) lists of box indices.
  m.def(
      "positional_filter",
      [](const std::vector<NormBox>& boxes, double edge_margin) {
        std::vector<TrackPoint> points;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
          const NormBox& b = boxes[i];
          points.push_back(TrackPoint{static_cast<int>(i), b.class_id, b.cx, b.cy, b.w, b.h});
        }
        const FilterResult r = positional_filter(points, FilterConfig{edge_margin, true});
        std::vector<int> kept, terminated;
        for (const TrackPoint& p : r.kept) kept.push_back(p.track_id);
        for (const TrackPoint& p : r.terminated) terminated.push_back(p.track_id);
        return py::make_tuple(kept, terminated);
      },
      py::arg("boxes"), py::arg("edge_margin") = 0.01);

  // detections: list of (box, confidence). Returns (tp, fp, fn, pairs).
  m.def(
      "match_frame",
      [](const std::vector<NormBox>& gt, const std::vector<std::pair<NormBox, double>>& dets,
         double iou_threshold, bool class_agnostic) {
        std::vector<Detection> d;
        for (const auto& [box, conf] : dets) d.push_back(Detection{0, box, conf});
        const FrameMatch r = match_frame(gt, d, iou_threshold, class_agnostic);
        return py::make_tuple(r.tp, r.fp, r.fn, r.pairs);
      },
      py::arg("gt"), py::arg("detections"), py::arg("iou_threshold") = 0.5,
      py::arg("class_agnostic") = false);

  // ranked: list of (confidence, is_tp). None when num_gt == 0.
  m.def("average_precision",
        [](const std::vector<std::pair<double, bool>>& ranked, std::size_t num_gt) {
          std::vector<ScoredDetection> d;
          for (const auto& [conf, tp] : ranked) d.push_back(ScoredDetection{conf, tp});
          return average_precision(d, num_gt);
        });

  m.def("from_counts", [](std::size_t tp, std::size_t fp, std::size_t fn) {
    return report_dict(EvalReport::from_counts(tp, fp, fn));
  });

  // stages: list of (name, seconds). Returns (total_seconds, fps).
  m.def("throughput",
        [](const std::vector<std::pair<std::string, double>>& stages, std::size_t frames) {
          std::vector<StageTiming> t;
          for (const auto& [name, seconds] : stages) t.push_back(StageTiming{name, seconds});
          const ThroughputReport r = throughput_report(t, frames);
          return py::make_tuple(r.total_seconds, r.fps);
        });

  m.def("annotation_ratio", [](std::size_t seed_frames, std::size_t inferred_frames) {
    return AnnotationRatio{seed_frames, inferred_frames}.display();
  });

  // Builds a synthetic project under `root` and returns its config text.
  m.def(
      "create_synthetic_project",
      [](const std::filesystem::path& root, const std::string& project_id, int frame_count,
         int pair_frames, std::uint64_t seed) {
        synthetic::MovingRectanglesParams params;
        params.frame_count = frame_count;
        params.seed = seed;
        ProjectStore store(root);
        py::gil_scoped_release release;
        return create_synthetic_project(store, project_id,
                                        synthetic::make_moving_rectangles(params), pair_frames)
            .to_text();
      },
      py::arg("root"), py::arg("project_id"), py::arg("frame_count") = 60,
      py::arg("pair_frames") = 30, py::arg("seed") = 7);

  // Runs the pipeline on a project with the in-process backends named by
  // the config. Returns {"run_id", "skipped", "report"}.
  m.def(
      "run_pipeline",
      [](const std::filesystem::path& root, const std::string& project_id,
         const std::string& config_text) {
        ProjectStore store(root);
        PipelineResult result;
        {
          py::gil_scoped_release release;
          const PipelineConfig config = parse_pipeline_config(config_text);
          result = Pipeline(store, project_id, config, default_backend_factory(store, project_id))
                       .run();
        }
        py::dict out;
        out["run_id"] = result.run_id;
        std::vector<std::string> skipped;
        for (Stage s : result.skipped) skipped.emplace_back(to_string(s));
        out["skipped"] = skipped;
        out["report"] = result.report ? py::object(report_dict(*result.report)) : py::none();
        return out;
      },
      py::arg("root"), py::arg("project_id"), py::arg("config_text"));

  // Runs all eight seed/segment/filter combinations. Returns report dicts.
  m.def("ablation_sweep", [](const std::filesystem::path& root, const std::string& project_id,
                             const std::string& config_text) {
    ProjectStore store(root);
    std::vector<SweepRow> rows;
    {
      py::gil_scoped_release release;
      rows = ablation_sweep(store, project_id, parse_pipeline_config(config_text),
                            default_backend_factory(store, project_id));
    }
    py::list out;
    for (const SweepRow& r : rows) out.append(report_dict(r.report));
    return out;
  });
}
