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

#include "seedprop/eval/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"
#include "seedprop/store/serialization.h"

namespace seedprop {

void MatchConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ValidationError("iou_threshold must lie in (0, 1)");
  }
  if (!(confidence_floor > 0.0 && confidence_floor < 1.0)) {
    throw ValidationError("confidence_floor must lie in (0, 1)");
  }
}

FrameMatch match_frame(std::span<const NormBox> gt, std::span<const Detection> dets,
                       double iou_threshold, bool class_agnostic) {
  const std::size_t n_det = dets.size();
  const std::size_t n_gt = gt.size();
  std::vector<double> ious(n_det * n_gt, 0.0);
  std::vector<double> best(n_det, 0.0);
  for (std::size_t d = 0; d < n_det; ++d) {
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (!class_agnostic && dets[d].box.class_id != gt[g].class_id) continue;
      ious[d * n_gt + g] = iou(dets[d].box, gt[g]);
      best[d] = std::max(best[d], ious[d * n_gt + g]);
    }
  }

  std::vector<std::size_t> order(n_det);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].confidence != dets[b].confidence) return dets[a].confidence > dets[b].confidence;
    return best[a] > best[b];
  });

  FrameMatch result;
  result.det_is_tp.assign(n_det, false);
  std::vector<bool> taken(n_gt, false);
  for (std::size_t d : order) {
    int pick = -1;
    double pick_iou = iou_threshold;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (taken[g] || (!class_agnostic && dets[d].box.class_id != gt[g].class_id)) continue;
      const double v = ious[d * n_gt + g];
      if (v >= pick_iou && (pick < 0 || v > pick_iou)) {
        pick = static_cast<int>(g);
        pick_iou = v;
      }
    }
    if (pick >= 0) {
      taken[pick] = true;
      result.det_is_tp[d] = true;
      result.pairs.emplace_back(static_cast<int>(d), pick);
      ++result.tp;
    } else {
      ++result.fp;
    }
  }
  result.fn = static_cast<int>(n_gt) - result.tp;
  return result;
}

FrameMatch match_frame(const FrameLabels& gt, std::span<const Detection> dets,
                       const MatchConfig& config) {
  return match_frame(gt.boxes, dets, config.iou_threshold, config.class_agnostic);
}

std::optional<double> average_precision(std::span<const ScoredDetection> ranked,
                                        std::size_t num_gt) {
  if (num_gt == 0) return std::nullopt;
  std::vector<std::size_t> order(ranked.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranked[a].confidence > ranked[b].confidence;
  });

  std::vector<std::size_t> tp_cum(order.size());
  std::vector<double> precision(order.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (ranked[order[k]].tp) ++tp;
    tp_cum[k] = tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }

  // Recall points t/100; tp/num_gt >= t/100 compared in integers.
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t t = 0; t <= 100; ++t) {
    while (k < tp_cum.size() && tp_cum[k] * 100 < t * num_gt) ++k;
    if (k == tp_cum.size()) break;
    sum += precision[k];
  }
  return sum / 101.0;
}

EvalReport EvalReport::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.total_gt = tp + fn;
  const double gt = static_cast<double>(r.total_gt);
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = gt > 0 ? static_cast<double>(tp) / gt : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.fp_pct = gt > 0 ? static_cast<double>(fp) / gt : 0.0;
  r.fn_pct = gt > 0 ? static_cast<double>(fn) / gt : 0.0;
  return r;
}

namespace {

constexpr int kIouSteps = 10;  // 0.50, 0.55, ..., 0.95

double iou_step(int i) { return 0.5 + 0.05 * i; }

struct RankedEntry {
  double confidence;
  int frame;
  std::size_t index;
  bool tp;
};

}  // namespace

EvalReport evaluate(const FrameLabelMap& gt, const DetectionMap& detections,
                    const MatchConfig& config) {
  config.validate();
  std::set<int> frames;
  std::size_t gt_boxes = 0;
  for (const auto& [f, labels] : gt) {
    frames.insert(f);
    gt_boxes += labels.boxes.size();
  }
  if (gt_boxes == 0) throw ValidationError("ground truth holds no boxes; metrics undefined");
  for (const auto& [f, _] : detections) frames.insert(f);

  auto class_of = [&](int class_id) { return config.class_agnostic ? 0 : class_id; };

  std::size_t tp = 0, fp = 0, fn = 0;
  std::map<int, ClassMetrics> per_class;
  // ranked[class][iou step]
  std::map<int, std::array<std::vector<RankedEntry>, kIouSteps>> ranked;

  for (int f : frames) {
    static const std::vector<NormBox> kNoBoxes;
    auto gt_it = gt.find(f);
    const std::vector<NormBox>& gt_boxes_f = gt_it == gt.end() ? kNoBoxes : gt_it->second.boxes;
    std::vector<Detection> dets;
    if (auto it = detections.find(f); it != detections.end()) {
      for (const Detection& d : it->second) {
        if (d.confidence >= config.confidence_floor) dets.push_back(d);
      }
    }
    const FrameMatch m = match_frame(gt_boxes_f, dets, config.iou_threshold, config.class_agnostic);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    for (const NormBox& b : gt_boxes_f) ++per_class[class_of(b.class_id)].gt;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      ClassMetrics& c = per_class[class_of(dets[i].box.class_id)];
      if (m.det_is_tp[i]) ++c.tp; else ++c.fp;
    }

    for (int s = 0; s < kIouSteps; ++s) {
      const FrameMatch ms =
          match_frame(gt_boxes_f, dets, iou_step(s), config.class_agnostic);
      for (std::size_t i = 0; i < dets.size(); ++i) {
        ranked[class_of(dets[i].box.class_id)][s].push_back(
            RankedEntry{dets[i].confidence, f, i, ms.det_is_tp[i]});
      }
    }
  }

  EvalReport report = EvalReport::from_counts(tp, fp, fn);
  double sum50 = 0.0, sum_all = 0.0;
  std::size_t counted = 0;
  for (auto& [cls, metrics] : per_class) {
    if (metrics.gt == 0) {
      spdlog::info("class {} has no ground truth; left out of mAP", cls);
      continue;
    }
    double ap_sum = 0.0;
    for (int s = 0; s < kIouSteps; ++s) {
      std::vector<RankedEntry>& entries = ranked[cls][s];
      // Frames were visited in order, so a stable sort keeps (frame, index)
      // as the tie order.
      std::stable_sort(entries.begin(), entries.end(),
                       [](const RankedEntry& a, const RankedEntry& b) {
                         return a.confidence > b.confidence;
                       });
      std::vector<ScoredDetection> scored;
      scored.reserve(entries.size());
      for (const RankedEntry& e : entries) scored.push_back(ScoredDetection{e.confidence, e.tp});
      const double ap = *average_precision(scored, metrics.gt);
      if (s == 0) metrics.ap50 = ap;
      ap_sum += ap;
    }
    metrics.ap = ap_sum / kIouSteps;
    sum50 += *metrics.ap50;
    sum_all += *metrics.ap;
    ++counted;
  }
  report.per_class = std::move(per_class);
  if (counted > 0) {
    report.map50 = sum50 / static_cast<double>(counted);
    report.map = sum_all / static_cast<double>(counted);
  }
  return report;
}

MultiVideoReport evaluate_videos(std::span<const EvalReport> per_video) {
  if (per_video.empty()) throw ValidationError("no videos to aggregate");
  MultiVideoReport out;
  out.per_video.assign(per_video.begin(), per_video.end());
  std::size_t tp = 0, fp = 0, fn = 0;
  double map50 = 0.0, map = 0.0;
  EvalReport macro;
  for (const EvalReport& r : per_video) {
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
    map50 += r.map50;
    map += r.map;
    macro.precision += r.precision;
    macro.recall += r.recall;
    macro.f1 += r.f1;
    macro.fp_pct += r.fp_pct;
    macro.fn_pct += r.fn_pct;
  }
  const double n = static_cast<double>(per_video.size());
  out.micro = EvalReport::from_counts(tp, fp, fn);
  out.micro.method = "micro";
  // Without pooled detections, mAP can only be averaged.
  out.micro.map50 = map50 / n;
  out.micro.map = map / n;

  macro.method = "macro";
  macro.tp = tp;
  macro.fp = fp;
  macro.fn = fn;
  macro.total_gt = tp + fn;
  macro.precision /= n;
  macro.recall /= n;
  macro.f1 /= n;
  macro.fp_pct /= n;
  macro.fn_pct /= n;
  macro.map50 = map50 / n;
  macro.map = map / n;
  out.macro = macro;
  return out;
}

ThroughputReport throughput_report(std::span<const StageTiming> stages,
                                   std::size_t total_frames) {
  ThroughputReport r;
  r.stages.assign(stages.begin(), stages.end());
  r.total_frames = total_frames;
  for (const StageTiming& s : stages) {
    if (!(s.seconds >= 0.0)) throw ValidationError("stage '" + s.stage + "' has negative time");
    r.total_seconds += s.seconds;
  }
  if (total_frames > 0 && r.total_seconds > 0.0) {
    r.fps = static_cast<double>(total_frames) / r.total_seconds;
  }
  return r;
}

double AnnotationRatio::value() const {
  if (seed_frames == 0) return 0.0;
  return static_cast<double>(inferred_frames) / static_cast<double>(seed_frames);
}

std::string AnnotationRatio::display() const {
  if (seed_frames == 0) return "1:0";
  return fmt::format("1:{}", inferred_frames / seed_frames);
}

namespace {

std::string pct(double v) { return fmt::format("{:.2f}", 100.0 * v); }

}  // namespace

std::string report_csv(std::span<const EvalReport> rows) {
  std::string out = "Method,Precision,Recall%,TP,FP,FP%,FN,FN%,mAP50,mAP,F1\n";
  for (const EvalReport& r : rows) {
    std::string method = r.method;
    if (method.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : method) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      method = quoted + "\"";
    }
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", method, pct(r.precision),
                       pct(r.recall), r.tp, r.fp, pct(r.fp_pct), r.fn, pct(r.fn_pct),
                       pct(r.map50), pct(r.map), pct(r.f1));
  }
  return out;
}

namespace {

Json report_to_json(const EvalReport& r) {
  Json per_class = Json::array();
  for (const auto& [cls, m] : r.per_class) {
    Json c{{"class_id", cls}, {"gt", m.gt}, {"tp", m.tp}, {"fp", m.fp}};
    c["ap50"] = m.ap50 ? Json(*m.ap50) : Json(nullptr);
    c["ap"] = m.ap ? Json(*m.ap) : Json(nullptr);
    per_class.push_back(std::move(c));
  }
  return Json{{"method", r.method},     {"total_gt", r.total_gt}, {"tp", r.tp},
              {"fp", r.fp},             {"fn", r.fn},             {"precision", r.precision},
              {"recall", r.recall},     {"f1", r.f1},             {"fp_pct", r.fp_pct},
              {"fn_pct", r.fn_pct},     {"map50", r.map50},       {"map", r.map},
              {"per_class", per_class}};
}

EvalReport report_from_json(const Json& j) {
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.total_gt = j.at("total_gt").get<std::size_t>();
  r.tp = j.at("tp").get<std::size_t>();
  r.fp = j.at("fp").get<std::size_t>();
  r.fn = j.at("fn").get<std::size_t>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.fp_pct = j.at("fp_pct").get<double>();
  r.fn_pct = j.at("fn_pct").get<double>();
  r.map50 = j.at("map50").get<double>();
  r.map = j.at("map").get<double>();
  for (const Json& c : j.at("per_class")) {
    ClassMetrics m;
    m.gt = c.at("gt").get<std::size_t>();
    m.tp = c.at("tp").get<std::size_t>();
    m.fp = c.at("fp").get<std::size_t>();
    if (!c.at("ap50").is_null()) m.ap50 = c.at("ap50").get<double>();
    if (!c.at("ap").is_null()) m.ap = c.at("ap").get<double>();
    r.per_class[c.at("class_id").get<int>()] = m;
  }
  return r;
}

}  // namespace

std::string report_json(std::span<const EvalReport> rows) {
  Json j;
  j["version"] = 1;
  Json list = Json::array();
  for (const EvalReport& r : rows) list.push_back(report_to_json(r));
  j["rows"] = std::move(list);
  return j.dump(2) + "\n";
}

std::vector<EvalReport> parse_report_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("version").get<int>() != 1) throw ValidationError("unsupported report version");
    std::vector<EvalReport> rows;
    for (const Json& r : j.at("rows")) rows.push_back(report_from_json(r));
    return rows;
  } catch (const Json::exception& e) {
    throw ParseError("report", 0, e.what());
  }
}

}  // namespace seedprop
