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

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "oracles.h"
#include "seedprop/core/error.h"
#include "seedprop/eval/metrics.h"

namespace seedprop {
namespace {

using testing::GridBox;
using testing::Instance;
using testing::detections;
using testing::gt_boxes;
using testing::oracle_ap;
using testing::oracle_match;
using testing::random_instance;

TEST(MatchTest, Examples) {
  const std::vector<NormBox> gt{NormBox{0, 0.5, 0.5, 0.2, 0.2}};
  std::vector<Detection> dets{Detection{0, gt[0], 0.9}};
  FrameMatch m = match_frame(gt, dets, 0.5);
  EXPECT_EQ(std::tie(m.tp, m.fp, m.fn), std::make_tuple(1, 0, 0));

  dets.push_back(Detection{0, gt[0], 0.8});  // duplicate
  m = match_frame(gt, dets, 0.5);
  EXPECT_EQ(std::tie(m.tp, m.fp, m.fn), std::make_tuple(1, 1, 0));
  EXPECT_EQ(m.det_is_tp, (std::vector<bool>{true, false}));

  // Two detections at 0.6 and 0.55 on the same GT, only the first matches,
  // and a second GT goes unmatched.
  const std::vector<NormBox> gt2{NormBox{0, 0.3, 0.3, 0.2, 0.2}, NormBox{0, 0.8, 0.8, 0.1, 0.1}};
  const std::vector<Detection> dets2{Detection{0, NormBox{0, 0.31, 0.3, 0.2, 0.2}, 0.55},
                                     Detection{0, NormBox{0, 0.3, 0.31, 0.2, 0.2}, 0.6}};
  m = match_frame(gt2, dets2, 0.5);
  EXPECT_EQ(std::tie(m.tp, m.fp, m.fn), std::make_tuple(1, 1, 1));
  EXPECT_EQ(m.pairs, (std::vector<std::pair<int, int>>{{1, 0}}));

  // Class mismatch misses unless matching is class-agnostic.
  const std::vector<Detection> other{Detection{0, NormBox{1, 0.5, 0.5, 0.2, 0.2}, 0.9}};
  EXPECT_EQ(match_frame(gt, other, 0.5).tp, 0);
  EXPECT_EQ(match_frame(gt, other, 0.5, true).tp, 1);

  // Equal confidence: the better-overlapping detection goes first.
  const std::vector<Detection> tied{Detection{0, NormBox{0, 0.54, 0.5, 0.2, 0.2}, 0.7},
                                    Detection{0, NormBox{0, 0.51, 0.5, 0.2, 0.2}, 0.7}};
  m = match_frame(gt, tied, 0.5);
  EXPECT_EQ(m.det_is_tp, (std::vector<bool>{false, true}));
}

TEST(MatchTest, AgreesWithEnumeratedGreedyOracle) {
  std::mt19937_64 rng(211);
  for (int trial = 0; trial < 2000; ++trial) {
    const Instance in = random_instance(rng, trial % 2 == 0 ? 1 : 3);
    for (bool agnostic : {false, true}) {
      const FrameMatch got = match_frame(gt_boxes(in), detections(in), 0.5, agnostic);
      ASSERT_EQ(got, oracle_match(in, agnostic)) << "trial " << trial;
    }
  }
}

TEST(MatchTest, CountsAreConsistent) {
  std::mt19937_64 rng(223);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance in = random_instance(rng, 2);
    const FrameMatch m = match_frame(gt_boxes(in), detections(in), 0.5);
    EXPECT_EQ(m.tp + m.fp, static_cast<int>(in.det.size()));
    EXPECT_EQ(m.tp + m.fn, static_cast<int>(in.gt.size()));
    std::vector<int> used;
    for (const auto& [d, g] : m.pairs) used.push_back(g);
    std::sort(used.begin(), used.end());
    EXPECT_EQ(std::adjacent_find(used.begin(), used.end()), used.end());
  }
}

TEST(AveragePrecisionTest, Examples) {
  const std::vector<ScoredDetection> perfect{{0.9, true}, {0.8, true}};
  EXPECT_DOUBLE_EQ(*average_precision(perfect, 2), 1.0);
  const std::vector<ScoredDetection> wrong{{0.9, false}, {0.8, false}};
  EXPECT_DOUBLE_EQ(*average_precision(wrong, 2), 0.0);
  EXPECT_DOUBLE_EQ(*average_precision(std::vector<ScoredDetection>{}, 3), 0.0);
  // One of two GT found at precision 1: recall points 0..50 score 1.
  const std::vector<ScoredDetection> half{{0.9, true}};
  EXPECT_DOUBLE_EQ(*average_precision(half, 2), 51.0 / 101.0);
  // FP first, then TP: precision 0.5 at full recall everywhere.
  const std::vector<ScoredDetection> late{{0.9, false}, {0.8, true}};
  EXPECT_DOUBLE_EQ(*average_precision(late, 1), 0.5);
  EXPECT_FALSE(average_precision(perfect, 0).has_value());
}

TEST(AveragePrecisionTest, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(227);
  std::uniform_int_distribution<int> count(0, 12), gt_extra(0, 4), coin(0, 1);
  const double levels[] = {0.25, 0.5, 0.5, 0.75, 1.0};
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<ScoredDetection> ranked;
    std::size_t tps = 0;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const bool tp = coin(rng) == 1;
      tps += tp;
      ranked.push_back(ScoredDetection{levels[level(rng)], tp});
    }
    const std::size_t num_gt = std::max<std::size_t>(1, tps + gt_extra(rng));
    ASSERT_EQ(*average_precision(ranked, num_gt), oracle_ap(ranked, num_gt)) << trial;
  }
}

TEST(AveragePrecisionTest, RemovingAFalsePositiveNeverHurts) {
  std::mt19937_64 rng(229);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ScoredDetection> ranked;
    for (int i = 0; i < 10; ++i) ranked.push_back({conf(rng), coin(rng) == 1});
    const double before = *average_precision(ranked, 8);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].tp) continue;
      std::vector<ScoredDetection> fewer = ranked;
      fewer.erase(fewer.begin() + static_cast<long>(i));
      EXPECT_GE(*average_precision(fewer, 8), before);
    }
  }
}

TEST(EvaluateTest, PerfectDetectionsScoreOne) {
  FrameLabelMap gt;
  DetectionMap dets;
  for (int f = 0; f < 5; ++f) {
    gt[f].frame_index = f;
    for (int k = 0; k < 3; ++k) {
      const NormBox b{k % 2, 0.1 + 0.3 * k, 0.5, 0.1, 0.1};
      gt[f].boxes.push_back(b);
      dets[f].push_back(Detection{f, b, 0.9});
    }
  }
  const EvalReport r = evaluate(gt, dets, MatchConfig{});
  EXPECT_EQ(r.tp, 15u);
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.fn, 0u);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.map50, 1.0);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_EQ(r.per_class.size(), 2u);
}

TEST(EvaluateTest, MissingFramesAndConfidenceFloor) {
  FrameLabelMap gt;
  gt[0] = FrameLabels{0, {NormBox{0, 0.5, 0.5, 0.2, 0.2}}, {}, Provenance::kManual};
  gt[1] = FrameLabels{1, {NormBox{0, 0.5, 0.5, 0.2, 0.2}}, {}, Provenance::kManual};
  DetectionMap dets;
  dets[0] = {Detection{0, NormBox{0, 0.5, 0.5, 0.2, 0.2}, 0.1}};   // under the floor
  dets[9] = {Detection{9, NormBox{0, 0.5, 0.5, 0.2, 0.2}, 0.9}};   // no GT frame
  const EvalReport r = evaluate(gt, dets, MatchConfig{});
  EXPECT_EQ(r.tp, 0u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 2u);
  EXPECT_DOUBLE_EQ(r.fn_pct, 1.0);

  EXPECT_THROW(evaluate(FrameLabelMap{}, dets, MatchConfig{}), ValidationError);
  MatchConfig bad;
  bad.iou_threshold = 1.0;
  EXPECT_THROW(evaluate(gt, dets, bad), ValidationError);
}

TEST(EvaluateTest, StrictMapNeverExceedsMap50) {
  std::mt19937_64 rng(233);
  for (int trial = 0; trial < 200; ++trial) {
    FrameLabelMap gt;
    DetectionMap dets;
    for (int f = 0; f < 4; ++f) {
      const Instance in = random_instance(rng, 2);
      gt[f].frame_index = f;
      gt[f].boxes = gt_boxes(in);
      for (Detection d : detections(in)) {
        d.frame_index = f;
        dets[f].push_back(d);
      }
    }
    gt[9] = FrameLabels{9, {NormBox{0, 0.5, 0.5, 0.2, 0.2}}, {}, Provenance::kManual};
    const EvalReport r = evaluate(gt, dets, MatchConfig{});
    EXPECT_LE(r.map, r.map50 + 1e-12);
    EXPECT_GE(r.map, 0.0);
    EXPECT_LE(r.map50, 1.0);
    EXPECT_EQ(r.tp + r.fn, r.total_gt);
    for (const auto& [cls, c] : r.per_class) {
      if (c.ap) EXPECT_LE(*c.ap, *c.ap50 + 1e-12);
    }
  }
}

struct TableRow {
  std::size_t tp, fp, fn;
  double precision, recall, f1, fp_pct, fn_pct;
};

// Reference ablation result rows; values in percent.
TEST(FromCountsTest, ReproducesPublishedRows) {
  const TableRow rows[] = {
      {203998, 21196, 51237, 90.59, 79.93, 84.92, 8.30, 20.07},
      {156536, 62269, 98699, 71.54, 61.33, 66.04, 24.40, 38.67},
  };
  for (const TableRow& row : rows) {
    const EvalReport r = EvalReport::from_counts(row.tp, row.fp, row.fn);
    EXPECT_NEAR(100 * r.precision, row.precision, 0.005);
    EXPECT_NEAR(100 * r.recall, row.recall, 0.005);
    EXPECT_NEAR(100 * r.f1, row.f1, 0.005);
    EXPECT_NEAR(100 * r.fp_pct, row.fp_pct, 0.005);
    EXPECT_NEAR(100 * r.fn_pct, row.fn_pct, 0.005);
  }
  // The animal-tracking row: every ratio but F1 reproduces. F1 from the
  // printed precision and recall is 81.99, not the printed 81.21.
  const EvalReport r = EvalReport::from_counts(332377, 49632, 96376);
  EXPECT_EQ(r.total_gt, 428753u);
  EXPECT_NEAR(100 * r.precision, 87.01, 0.005);
  EXPECT_NEAR(100 * r.recall, 77.52, 0.005);
  EXPECT_NEAR(100 * r.fp_pct, 11.58, 0.005);
  EXPECT_NEAR(100 * r.fn_pct, 22.48, 0.005);
  EXPECT_NEAR(100 * r.f1, 81.99, 0.005);
}

TEST(FromCountsTest, ZeroDenominators) {
  const EvalReport r = EvalReport::from_counts(0, 0, 0);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_EQ(r.fp_pct, 0.0);
}

TEST(MultiVideoTest, MicroPoolsAndMacroAverages) {
  const EvalReport a = EvalReport::from_counts(90, 10, 10);
  const EvalReport b = EvalReport::from_counts(10, 0, 90);
  const MultiVideoReport m = evaluate_videos(std::vector<EvalReport>{a, b});
  EXPECT_EQ(m.micro.tp, 100u);
  EXPECT_DOUBLE_EQ(m.micro.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.macro.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.micro.precision, 100.0 / 110.0);
  EXPECT_DOUBLE_EQ(m.macro.precision, (0.9 + 1.0) / 2);
  EXPECT_EQ(m.per_video.size(), 2u);
  EXPECT_THROW(evaluate_videos(std::vector<EvalReport>{}), ValidationError);
}

TEST(ThroughputTest, PublishedStageTimes) {
  const std::vector<StageTiming> stages{
      {"seed", 120}, {"propagate", 400}, {"segment", 300}, {"train", 360}, {"infer", 600}};
  const ThroughputReport r = throughput_report(stages, 18000);
  EXPECT_DOUBLE_EQ(r.total_seconds, 1780.0);
  EXPECT_GE(r.fps, 10.0);
  EXPECT_LE(r.fps, 10.2);
  EXPECT_EQ(throughput_report(stages, 0).fps, 0.0);
  EXPECT_EQ(throughput_report(std::vector<StageTiming>{}, 10).fps, 0.0);
  EXPECT_THROW(throughput_report(std::vector<StageTiming>{{"x", -1}}, 10), ValidationError);
}

TEST(AnnotationRatioTest, Display) {
  EXPECT_EQ((AnnotationRatio{149, 40947}.display()), "1:274");
  EXPECT_NEAR((AnnotationRatio{149, 40947}.value()), 274.81, 0.01);
  EXPECT_EQ((AnnotationRatio{0, 5}.display()), "1:0");
}

TEST(ReportTest, CsvHeaderAndQuoting) {
  EvalReport r = EvalReport::from_counts(203998, 21196, 51237);
  r.method = "Variable Box Selection / SAM / Positional Filter";
  r.map50 = 0.7919;
  r.map = 0.4481;
  EvalReport q = r;
  q.method = "a,\"b\"";
  const std::string csv = report_csv(std::vector<EvalReport>{r, q});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "Method,Precision,Recall%,TP,FP,FP%,FN,FN%,mAP50,mAP,F1");
  EXPECT_NE(csv.find("Variable Box Selection / SAM / Positional Filter,90.59,79.93,203998,21196,"
                     "8.30,51237,20.07,79.19,44.81,84.92\n"),
            std::string::npos)
      << csv;
  EXPECT_NE(csv.find("\"a,\"\"b\"\"\","), std::string::npos);
}

TEST(ReportTest, JsonRoundTrip) {
  EvalReport r = EvalReport::from_counts(5, 2, 1);
  r.method = "row";
  r.map50 = 0.625;
  r.map = 0.375;
  r.per_class[0] = ClassMetrics{6, 5, 2, 0.625, 0.375};
  r.per_class[3] = ClassMetrics{0, 0, 1, std::nullopt, std::nullopt};
  const std::vector<EvalReport> back = parse_report_json(report_json(std::vector<EvalReport>{r}));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].method, "row");
  EXPECT_EQ(back[0].tp, 5u);
  EXPECT_EQ(back[0].precision, r.precision);
  EXPECT_EQ(back[0].f1, r.f1);
  EXPECT_EQ(back[0].per_class.at(0).ap50, 0.625);
  EXPECT_FALSE(back[0].per_class.at(3).ap.has_value());
  EXPECT_THROW(parse_report_json("{"), ParseError);
}

}  // namespace
}  // namespace seedprop
