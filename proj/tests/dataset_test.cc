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

#include <random>

#include <gtest/gtest.h>

#include "seedprop/core/error.h"
#include "seedprop/dataset/dataset.h"
#include "seedprop/store/label_io.h"
#include "test_util.h"

namespace seedprop {
namespace {

namespace fs = std::filesystem;

AnnotationSequencePair pair_at(int first, int count) {
  AnnotationSequencePair p;
  p.seed.frame_index = first;
  p.frame_count = count;
  p.seed.entries = {SeedEntry{0, {0.5, 0.5}, NormSize{0.1, 0.1}}};
  return p;
}

// Frame images live in a scratch directory; the dataset links them.
class DatasetTest : public ::testing::Test {
 protected:
  fs::path image(int frame) {
    const fs::path path = images_ / (frame_stem(frame) + ".pgm");
    if (!fs::exists(path)) {
      fs::create_directories(images_);
      write_text_file(path, "P5\n1 1\n255\n" + std::string(1, static_cast<char>(frame % 256)));
    }
    return path;
  }

  std::vector<DatasetFrame> frames_for(const std::vector<AnnotationSequencePair>& pairs,
                                       std::mt19937_64& rng, bool polygons = false) {
    std::vector<DatasetFrame> out;
    std::uniform_int_distribution<int> count(0, 6);
    for (const auto& p : pairs) {
      for (int f = p.first_frame(); f <= p.last_frame(); ++f) {
        DatasetFrame frame;
        frame.labels.frame_index = f;
        frame.labels.provenance = f == p.first_frame() ? Provenance::kManual : Provenance::kPropagated;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
          const NormBox b = testing::random_grid_box(rng, 3);
          frame.labels.boxes.push_back(b);
          if (polygons) {
            const double x0 = b.cx - b.w / 2, x1 = b.cx + b.w / 2;
            const double y0 = b.cy - b.h / 2, y1 = b.cy + b.h / 2;
            frame.labels.polygons.push_back(PolygonLabel{
                b.class_id, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
          }
        }
        frame.image = image(f);
        out.push_back(frame);
      }
    }
    return out;
  }

  testing::TempDir dir_;
  fs::path images_ = dir_ / "frames";
  const std::vector<std::string> classes_{"a", "b", "c"};
};

TEST_F(DatasetTest, RoundTripsRandomLabelSets) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    DatasetSpec spec;
    spec.pairs = {pair_at(0, 5), pair_at(10, 3)};
    const std::vector<DatasetFrame> frames = frames_for(spec.pairs, rng);
    const fs::path out = dir_ / ("ds" + std::to_string(trial));
    const DatasetManifest manifest = emit_dataset(out, frames, classes_, spec);
    EXPECT_EQ(manifest.frames.size(), 8u);
    const Dataset back = read_dataset(out);
    ASSERT_EQ(back.frames.size(), frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      EXPECT_EQ(back.frames[i].boxes, frames[i].labels.boxes);
      EXPECT_EQ(back.frames[i].frame_index, frames[i].labels.frame_index);
      EXPECT_EQ(back.frames[i].provenance, frames[i].labels.provenance);
    }
  }
}

TEST_F(DatasetTest, CountsAndLayout) {
  std::mt19937_64 rng(73);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 30)};
  std::vector<DatasetFrame> frames = frames_for(spec.pairs, rng);
  for (DatasetFrame& f : frames) {
    f.labels.boxes.clear();
    for (int k = 0; k < 20; ++k) f.labels.boxes.push_back(NormBox{0, 0.02 + 0.045 * k, 0.5, 0.01, 0.01});
  }
  frames[7].labels.boxes.clear();  // all tracks gone: still an (empty) file
  const fs::path out = dir_ / "ds";
  emit_dataset(out, frames, classes_, spec);
  std::size_t files = 0, lines = 0;
  for (const auto& entry : fs::directory_iterator(out / "labels")) {
    ++files;
    lines += read_box_file(entry.path()).size();
  }
  EXPECT_EQ(files, 30u);
  EXPECT_EQ(lines, 29u * 20u);
  EXPECT_TRUE(fs::exists(out / "labels" / "000007.txt"));
  EXPECT_EQ(fs::file_size(out / "labels" / "000007.txt"), 0u);
  EXPECT_EQ(read_text_file(out / "classes.txt"), "a\nb\nc\n");
  EXPECT_TRUE(fs::exists(out / "images" / "000000.pgm"));
  EXPECT_TRUE(fs::exists(out / kDatasetManifestName));
}

TEST_F(DatasetTest, ThreePairsOfEighteen) {
  std::mt19937_64 rng(79);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 18), pair_at(3300, 18), pair_at(6600, 18)};
  const DatasetManifest m = emit_dataset(dir_ / "ds", frames_for(spec.pairs, rng), classes_, spec);
  EXPECT_EQ(m.frames.size(), 54u);
  EXPECT_EQ(m.train, m.val);
}

TEST_F(DatasetTest, EmissionIsDeterministic) {
  std::mt19937_64 rng(83);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 6)};
  const std::vector<DatasetFrame> frames = frames_for(spec.pairs, rng);
  emit_dataset(dir_ / "a", frames, classes_, spec);
  emit_dataset(dir_ / "b", frames, classes_, spec);
  EXPECT_EQ(read_text_file(dir_ / "a" / kDatasetManifestName),
            read_text_file(dir_ / "b" / kDatasetManifestName));
  for (int f = 0; f < 6; ++f) {
    const std::string name = frame_stem(f) + ".txt";
    EXPECT_EQ(read_text_file(dir_ / "a" / "labels" / name), read_text_file(dir_ / "b" / "labels" / name));
  }
}

TEST_F(DatasetTest, SplitTakesLeadingFrames) {
  std::mt19937_64 rng(89);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 10)};
  spec.train_fraction = 0.75;
  const DatasetManifest m = emit_dataset(dir_ / "ds", frames_for(spec.pairs, rng), classes_, spec);
  EXPECT_EQ(m.train, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(m.val, (std::vector<int>{8, 9}));
  spec.train_fraction = 0.0;
  EXPECT_THROW(spec.validate(), ValidationError);
}

TEST_F(DatasetTest, SegmentVariantWritesPolygons) {
  std::mt19937_64 rng(97);
  DatasetSpec spec;
  spec.variant = DatasetVariant::kSegment;
  spec.pairs = {pair_at(0, 4)};
  std::vector<DatasetFrame> frames = frames_for(spec.pairs, rng, true);
  frames[0].labels.polygons.push_back(
      PolygonLabel{0, {{0.1, 0.1}, {0.2, 0.1}, {0.15, 0.2}}});  // force at least one
  emit_dataset(dir_ / "seg", frames, classes_, spec);
  EXPECT_TRUE(fs::is_directory(dir_ / "seg" / "labels_seg"));
  EXPECT_FALSE(fs::exists(dir_ / "seg" / "labels"));
  const Dataset back = read_dataset(dir_ / "seg");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ASSERT_EQ(back.frames[i].polygons.size(), frames[i].labels.polygons.size());
    for (std::size_t k = 0; k < frames[i].labels.polygons.size(); ++k) {
      EXPECT_EQ(format_polygon_line(back.frames[i].polygons[k]),
                format_polygon_line(frames[i].labels.polygons[k]));
    }
  }

  for (DatasetFrame& f : frames) f.labels.polygons.clear();
  EXPECT_THROW(emit_dataset(dir_ / "seg2", frames, classes_, spec), ValidationError);
}

TEST_F(DatasetTest, RejectsIncompleteOrInconsistentInput) {
  std::mt19937_64 rng(101);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 5)};
  std::vector<DatasetFrame> frames = frames_for(spec.pairs, rng);

  std::vector<DatasetFrame> missing(frames.begin(), frames.begin() + 3);
  try {
    emit_dataset(dir_ / "m", missing, classes_, spec);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(dir_ / "m" / kDatasetManifestName));

  std::vector<DatasetFrame> dup = frames;
  dup.push_back(frames[0]);
  EXPECT_THROW(emit_dataset(dir_ / "d", dup, classes_, spec), ValidationError);

  std::vector<DatasetFrame> extra = frames;
  extra.push_back(frames[0]);
  extra.back().labels.frame_index = 40;
  EXPECT_THROW(emit_dataset(dir_ / "e", extra, classes_, spec), ValidationError);

  std::vector<DatasetFrame> bad_class = frames;
  bad_class[1].labels.boxes.push_back(NormBox{5, 0.5, 0.5, 0.1, 0.1});
  EXPECT_THROW(emit_dataset(dir_ / "c", bad_class, classes_, spec), ValidationError);

  EXPECT_THROW(emit_dataset(dir_ / "z", std::vector<DatasetFrame>{}, classes_, spec),
               ValidationError);
  DatasetSpec no_pairs;
  EXPECT_THROW(emit_dataset(dir_ / "n", frames, classes_, no_pairs), ValidationError);

  emit_dataset(dir_ / "ok", frames, classes_, spec);
  EXPECT_THROW(emit_dataset(dir_ / "ok", frames, classes_, spec), ValidationError);
}

TEST_F(DatasetTest, DetectsTampering) {
  std::mt19937_64 rng(103);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 3)};
  emit_dataset(dir_ / "ds", frames_for(spec.pairs, rng), classes_, spec);
  ASSERT_NO_THROW(read_dataset(dir_ / "ds"));
  write_text_file(dir_ / "ds" / "labels" / "000001.txt", "0 0.5 0.5 0.1 0.1\n");
  EXPECT_THROW(read_dataset(dir_ / "ds"), ValidationError);
  EXPECT_THROW(read_dataset(dir_ / "nothing"), NotFoundError);
}

TEST_F(DatasetTest, RejectsOtherVersions) {
  std::mt19937_64 rng(107);
  DatasetSpec spec;
  spec.pairs = {pair_at(0, 2)};
  emit_dataset(dir_ / "ds", frames_for(spec.pairs, rng), classes_, spec);
  std::string manifest = read_text_file(dir_ / "ds" / kDatasetManifestName);
  const auto at = manifest.find("\"version\": 1");
  ASSERT_NE(at, std::string::npos);
  manifest.replace(at, 12, "\"version\": 7");
  write_text_file(dir_ / "ds" / kDatasetManifestName, manifest);
  EXPECT_THROW(read_dataset(dir_ / "ds"), ValidationError);
}

TEST(AblationTagTest, GridOrderAndLabels) {
  const std::vector<AblationTag> grid = ablation_grid();
  ASSERT_EQ(grid.size(), 8u);
  EXPECT_EQ(grid.front().label(), "Fixed Box Selection / No SAM / No Positional Filter");
  EXPECT_EQ(grid[1].label(), "Fixed Box Selection / No SAM / Positional Filter");
  EXPECT_EQ(grid[2].label(), "Fixed Box Selection / SAM / No Positional Filter");
  EXPECT_EQ(grid.back().label(), "Variable Box Selection / SAM / Positional Filter");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) EXPECT_FALSE(grid[i] == grid[j]);
  }
}

}  // namespace
}  // namespace seedprop
