#include <gtest/gtest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "yoloo/dataio.hpp"
#include "yoloo/errors.hpp"
#include "yoloo/random.hpp"
#include "yoloo/simkit.hpp"
#include "yoloo/tracker.hpp"

using namespace yoloo;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("yoloo_dataio_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrajectorySet random_tracks(std::uint64_t seed, int n) {
  Rng rng(seed);
  TrajectorySet t;
  for (int i = 0; i < n; ++i) {
    t.push_back({static_cast<int>(rng.index(20)), static_cast<int>(rng.index(1000)),
                 Box3D(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-2, 2),
                       rng.uniform(0.5, 6), rng.uniform(0.5, 3), rng.uniform(0.5, 3),
                       rng.uniform(-kPi, kPi)),
                 rng.uniform(0, 1), rng.index(2) ? "Car" : "Pedestrian"});
  }
  // Unique (frame, id) keys keep the canonical order well defined.
  canonicalize(t);
  t.erase(std::unique(t.begin(), t.end(),
                      [](const auto& a, const auto& b) {
                        return a.frame == b.frame && a.track_id == b.track_id;
                      }),
          t.end());
  return t;
}

}  // namespace

TEST(ReadDetections, EmptyFileIsEmptyStream) {
  TempDir dir;
  write_file(dir / "empty.txt", "");
  EXPECT_TRUE(read_detections(dir / "empty.txt").empty());
}

TEST(ReadDetections, SingleRow) {
  TempDir dir;
  write_file(dir / "one.txt",
             "2 -1 Car 0 0 -1.57 100 120 200 180 1.5 1.8 4.2 1.0 1.6 20.0 0.0 0.87\n");
  const DetectionStream s = read_detections(dir / "one.txt");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_TRUE(s[0].empty());
  EXPECT_TRUE(s[1].empty());
  ASSERT_EQ(s[2].size(), 1u);
  const Detection& d = s[2][0];
  EXPECT_DOUBLE_EQ(d.score, 0.87);
  EXPECT_EQ(d.category, "Car");
  EXPECT_DOUBLE_EQ(d.box.x, 20.0);
  EXPECT_DOUBLE_EQ(d.box.y, -1.0);
  EXPECT_DOUBLE_EQ(d.box.z, -1.6 + 0.75);
  EXPECT_DOUBLE_EQ(d.box.l, 4.2);
  EXPECT_DOUBLE_EQ(d.box.w, 1.8);
  EXPECT_DOUBLE_EQ(d.box.h, 1.5);
  EXPECT_NEAR(d.box.yaw, -kPi / 2, 1e-12);
}

TEST(ReadDetections, SkipsDontCareAndDefaultsScore) {
  TempDir dir;
  write_file(dir / "d.txt",
             "0 -1 DontCare -1 -1 -10 0 0 10 10 -1 -1 -1 -1000 -1000 -1000 -10\n"
             "0 -1 Pedestrian 0 0 0 0 0 10 10 1.7 0.6 0.8 2 1.7 8 0.3\n");
  const DetectionStream s = read_detections(dir / "d.txt");
  ASSERT_EQ(s.size(), 1u);
  ASSERT_EQ(s[0].size(), 1u);
  EXPECT_EQ(s[0][0].score, 1.0);
  EXPECT_EQ(s[0][0].category, "Pedestrian");
}

TEST(ReadDetections, SixteenFieldsNamesLineOne) {
  TempDir dir;
  write_file(dir / "bad.txt", "0 -1 Car 0 0 0 0 0 10 10 1.5 1.8 4.2 1 1.6 20\n");
  try {
    read_detections(dir / "bad.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("got 16"), std::string::npos);
  }
}

TEST(ReadDetections, BadNumberAndBadBoxNameTheLine) {
  TempDir dir;
  write_file(dir / "bad.txt",
             "0 -1 Car 0 0 0 0 0 10 10 1.5 1.8 4.2 1 1.6 20 0 0.9\n"
             "1 -1 Car 0 0 0 0 0 10 10 1.5 abc 4.2 1 1.6 20 0 0.9\n");
  try {
    read_detections(dir / "bad.txt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  write_file(dir / "neg.txt", "0 -1 Car 0 0 0 0 0 10 10 1.5 -1.8 4.2 1 1.6 20 0 0.9\n");
  EXPECT_THROW(read_detections(dir / "neg.txt"), ParseError);
  EXPECT_THROW(read_detections(dir / "missing.txt"), Error);
}

TEST(KittiAxes, CameraToGroundAndBack) {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const Box3D b(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-2, 2),
                  rng.uniform(0.5, 6), rng.uniform(0.5, 3), rng.uniform(0.5, 3),
                  rng.uniform(-kPi, kPi));
    const Box3D back = kitti_to_box(box_to_kitti(b));
    EXPECT_NEAR(back.x, b.x, 1e-12);
    EXPECT_NEAR(back.y, b.y, 1e-12);
    EXPECT_NEAR(back.z, b.z, 1e-12);
    EXPECT_NEAR(std::abs(normalize_angle(back.yaw - b.yaw)), 0.0, 1e-12);
  }
  // Facing along the camera x axis (rotation_y = 0) is heading -pi/2 on the ground.
  KittiTrackRow r;
  r.rotation_y = 0;
  EXPECT_NEAR(kitti_to_box(r).yaw, -kPi / 2, 1e-12);
}

TEST(WriteTracks, EmptySetIsEmptyFile) {
  TempDir dir;
  write_tracks({}, dir / "t.txt");
  EXPECT_TRUE(fs::exists(dir / "t.txt"));
  EXPECT_EQ(fs::file_size(dir / "t.txt"), 0u);
}

TEST(WriteTracks, RoundTripWithinPrintingPrecision) {
  TempDir dir;
  const TrajectorySet t = random_tracks(4, 200);
  write_tracks(t, dir / "t.txt");
  const TrajectorySet back = read_tracks(dir / "t.txt");
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back[i].frame, t[i].frame);
    EXPECT_EQ(back[i].track_id, t[i].track_id);
    EXPECT_EQ(back[i].category, t[i].category);
    EXPECT_NEAR(back[i].score, t[i].score, 5e-7);
    EXPECT_NEAR(back[i].box.x, t[i].box.x, 5e-7);
    EXPECT_NEAR(back[i].box.y, t[i].box.y, 5e-7);
    EXPECT_NEAR(back[i].box.z, t[i].box.z, 1e-6);
    EXPECT_NEAR(back[i].box.l, t[i].box.l, 5e-7);
    EXPECT_NEAR(back[i].box.w, t[i].box.w, 5e-7);
    EXPECT_NEAR(back[i].box.h, t[i].box.h, 5e-7);
    EXPECT_NEAR(std::abs(normalize_angle(back[i].box.yaw - t[i].box.yaw)), 0.0, 1e-6);
  }
  // A second write of the parsed rows reproduces the file byte for byte.
  write_tracks(back, dir / "u.txt");
  EXPECT_EQ(read_file(dir / "t.txt"), read_file(dir / "u.txt"));
}

TEST(WriteTracks, SortedAndSixDecimals) {
  const TrajectorySet t{{3, 2, Box3D(1, 2, 0.75, 4, 2, 1.5, 0), 0.5, "Car"},
                        {1, 9, Box3D(1, 2, 0.75, 4, 2, 1.5, 0), 0.5, "Car"},
                        {3, 1, Box3D(1, 2, 0.75, 4, 2, 1.5, 0), 0.5, "Car"}};
  const std::string text = format_tracks(t);
  EXPECT_EQ(text.substr(0, 4), "1 9 ");
  EXPECT_NE(text.find("\n3 1 "), std::string::npos);
  EXPECT_LT(text.find("\n3 1 "), text.find("\n3 2 "));
  EXPECT_NE(text.find(" 1.500000 2.000000 4.000000 -2.000000 0.000000 1.000000"), std::string::npos)
      << text;
}

TEST(FormatFixed, LocaleIndependentAndNoNegativeZero) {
  EXPECT_EQ(format_fixed(1.0, 2), "1.00");
  EXPECT_EQ(format_fixed(-0.001, 2), "0.00");
  EXPECT_EQ(format_fixed(-1.005, 6), "-1.005000");
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) {
    EXPECT_EQ(format_fixed(1.25, 2), "1.25");
  }
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST(GoldenFile, ModerateScenarioTracks) {
  const Scenario s = crafted_scenario("moderate");
  const std::string text = format_tracks(run_sequence(detection_stream(s), TrackerConfig{}));
  const std::string golden = read_file(fs::path(YOLOO_TEST_DATA_DIR) / "moderate_tracks.txt");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(text, golden);
}

TEST(TextPrompt, UnitSquareTemplate) {
  const std::string p = format_text_prompt("Car", bev_corners(Box3D(0, 0, 0, 2, 2, 1, 0)));
  EXPECT_EQ(p,
            "The category of the object is Car, and its location can be represented by four "
            "coordinates: (1.00, 1.00), (-1.00, 1.00), (-1.00, -1.00), and (1.00, -1.00).");
  EXPECT_EQ(p, format_text_prompt("Car", bev_corners(Box3D(0, 0, 0, 2, 2, 1, 0))));
}

TEST(TextPrompt, FourByTwoBox) {
  const std::string p = format_text_prompt("Pedestrian", bev_corners(Box3D(0, 0, 0, 4, 2, 1, 0)));
  EXPECT_EQ(p,
            "The category of the object is Pedestrian, and its location can be represented by "
            "four coordinates: (2.00, 1.00), (-2.00, 1.00), (-2.00, -1.00), and (2.00, -1.00).");
}

TEST(Scenario, RoundTripIsLossless) {
  TempDir dir;
  SimConfig cfg;
  cfg.position_noise = 0.3;
  cfg.clutter_rate = 1;
  cfg.p_miss = 0.1;
  cfg.n_frames = 10;
  cfg.seed = 12;
  Scenario s = generate(cfg);
  s.name = "noisy";
  attach_oracle_embeddings(s, 0.3, 12);
  s.frames[0].detections[0].detection.patch = cuboid_patch(Box3D(0, 0, 0, 4, 2, 1.5, 0), 5, 1);
  write_scenario(s, dir / "s.jsonl");
  const Scenario back = read_scenario(dir / "s.jsonl");
  EXPECT_EQ(back.name, "noisy");
  EXPECT_EQ(back.config, s.config);
  ASSERT_EQ(back.frames.size(), s.frames.size());
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    EXPECT_EQ(back.frames[t].ground_truth, s.frames[t].ground_truth);
    ASSERT_EQ(back.frames[t].detections.size(), s.frames[t].detections.size());
    for (std::size_t i = 0; i < s.frames[t].detections.size(); ++i) {
      const auto& a = s.frames[t].detections[i];
      const auto& b = back.frames[t].detections[i];
      EXPECT_EQ(a.object_id, b.object_id);
      EXPECT_EQ(a.detection.box, b.detection.box);
      EXPECT_EQ(a.detection.score, b.detection.score);
      EXPECT_EQ(*a.detection.embedding, *b.detection.embedding);
      EXPECT_EQ(a.detection.patch.has_value(), b.detection.patch.has_value());
      if (a.detection.patch) EXPECT_EQ(a.detection.patch->points, b.detection.patch->points);
    }
  }
  write_scenario(s, dir / "bare.jsonl", false);
  const Scenario bare = read_scenario(dir / "bare.jsonl");
  EXPECT_FALSE(bare.frames[0].detections[0].detection.embedding.has_value());
}

TEST(Scenario, MalformedLineIsReported) {
  TempDir dir;
  write_file(dir / "s.jsonl", "{\"scenario\": {\"name\": \"x\", \"config\": {}}}\n{\"frame\": 0\n");
  try {
    read_scenario(dir / "s.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 1u);
  }
}

TEST(Fixtures, RoundTripAndSynthesizedPatches) {
  TempDir dir;
  ToyDatasetConfig tc;
  tc.n_identities = 4;
  tc.n_sequences = 2;
  tc.observations_per_identity = 2;
  tc.raw_points = 10;
  const TrackletDataset ds = make_toy_dataset(tc);
  write_fixture_embeddings(fixtures_from_dataset(ds), dir / "f.jsonl");
  const auto records = read_fixture_embeddings(dir / "f.jsonl");
  ASSERT_EQ(records.size(), ds.observations.size());
  const TrackletDataset back = tracklets_from_fixtures(records, 10, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(back.observations[i].image, ds.observations[i].image);
    EXPECT_EQ(back.observations[i].points.points, ds.observations[i].points.points);
    EXPECT_EQ(back.observations[i].object_id, ds.observations[i].object_id);
  }

  std::vector<FixtureRecord> dims_only = records;
  for (auto& r : dims_only) {
    r.points.reset();
    r.dims = std::array<double, 3>{4, 2, 1.5};
  }
  const TrackletDataset synth = tracklets_from_fixtures(dims_only, 30, 1);
  EXPECT_EQ(synth.observations[0].points.size(), 30);
  dims_only[0].dims.reset();
  EXPECT_THROW(tracklets_from_fixtures(dims_only, 30, 1), InvalidArgumentError);
}

TEST(Fixtures, NonUnitEmbeddingRejected) {
  TempDir dir;
  std::string line = "{\"sequence_id\": 0, \"frame\": 0, \"object_id\": 1, \"image_embedding\": [2, 0], "
                     "\"text_embedding\": [1, 0], \"dims\": [1, 1, 1]}\n";
  write_file(dir / "f.jsonl", line);
  EXPECT_THROW(read_fixture_embeddings(dir / "f.jsonl"), ParseError);
}

TEST(Report, JsonHasCounts) {
  EvalReport r;
  r.gt_count = 10;
  r.fp = 1;
  r.fn = 2;
  r.idsw = 1;
  r.finalize();
  const std::string j = report_to_json(r);
  EXPECT_NE(j.find("\"mota\""), std::string::npos);
  EXPECT_NE(j.find("\"idsw\": 1"), std::string::npos);
}

TEST(KittiGroundTruth, KeepsLabelledRows) {
  TempDir dir;
  write_file(dir / "gt.txt",
             "0 3 Car 0 0 0 0 0 10 10 1.5 1.8 4.2 1 1.6 20 0\n"
             "0 -1 DontCare -1 -1 -10 0 0 10 10 -1 -1 -1 -1000 -1000 -1000 -10\n"
             "2 3 Car 0 0 0 0 0 10 10 1.5 1.8 4.2 1 1.6 21 0\n");
  const GroundTruthFrames gt = read_kitti_ground_truth(dir / "gt.txt");
  ASSERT_EQ(gt.size(), 3u);
  EXPECT_EQ(gt[0].size(), 1u);
  EXPECT_TRUE(gt[1].empty());
  EXPECT_EQ(gt[2][0].id, 3);
}
