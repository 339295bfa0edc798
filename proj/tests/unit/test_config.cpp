#include <gtest/gtest.h>

#include <filesystem>

#include "yoloo/config.hpp"
#include "yoloo/errors.hpp"

using namespace yoloo;

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig cfg;
  EXPECT_EQ(parse_run_config(dump_run_config(cfg)), cfg);
}

TEST(RunConfig, ModifiedRoundTripThroughFile) {
  RunConfig cfg;
  cfg.kalman.process_noise_scale = 0.05;
  cfg.tracker.min_hits = 2;
  cfg.tracker.embedding_update_mode = EmbeddingUpdate::kEma;
  cfg.assoc.mode = AssociationMode::kUtrCgc;
  cfg.assoc.max_cost = 1.0;
  cfg.lgpenc.test_points = 300;
  cfg.utcl.loss.epsilon = 0.3;
  cfg.utcl.train.epochs = 7;
  cfg.utcl.train.seed = 99;
  cfg.simkit.categories = {"Car", "Cyclist"};
  cfg.simkit.p_miss = 0.25;
  cfg.moteval.match_threshold = 1.5;
  const auto path = std::filesystem::temp_directory_path() / "yoloo_config_test.json";
  save_run_config(cfg, path);
  EXPECT_EQ(load_run_config(path), cfg);
  std::filesystem::remove(path);
}

TEST(RunConfig, PartialFileKeepsDefaults) {
  const RunConfig cfg = parse_run_config(R"({"tracker": {"max_age": 4}})");
  EXPECT_EQ(cfg.tracker.max_age, 4);
  EXPECT_EQ(cfg.tracker.min_hits, 3);
  EXPECT_EQ(cfg.utcl.train.learning_rate, 0.003);
}

TEST(RunConfig, UnknownKeysRejected) {
  EXPECT_THROW(parse_run_config(R"({"tracker": {"max_ages": 4}})"), InvalidArgumentError);
  EXPECT_THROW(parse_run_config(R"({"trackers": {}})"), InvalidArgumentError);
  try {
    parse_run_config(R"({"simkit": {"noise": 1}})");
    FAIL();
  } catch (const InvalidArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("simkit.noise"), std::string::npos);
  }
}

TEST(RunConfig, BadValuesRejected) {
  EXPECT_THROW(parse_run_config("{not json"), InvalidArgumentError);
  EXPECT_THROW(parse_run_config(R"({"tracker": {"min_hits": "three"}})"), InvalidArgumentError);
  EXPECT_THROW(parse_run_config(R"({"tracker": {"min_hits": 0}})"), InvalidArgumentError);
  EXPECT_THROW(parse_run_config(R"({"assoc": {"mode": "iou"}})"), InvalidArgumentError);
  EXPECT_THROW(parse_run_config(R"({"kalman": 3})"), InvalidArgumentError);
}

TEST(RunConfig, TrackerConfigFoldsSections) {
  RunConfig cfg;
  cfg.kalman.measurement_noise_scale = 2.0;
  cfg.assoc.mode = AssociationMode::kGeomOnly;
  cfg.assoc.max_cost = 0.9;
  cfg.lgpenc.test_points = 123;
  const TrackerConfig t = cfg.tracker_config();
  EXPECT_EQ(t.kalman.measurement_noise_scale, 2.0);
  EXPECT_EQ(t.association, AssociationMode::kGeomOnly);
  EXPECT_EQ(t.max_cost, 0.9);
  EXPECT_EQ(t.encoder_points, 123);
}

TEST(Overrides, DottedAssignments) {
  RunConfig cfg;
  apply_override(cfg, "tracker.min_hits=2");
  apply_override(cfg, "assoc.mode=utr");
  apply_override(cfg, "simkit.position_noise=0.3");
  apply_override(cfg, "simkit.categories=[\"Car\",\"Pedestrian\"]");
  apply_override(cfg, "utcl.learn_tau=false");
  EXPECT_EQ(cfg.tracker.min_hits, 2);
  EXPECT_EQ(cfg.assoc.mode, AssociationMode::kUtrOnly);
  EXPECT_EQ(cfg.simkit.position_noise, 0.3);
  EXPECT_EQ(cfg.simkit.categories.size(), 2u);
  EXPECT_FALSE(cfg.utcl.train.learn_tau);
}

TEST(Overrides, Rejections) {
  RunConfig cfg;
  EXPECT_THROW(apply_override(cfg, "tracker.min_hits"), InvalidArgumentError);
  EXPECT_THROW(apply_override(cfg, "=3"), InvalidArgumentError);
  EXPECT_THROW(apply_override(cfg, "tracker.nope=3"), InvalidArgumentError);
  EXPECT_THROW(apply_override(cfg, "tracker=3"), InvalidArgumentError);
  EXPECT_THROW(apply_override(cfg, "tracker.min_hits=-1"), InvalidArgumentError);
  EXPECT_EQ(cfg, RunConfig{});
}
