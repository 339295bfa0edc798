#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "yoloo/errors.hpp"
#include "yoloo/simkit.hpp"

using namespace yoloo;

TEST(Generate, NoiseFreeDetectionsEqualGroundTruth) {
  SimConfig cfg;
  cfg.seed = 3;
  const Scenario s = generate(cfg);
  ASSERT_EQ(s.frames.size(), 50u);
  for (const ScenarioFrame& f : s.frames) {
    ASSERT_EQ(f.detections.size(), f.ground_truth.size());
    for (const ScenarioDetection& d : f.detections) {
      ASSERT_TRUE(d.object_id.has_value());
      const auto it = std::find_if(f.ground_truth.begin(), f.ground_truth.end(),
                                   [&](const GroundTruthObject& g) { return g.id == *d.object_id; });
      ASSERT_NE(it, f.ground_truth.end());
      EXPECT_EQ(d.detection.box, it->box);
    }
  }
}

TEST(Generate, CertainMissRemovesTrueDetections) {
  SimConfig cfg;
  cfg.p_miss = 1.0;
  cfg.clutter_rate = 0.5;
  const Scenario s = generate(cfg);
  for (const ScenarioFrame& f : s.frames)
    for (const ScenarioDetection& d : f.detections) EXPECT_FALSE(d.object_id.has_value());
}

TEST(Generate, ClutterCountFollowsPoisson) {
  SimConfig cfg;
  cfg.clutter_rate = 2.0;
  cfg.n_frames = 100;
  cfg.seed = 17;
  const Scenario s = generate(cfg);
  int clutter = 0;
  for (const ScenarioFrame& f : s.frames)
    for (const ScenarioDetection& d : f.detections) clutter += d.object_id ? 0 : 1;
  EXPECT_LE(std::abs(clutter - 200), 3 * std::sqrt(200.0));
}

TEST(Generate, ObjectsMoveSmoothly) {
  SimConfig cfg;
  cfg.turn_noise = 0.05;
  cfg.seed = 5;
  const Scenario s = generate(cfg);
  for (std::size_t t = 1; t < s.frames.size(); ++t) {
    for (std::size_t k = 0; k < s.frames[t].ground_truth.size(); ++k) {
      const Box3D& a = s.frames[t - 1].ground_truth[k].box;
      const Box3D& b = s.frames[t].ground_truth[k].box;
      EXPECT_LE(centroid_distance(a, b), cfg.speed_max + 3 * cfg.turn_noise);
    }
  }
}

TEST(Generate, Deterministic) {
  SimConfig cfg;
  cfg.position_noise = 0.3;
  cfg.p_miss = 0.1;
  cfg.clutter_rate = 2;
  cfg.seed = 8;
  const Scenario a = generate(cfg), b = generate(cfg);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    EXPECT_EQ(a.frames[t].ground_truth, b.frames[t].ground_truth);
    ASSERT_EQ(a.frames[t].detections.size(), b.frames[t].detections.size());
    for (std::size_t i = 0; i < a.frames[t].detections.size(); ++i) {
      EXPECT_EQ(a.frames[t].detections[i].detection.box, b.frames[t].detections[i].detection.box);
      EXPECT_EQ(a.frames[t].detections[i].object_id, b.frames[t].detections[i].object_id);
    }
  }
}

TEST(Generate, RejectsBadConfig) {
  SimConfig cfg;
  cfg.p_miss = 1.5;
  EXPECT_THROW(generate(cfg), InvalidArgumentError);
  cfg = {};
  cfg.categories.clear();
  EXPECT_THROW(generate(cfg), InvalidArgumentError);
}

TEST(OracleEmbeddings, ZeroNoiseIsIdentityConstant) {
  SimConfig cfg;
  cfg.n_frames = 5;
  const Scenario s = generate(cfg);
  const auto e = oracle_embeddings(s, 0.0, 1);
  std::map<int, Embedding> first;
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    for (std::size_t i = 0; i < s.frames[t].detections.size(); ++i) {
      const int id = *s.frames[t].detections[i].object_id;
      const auto [it, fresh] = first.emplace(id, e[t][i]);
      if (!fresh) EXPECT_NEAR(utr_similarity_cost(it->second, e[t][i]), 0.0, 1e-15);
      EXPECT_EQ(e[t][i].dim(), kEmbeddingDim);
    }
  }
}

TEST(OracleEmbeddings, DistinctIdentitiesNearlyOrthogonal) {
  SimConfig cfg;
  cfg.n_objects = 50;
  cfg.n_frames = 1;
  const Scenario s = generate(cfg);
  const auto e = oracle_embeddings(s, 0.0, 2);
  double sum = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < e[0].size() && pairs < 1000; ++i)
    for (std::size_t j = i + 1; j < e[0].size() && pairs < 1000; ++j, ++pairs)
      sum += std::abs(e[0][i].dot(e[0][j]));
  EXPECT_EQ(pairs, 1000);
  EXPECT_LT(sum / pairs, 0.1);
}

TEST(OracleEmbeddings, NoiseScalesSpread) {
  SimConfig cfg;
  cfg.n_objects = 1;
  cfg.n_frames = 200;
  const Scenario s = generate(cfg);
  for (double kappa : {0.3, 1.0}) {
    const auto e = oracle_embeddings(s, kappa, 3);
    double mean_cost = 0;
    for (std::size_t t = 1; t < e.size(); ++t) mean_cost += utr_similarity_cost(e[0][0], e[t][0]);
    mean_cost /= static_cast<double>(e.size() - 1);
    // Two independent perturbations of size kappa on a unit anchor: cosine 1/(1+kappa^2).
    EXPECT_NEAR(mean_cost, 1.0 - 1.0 / (1.0 + kappa * kappa), 0.03);
  }
}

TEST(OracleEmbeddings, DeterministicAndAttachable) {
  SimConfig cfg;
  cfg.clutter_rate = 1;
  Scenario s = generate(cfg);
  const auto a = oracle_embeddings(s, 0.3, 4), b = oracle_embeddings(s, 0.3, 4);
  EXPECT_EQ(a, b);
  attach_oracle_embeddings(s, 0.3, 4);
  for (std::size_t t = 0; t < s.frames.size(); ++t)
    for (std::size_t i = 0; i < s.frames[t].detections.size(); ++i)
      EXPECT_EQ(*s.frames[t].detections[i].detection.embedding, a[t][i]);
}

TEST(CuboidPatch, CountAndContainment) {
  const Box3D box(3, -2, 1, 4, 2, 1.5, 0.7);
  const PointPatch p = cuboid_patch(box, 400, 5);
  ASSERT_EQ(p.size(), 400);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    EXPECT_LE(std::abs(p.points(i, 0)), 0.55 * box.l);
    EXPECT_LE(std::abs(p.points(i, 1)), 0.55 * box.w);
    EXPECT_LE(std::abs(p.points(i, 2)), 0.55 * box.h);
  }
  EXPECT_EQ(cuboid_patch(box, 400, 5).points, p.points);
  EXPECT_NE(cuboid_patch(box, 400, 6).points, p.points);
}

TEST(CraftedScenarios, Shapes) {
  for (const char* name : {"easy", "moderate", "difficult"}) {
    const Scenario s = crafted_scenario(name);
    EXPECT_EQ(s.name, name);
    EXPECT_FALSE(s.frames.empty());
    for (const auto& f : s.frames)
      for (const auto& d : f.detections) EXPECT_TRUE(d.detection.embedding.has_value());
    EXPECT_EQ(ground_truth(s).size(), s.frames.size());
    EXPECT_EQ(detection_stream(s).size(), s.frames.size());
  }
  EXPECT_THROW(crafted_scenario("impossible"), InvalidArgumentError);
}

TEST(CraftedScenarios, DifficultObjectOutrunsItsLength) {
  const Scenario s = crafted_scenario("difficult");
  bool outruns = false;
  for (std::size_t t = 1; t < s.frames.size(); ++t) {
    for (const auto& g : s.frames[t].ground_truth) {
      for (const auto& p : s.frames[t - 1].ground_truth) {
        if (p.id == g.id && centroid_distance(p.box, g.box) > g.box.l) outruns = true;
      }
    }
  }
  EXPECT_TRUE(outruns);
}

TEST(ToyDataset, LayoutMatchesConfig) {
  ToyDatasetConfig cfg;
  cfg.raw_points = 50;
  const TrackletDataset ds = make_toy_dataset(cfg);
  EXPECT_EQ(ds.observations.size(), 120u);
  std::map<int, int> per_seq;
  for (const auto& o : ds.observations) {
    ++per_seq[o.sequence_id];
    EXPECT_EQ(o.points.size(), 50);
    EXPECT_EQ(o.sequence_id, o.object_id % cfg.n_sequences);
  }
  EXPECT_EQ(per_seq.size(), 4u);
  EXPECT_EQ(toy_identity_shapes(cfg).size(), 20u);
}
