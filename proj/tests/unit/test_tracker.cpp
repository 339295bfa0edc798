#include <gtest/gtest.h>

#include <map>
#include <set>

#include "yoloo/errors.hpp"
#include "yoloo/moteval.hpp"
#include "yoloo/simkit.hpp"
#include "yoloo/tracker.hpp"

using namespace yoloo;

namespace {

Embedding basis(int k) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v(k) = 1;
  return Embedding::from_unit(v);
}

Detection det_at(double x, double y, int identity) {
  Detection d;
  d.box = Box3D(x, y, 0, 4, 2, 1.5, 0);
  d.embedding = basis(identity);
  return d;
}

Scenario clean_scenario(std::uint64_t seed) {
  SimConfig cfg;
  cfg.seed = seed;
  Scenario s = generate(cfg);
  attach_oracle_embeddings(s, cfg.embedding_noise, seed);
  return s;
}

}  // namespace

TEST(TrackerStep, FirstFrameBirthsTentativeTracks) {
  const std::vector<Detection> dets{det_at(0, 0, 0), det_at(20, 0, 1), det_at(0, 20, 2)};
  const StepResult r = step(dets, TrackerState{}, TrackerConfig{});
  EXPECT_TRUE(r.output.empty());
  ASSERT_EQ(r.state.tracks.size(), 3u);
  std::set<int> ids;
  for (const Track& t : r.state.tracks) {
    EXPECT_EQ(t.status, TrackStatus::kTentative);
    ids.insert(t.id);
  }
  EXPECT_EQ(ids.size(), 3u);
  EXPECT_EQ(r.state.frame, 1);
}

TEST(TrackerStep, EmptyFrameAgesTracksWithoutBirths) {
  const std::vector<Detection> dets{det_at(0, 0, 0), det_at(20, 0, 1)};
  TrackerState s = step(dets, TrackerState{}, TrackerConfig{}).state;
  const StepResult r = step({}, s, TrackerConfig{});
  ASSERT_EQ(r.state.tracks.size(), 2u);
  for (const Track& t : r.state.tracks) EXPECT_EQ(t.misses, 1);
  EXPECT_EQ(r.state.next_id, s.next_id);
}

TEST(TrackerStep, SteadyObjectConfirmedOnThirdFrame) {
  Tracker tracker;
  std::set<int> ids;
  for (int f = 0; f < 5; ++f) {
    const std::vector<Detection> dets{det_at(f * 1.0, 0, 0)};
    const StepResult r = tracker.step(dets);
    if (f < 2) {
      EXPECT_TRUE(r.output.empty()) << "frame " << f;
    } else {
      ASSERT_EQ(r.output.size(), 1u) << "frame " << f;
      EXPECT_EQ(r.output[0].frame, f);
      ids.insert(r.output[0].track_id);
    }
    if (f == 2) {
      ASSERT_EQ(r.backfill.size(), 2u);
      EXPECT_EQ(r.backfill[0].frame, 0);
      EXPECT_EQ(r.backfill[1].frame, 1);
      ids.insert(r.backfill[0].track_id);
    }
  }
  EXPECT_EQ(ids.size(), 1u);
  EXPECT_EQ(tracker.state().tracks.size(), 1u);
}

TEST(TrackerStep, TrackDiesAfterMaxAgeMisses) {
  TrackerConfig cfg;
  TrackerState s;
  for (int f = 0; f < 3; ++f) s = step(std::vector<Detection>{det_at(0, 0, 0)}, s, cfg).state;
  ASSERT_EQ(s.tracks.size(), 1u);
  for (int miss = 1; miss <= cfg.max_age; ++miss) {
    s = step({}, s, cfg).state;
    ASSERT_EQ(s.tracks.size(), 1u) << "after miss " << miss;
  }
  s = step({}, s, cfg).state;
  EXPECT_TRUE(s.tracks.empty());
  // A returning object gets a new id.
  const StepResult back = step(std::vector<Detection>{det_at(0, 0, 0)}, s, cfg);
  EXPECT_EQ(back.state.tracks.at(0).id, 2);
}

TEST(TrackerStep, GateBlocksFarDetections) {
  TrackerState s = step(std::vector<Detection>{det_at(0, 0, 0)}, TrackerState{}, {}).state;
  // Same identity but 30 m away: F-GAM rejects it, so a second track is born.
  s = step(std::vector<Detection>{det_at(30, 0, 0)}, s, {}).state;
  EXPECT_EQ(s.tracks.size(), 2u);
}

TEST(TrackerStep, EmaBlendsEmbeddings) {
  TrackerConfig cfg;
  cfg.embedding_update_mode = EmbeddingUpdate::kEma;
  cfg.ema_momentum = 0.75;
  TrackerState s = step(std::vector<Detection>{det_at(0, 0, 0)}, TrackerState{}, cfg).state;
  Detection d = det_at(0, 0, 0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v(0) = 0.8;
  v(1) = 0.6;
  d.embedding = Embedding::from_unit(v);
  s = step(std::vector<Detection>{d}, s, cfg).state;
  Eigen::VectorXd expected = 0.75 * basis(0).vector() + 0.25 * v;
  expected.normalize();
  EXPECT_LT((s.tracks.at(0).embedding.vector() - expected).cwiseAbs().maxCoeff(), 1e-12);

  cfg.embedding_update_mode = EmbeddingUpdate::kReplace;
  TrackerState r = step(std::vector<Detection>{det_at(0, 0, 0)}, TrackerState{}, cfg).state;
  r = step(std::vector<Detection>{d}, r, cfg).state;
  EXPECT_EQ(r.tracks.at(0).embedding, *d.embedding);
}

TEST(TrackerStep, MissingEmbeddingWithoutEncoderIsAnError) {
  Detection d;
  d.box = Box3D(0, 0, 0, 4, 2, 1.5, 0);
  EXPECT_THROW(step(std::vector<Detection>{d}, TrackerState{}, TrackerConfig{}), Error);
  TrackerConfig geom;
  geom.association = AssociationMode::kGeomOnly;
  EXPECT_NO_THROW(step(std::vector<Detection>{d}, TrackerState{}, geom));
}

TEST(RunSequence, EmptyStream) {
  EXPECT_TRUE(run_sequence({}, TrackerConfig{}).empty());
}

TEST(RunSequence, CleanScenarioIsBijectiveRelabeling) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Scenario s = clean_scenario(seed);
    const TrajectorySet out = run_sequence(detection_stream(s), TrackerConfig{});
    // Map each row to the nearest ground-truth object of its frame.
    std::map<int, int> hyp_to_gt, gt_to_hyp;
    std::size_t rows = 0;
    for (const TrajectoryRow& r : out) {
      const auto& gts = s.frames.at(r.frame).ground_truth;
      int best = -1;
      double best_d = 1e9;
      for (const auto& g : gts) {
        const double d = centroid_distance(g.box, r.box);
        if (d < best_d) {
          best_d = d;
          best = g.id;
        }
      }
      ASSERT_LT(best_d, 1.0);
      auto [it, fresh] = hyp_to_gt.emplace(r.track_id, best);
      EXPECT_EQ(it->second, best);
      auto [jt, fresh2] = gt_to_hyp.emplace(best, r.track_id);
      EXPECT_EQ(jt->second, r.track_id);
      ++rows;
    }
    std::size_t gt_rows = 0;
    for (const auto& f : s.frames) gt_rows += f.ground_truth.size();
    EXPECT_EQ(rows, gt_rows);
    EXPECT_EQ(hyp_to_gt.size(), static_cast<std::size_t>(s.config.n_objects));
  }
}

TEST(RunSequence, WithoutBackfillDropsTentativeFrames) {
  const Scenario s = clean_scenario(4);
  TrackerConfig cfg;
  cfg.backfill_tentative = false;
  const TrajectorySet out = run_sequence(detection_stream(s), cfg);
  for (const TrajectoryRow& r : out) EXPECT_GE(r.frame, 2);
  EXPECT_EQ(out.size(), static_cast<std::size_t>(s.config.n_objects * (s.config.n_frames - 2)));
}

TEST(RunSequence, DeterministicAndCanonicallyOrdered) {
  SimConfig cfg;
  cfg.position_noise = 0.3;
  cfg.p_miss = 0.1;
  cfg.clutter_rate = 2;
  cfg.seed = 9;
  Scenario s = generate(cfg);
  attach_oracle_embeddings(s, cfg.embedding_noise, 9);
  const DetectionStream stream = detection_stream(s);
  const TrajectorySet a = run_sequence(stream, TrackerConfig{});
  const TrajectorySet b = run_sequence(stream, TrackerConfig{});
  EXPECT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_TRUE(std::tie(a[i - 1].frame, a[i - 1].track_id) < std::tie(a[i].frame, a[i].track_id));
  }
}

TEST(RunSequence, UniqueIdsPerFrameOnNoisyScenes) {
  SimConfig cfg;
  cfg.n_objects = 20;
  cfg.position_noise = 0.3;
  cfg.p_miss = 0.1;
  cfg.clutter_rate = 2;
  cfg.seed = 2;
  Scenario s = generate(cfg);
  attach_oracle_embeddings(s, cfg.embedding_noise, 2);
  std::map<int, std::set<int>> ids_by_frame;
  for (const TrajectoryRow& r : run_sequence(detection_stream(s), TrackerConfig{})) {
    EXPECT_TRUE(ids_by_frame[r.frame].insert(r.track_id).second);
  }
}

TEST(RunSequence, GatingReducesSwitchesOnModerateScene) {
  const Scenario s = crafted_scenario("moderate");
  const GroundTruthFrames gt = ground_truth(s);
  TrackerConfig fgc, utr;
  utr.association = AssociationMode::kUtrOnly;
  const EvalReport with_gate = evaluate(gt, run_sequence(detection_stream(s), fgc));
  const EvalReport without = evaluate(gt, run_sequence(detection_stream(s), utr));
  EXPECT_LT(with_gate.idsw, without.idsw);
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  c.min_hits = 0;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  c = {};
  c.ema_momentum = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  EXPECT_EQ(embedding_update_from_string("ema"), EmbeddingUpdate::kEma);
  EXPECT_THROW(embedding_update_from_string("mean"), InvalidArgumentError);
}
