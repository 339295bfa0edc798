#include <gtest/gtest.h>

#include "yoloo/errors.hpp"
#include "yoloo/moteval.hpp"
#include "yoloo/simkit.hpp"

using namespace yoloo;

namespace {

Box3D at(double x, double y) { return Box3D(x, y, 0, 4, 2, 1.5, 0); }

// Two objects on parallel lanes 10 m apart for `frames` frames.
GroundTruthFrames two_lanes(int frames) {
  GroundTruthFrames gt(frames);
  for (int t = 0; t < frames; ++t) {
    gt[t].push_back({1, at(t, 0), "Car"});
    gt[t].push_back({2, at(t, 10), "Car"});
  }
  return gt;
}

TrajectorySet as_hypothesis(const GroundTruthFrames& gt, int id_offset = 0) {
  TrajectorySet h;
  for (int t = 0; t < static_cast<int>(gt.size()); ++t)
    for (const auto& g : gt[t]) h.push_back({t, g.id + id_offset, g.box, 1.0, g.category});
  return h;
}

}  // namespace

TEST(Evaluate, PerfectHypothesis) {
  const GroundTruthFrames gt = two_lanes(5);
  const EvalReport r = evaluate(gt, as_hypothesis(gt));
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.gt_count, 10);
  EXPECT_EQ(r.matches, 10);
}

TEST(Evaluate, MotaFormula) {
  EvalReport r;
  r.gt_count = 10;
  r.fp = 1;
  r.fn = 2;
  r.idsw = 1;
  r.finalize();
  EXPECT_DOUBLE_EQ(r.mota, 0.6);
  EXPECT_DOUBLE_EQ(r.fp_rate, 0.1);
  EXPECT_DOUBLE_EQ(r.miss_rate, 0.2);
}

TEST(Evaluate, CountsMissesAndFalsePositives) {
  // Ten ground-truth objects over five frames; one hypothesis row moved
  // out of range (one FP and one FN), one row dropped (one FN).
  const GroundTruthFrames gt = two_lanes(5);
  TrajectorySet h = as_hypothesis(gt);
  h[3].box = at(100, 100);
  h.erase(h.begin() + 7);
  const EvalReport r = evaluate(gt, h);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 2);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_DOUBLE_EQ(r.mota, 1.0 - 3.0 / 10.0);
}

TEST(Evaluate, SwappedIdsCountTwoSwitches) {
  const GroundTruthFrames gt = two_lanes(6);
  TrajectorySet h = as_hypothesis(gt);
  for (auto& row : h)
    if (row.frame >= 3) row.track_id = 3 - row.track_id;
  const EvalReport r = evaluate(gt, h);
  EXPECT_EQ(r.idsw, 2);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_DOUBLE_EQ(r.mota, 1.0 - 2.0 / 12.0);
}

TEST(Evaluate, SwitchAcrossGapIsCounted) {
  const GroundTruthFrames gt = two_lanes(6);
  TrajectorySet h;
  for (const auto& row : as_hypothesis(gt)) {
    if (row.track_id != 1) {
      h.push_back(row);
    } else if (row.frame < 2) {
      h.push_back(row);
    } else if (row.frame >= 4) {
      TrajectorySet::value_type r = row;
      r.track_id = 7;
      h.push_back(r);
    }
  }
  const EvalReport r = evaluate(gt, h);
  EXPECT_EQ(r.fn, 2);
  EXPECT_EQ(r.idsw, 1);
}

TEST(Evaluate, KeepsPreviousCorrespondenceWithinThreshold) {
  // Hypothesis 5 stays on object 1 although hypothesis 6 lands closer.
  GroundTruthFrames gt(2);
  gt[0].push_back({1, at(0, 0), "Car"});
  gt[1].push_back({1, at(0, 0), "Car"});
  TrajectorySet h{{0, 5, at(0, 0), 1, "Car"}, {1, 5, at(1.5, 0), 1, "Car"}, {1, 6, at(0.1, 0), 1, "Car"}};
  const EvalReport r = evaluate(gt, h);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.fp, 1);
}

TEST(Evaluate, ThresholdIsAppliedToCenterDistance) {
  GroundTruthFrames gt(1);
  gt[0].push_back({1, at(0, 0), "Car"});
  const TrajectorySet near{{0, 1, at(1.9, 0), 1, "Car"}};
  const TrajectorySet far{{0, 1, at(2.1, 0), 1, "Car"}};
  EXPECT_EQ(evaluate(gt, near).matches, 1);
  EXPECT_EQ(evaluate(gt, far).matches, 0);
  EXPECT_EQ(evaluate(gt, far, 3.0).matches, 1);
}

TEST(Evaluate, RelabelingHypothesesChangesNothing) {
  SimConfig cfg;
  cfg.position_noise = 0.4;
  cfg.p_miss = 0.2;
  cfg.seed = 4;
  const Scenario s = generate(cfg);
  TrajectorySet h;
  for (int t = 0; t < static_cast<int>(s.frames.size()); ++t)
    for (const auto& d : s.frames[t].detections)
      h.push_back({t, *d.object_id, d.detection.box, 1.0, "Car"});
  const EvalReport a = evaluate(ground_truth(s), h);
  for (auto& row : h) row.track_id = 1000 - 7 * row.track_id;
  const EvalReport b = evaluate(ground_truth(s), h);
  EXPECT_EQ(a.mota, b.mota);
  EXPECT_EQ(a.idsw, b.idsw);
  EXPECT_EQ(a.fn, b.fn);
}

TEST(Evaluate, ClutterTrackAddsExactlyItsLength) {
  const GroundTruthFrames gt = two_lanes(8);
  TrajectorySet h = as_hypothesis(gt);
  const EvalReport base = evaluate(gt, h);
  for (int t = 2; t < 7; ++t) h.push_back({t, 99, at(50, 50), 1.0, "Car"});
  const EvalReport r = evaluate(gt, h);
  EXPECT_EQ(r.fp, base.fp + 5);
  EXPECT_EQ(r.fn, base.fn);
  EXPECT_EQ(r.idsw, base.idsw);
  EXPECT_EQ(r.matches, base.matches);
}

TEST(Evaluate, SimulatorGroundTruthAgainstItself) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_objects = 15;
    const GroundTruthFrames gt = ground_truth(generate(cfg));
    const EvalReport r = evaluate(gt, as_hypothesis(gt));
    EXPECT_EQ(r.mota, 1.0);
    EXPECT_EQ(r.fp + r.fn + r.idsw, 0);
  }
}

TEST(Evaluate, EmptyGroundTruthIsUndefined) {
  const GroundTruthFrames gt(3);
  EXPECT_THROW(evaluate(gt, {}), UndefinedMotaError);
}

TEST(Evaluate, RejectsMalformedHypotheses) {
  GroundTruthFrames gt(1);
  gt[0].push_back({1, at(0, 0), "Car"});
  const TrajectorySet late{{0, 1, at(0, 0), 1, "Car"}, {3, 1, at(0, 0), 1, "Car"}};
  EXPECT_THROW(evaluate(gt, late), InvalidArgumentError);
  const TrajectorySet twice{{0, 1, at(0, 0), 1, "Car"}, {0, 1, at(5, 0), 1, "Car"}};
  EXPECT_THROW(evaluate(gt, twice), InvalidArgumentError);
}

TEST(EvalReport, SummingSequences) {
  const GroundTruthFrames gt = two_lanes(4);
  EvalReport total = evaluate(gt, as_hypothesis(gt));
  TrajectorySet h = as_hypothesis(gt);
  h.pop_back();
  total += evaluate(gt, h);
  total.finalize();
  EXPECT_EQ(total.gt_count, 16);
  EXPECT_EQ(total.fn, 1);
  EXPECT_DOUBLE_EQ(total.mota, 1.0 - 1.0 / 16.0);
}

TEST(ReportTable, ContainsColumns) {
  EvalReport r;
  r.gt_count = 10;
  r.fp = 1;
  r.finalize();
  const std::string t = format_report_table(r);
  for (const char* col : {"MOTA", "FP", "Miss", "IDS", "GT"}) EXPECT_NE(t.find(col), std::string::npos);
}
