#include <benchmark/benchmark.h>

#include <vector>

#include "yoloo/assoc.hpp"
#include "yoloo/kalman.hpp"
#include "yoloo/random.hpp"

using namespace yoloo;

namespace {

struct Frame {
  std::vector<KFState> tracks;
  std::vector<Embedding> track_embeds, det_embeds;
  std::vector<Box3D> det_boxes;
};

Embedding random_embedding(Rng& rng) {
  Eigen::VectorXd v(kEmbeddingDim);
  for (auto& x : v) x = rng.normal(0, 1);
  return Embedding::normalized(v);
}

Frame make_frame(int n) {
  Rng rng(7);
  Frame f;
  for (int i = 0; i < n; ++i) {
    const Box3D b(rng.uniform(-60, 60), rng.uniform(-60, 60), 0, 4, 1.8, 1.5, rng.uniform(-kPi, kPi));
    f.tracks.push_back(kf_init(b));
    f.det_boxes.emplace_back(b.x + rng.normal(0, 0.2), b.y + rng.normal(0, 0.2), 0, 4, 1.8, 1.5, b.yaw);
    f.track_embeds.push_back(random_embedding(rng));
    f.det_embeds.push_back(random_embedding(rng));
  }
  return f;
}

// Predict, cost matrix, greedy assignment and update for n tracks x n detections.
void BM_AssociationStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Frame f = make_frame(n);
  for (auto _ : state) {
    std::vector<KFState> pred;
    std::vector<Box3D> pred_boxes;
    pred.reserve(n);
    for (const auto& t : f.tracks) {
      pred.push_back(kf_predict(t));
      pred_boxes.push_back(pred.back().box());
    }
    const CostMatrix c = build_cost_matrix(f.track_embeds, f.det_embeds, pred_boxes, f.det_boxes);
    const Assignment a = greedy_assign(c);
    for (const auto& [row, col] : a.matches) pred[row] = kf_update(pred[row], f.det_boxes[col]);
    benchmark::DoNotOptimize(pred.data());
  }
}
BENCHMARK(BM_AssociationStep)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(8);
  CostMatrix c(n, n);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) c.entries(r, k) = rng.uniform(0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian_assign(c));
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
