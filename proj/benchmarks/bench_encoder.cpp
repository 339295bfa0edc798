#include <benchmark/benchmark.h>

#include "yoloo/lgpenc.hpp"
#include "yoloo/random.hpp"

using namespace yoloo;

namespace {

PointPatch random_patch(int n) {
  Rng rng(3);
  PointPatch p;
  p.points.resize(n, 3);
  for (int i = 0; i < n; ++i) p.points.row(i) << rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-1, 1);
  return p;
}

void BM_Encode(benchmark::State& state) {
  const EncoderParams params = EncoderParams::random(0);
  const PointPatch patch = random_patch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(encode(patch, params));
}
BENCHMARK(BM_Encode)->Arg(kTestPoints)->Arg(kTrainPoints)->Unit(benchmark::kMillisecond);

void BM_EncodeBackward(benchmark::State& state) {
  const EncoderParams params = EncoderParams::random(0);
  const PointPatch patch = random_patch(kTestPoints);
  Rng rng(4);
  Eigen::VectorXd upstream(kEmbeddingDim);
  for (auto& x : upstream) x = rng.normal(0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(encode_backward(patch, params, upstream));
}
BENCHMARK(BM_EncodeBackward)->Unit(benchmark::kMillisecond);

}  // namespace
