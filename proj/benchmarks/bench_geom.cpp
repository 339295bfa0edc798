#include <benchmark/benchmark.h>

#include <vector>

#include "yoloo/geom.hpp"
#include "yoloo/random.hpp"

using namespace yoloo;

namespace {

std::vector<Box3D> boxes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Box3D> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(rng.uniform(-40, 40), rng.uniform(-40, 40), 0, rng.uniform(1, 5),
                     rng.uniform(1, 2.5), 1.5, rng.uniform(-kPi, kPi));
  }
  return out;
}

void BM_Fgam(benchmark::State& state) {
  const auto a = boxes(1024, 1), b = boxes(1024, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fgam(a[i & 1023], b[i & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Fgam);

void BM_BevIou(benchmark::State& state) {
  const auto a = boxes(1024, 3), b = boxes(1024, 4);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bev_iou(a[i & 1023], b[i & 1023]));
    ++i;
  }
}
BENCHMARK(BM_BevIou);

}  // namespace
