// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "textstack/rng.hpp"
#include "textstack/tsne.hpp"

namespace {

using namespace textstack;

Eigen::MatrixXd random_points(int n, int d) {
  Rng rng(11);
  Eigen::MatrixXd points(n, d);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      points(r, c) = rng.gaussian();
    }
  }
  return points;
}

void BM_tsne_calibration(benchmark::State& state) {
  auto points = random_points(static_cast<int>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsne_conditional(points, 30.0));
  }
}
BENCHMARK(BM_tsne_calibration)->Arg(200)->Arg(400);

void BM_tsne_full(benchmark::State& state) {
  auto points = random_points(static_cast<int>(state.range(0)), 32);
  TsneConfig config;
  config.perplexity = 20.0;
  config.iterations = 100;
  config.exaggeration_iters = 50;
  config.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsne(points, {}, config));
  }
}
BENCHMARK(BM_tsne_full)->Arg(128);

}  // namespace
