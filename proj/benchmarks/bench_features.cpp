#include "dtlstm/linear_svm.hpp"
#include "dtlstm/region_streams.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace dtlstm;

namespace {

void BM_TrainOvr(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto dim = state.range(1);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::VectorXd> x;
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    y.push_back(i % 10);
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(dim, [&] { return g(rng); });
    v(y.back() % dim) += 2.0;
    x.push_back(std::move(v));
  }
  for (auto _ : state) {
    SvmModel m = train_ovr(x, y, {1.0, 50, 1, 10});
    benchmark::DoNotOptimize(m.weights.data());
  }
}
BENCHMARK(BM_TrainOvr)->Args({200, 128})->Args({200, 1024})->Args({1000, 512})->Unit(benchmark::kMillisecond);

void BM_MaxMinPool(benchmark::State& state) {
  const auto frames = state.range(0), dim = state.range(1);
  std::vector<Eigen::VectorXd> f;
  for (Eigen::Index t = 0; t < frames; ++t) f.push_back(Eigen::VectorXd::Random(dim));
  for (auto _ : state) {
    Eigen::VectorXd v = maxmin_pool(f);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_MaxMinPool)->Args({60, 2048})->Args({300, 2048});

}  // namespace
