#include "dtlstm/lstm.hpp"
#include "dtlstm/normalization.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace dtlstm;

namespace {

std::vector<NormalizedSequence> random_batch(Eigen::Index dim, Eigen::Index steps, int n, int classes) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<NormalizedSequence> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& s = out[static_cast<std::size_t>(i)];
    s.id = "b" + std::to_string(i);
    s.label = i % classes;
    s.vectors = Eigen::MatrixXd::NullaryExpr(dim, steps, [&] { return g(rng); });
    s.mask.assign(static_cast<std::size_t>(steps), true);
  }
  return out;
}

void BM_CellStep(benchmark::State& state) {
  const auto hidden = state.range(0);
  const LstmParams p = LstmParams::initialize(hidden, {hidden}, 2, 1);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(hidden);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden), c = Eigen::VectorXd::Zero(hidden);
  for (auto _ : state) {
    CellStep s = cell_step(x, h, c, p.layers[0]);
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(BM_CellStep)->Arg(16)->Arg(64)->Arg(256);

// Three stacked layers over a 60-dim input (20 joints), batch of 8.
void BM_Forward(benchmark::State& state) {
  const auto hidden = state.range(0), steps = state.range(1);
  const auto batch = random_batch(60, steps, 8, 10);
  std::vector<const NormalizedSequence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  const LstmParams p = LstmParams::initialize(60, {hidden, hidden, hidden}, 10, 1);
  for (auto _ : state) {
    LstmTape tape = forward_batch(ptrs, p, {});
    benchmark::DoNotOptimize(tape.probs.data());
  }
  state.SetItemsProcessed(state.iterations() * 8 * steps);
}
BENCHMARK(BM_Forward)->Args({32, 50})->Args({128, 50})->Args({128, 100})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto hidden = state.range(0), steps = state.range(1);
  const auto batch = random_batch(60, steps, 8, 10);
  std::vector<const NormalizedSequence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  const BatchTargets targets = BatchTargets::from(ptrs);
  const LstmParams p = LstmParams::initialize(60, {hidden, hidden, hidden}, 10, 1);
  for (auto _ : state) {
    const LstmTape tape = forward_batch(ptrs, p, {});
    LstmParams g = backward_through_time(tape, targets, {}, p);
    benchmark::DoNotOptimize(g.W_out.data());
  }
  state.SetItemsProcessed(state.iterations() * 8 * steps);
}
BENCHMARK(BM_ForwardBackward)->Args({32, 50})->Args({128, 50})->Args({128, 100})->Unit(benchmark::kMillisecond);

}  // namespace
