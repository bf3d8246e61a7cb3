#include "fixtures.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/synth.hpp"
#include "dtlstm/trainer.hpp"

#include <doctest.h>

using namespace dtlstm;

namespace {

std::vector<NormalizedSequence> small_set(int per_class, std::uint64_t seed) {
  SynthSpec spec;
  spec.per_class = per_class;
  spec.min_frames = 10;
  spec.max_frames = 14;
  spec.seed = seed;
  return normalize_all(generate(spec), synth_roles(spec.joints), NormalizationMode::PerFrame, 14);
}

TrainConfig quick() {
  TrainConfig c;
  c.hidden = {8, 8};
  c.epochs = 3;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST_CASE("same config and seed give identical logs and parameters") {
  const auto data = small_set(4, 1);
  const TrainResult a = train(data, quick());
  const TrainResult b = train(data, quick());
  REQUIRE(a.log.size() == 3);
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    CHECK(a.log[e].loss == b.log[e].loss);
    CHECK(a.log[e].accuracy == b.log[e].accuracy);
  }
  for_each_tensor_pair(a.params, b.params, [](const auto& x, const auto& y) { CHECK(x == y); });

  TrainConfig other = quick();
  other.seed = 2;
  CHECK(train(data, other).log.back().loss != a.log.back().loss);
}

TEST_CASE("training reduces the loss") {
  const auto data = small_set(5, 3);
  TrainConfig c = quick();
  c.epochs = 25;
  c.dropout = 0.0;
  const TrainResult r = train(data, c);
  CHECK(r.log.back().loss < r.log.front().loss);
  for (const auto& e : r.log) {
    CHECK(e.accuracy >= 0.0);
    CHECK(e.accuracy <= 1.0);
  }
}

TEST_CASE("threaded batches agree with sequential ones to rounding") {
  const auto data = small_set(4, 2);
  TrainConfig c = quick();
  c.dropout = 0.0;
  const TrainResult seq = train(data, c);
  c.threads = 3;
  const TrainResult par = train(data, c);
  for (std::size_t e = 0; e < seq.log.size(); ++e) CHECK(par.log[e].loss == doctest::Approx(seq.log[e].loss).epsilon(1e-9));
}

TEST_CASE("invalid datasets and configs") {
  std::mt19937_64 rng(1);
  const std::vector<NormalizedSequence> single{dtlstm::testing::random_normalized(rng, 3, 4, 0)};
  CHECK_THROWS_AS(train(single, quick()), ArgumentError);
  CHECK_THROWS_AS(train({}, quick()), ArgumentError);

  TrainConfig bad = quick();
  bad.dropout = 1.0;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = quick();
  bad.clip_norm = 0.0;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = quick();
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS(bad.check(), ConfigError);
}

TEST_CASE("defaults match the published hyperparameters") {
  const TrainConfig c;
  CHECK(c.learning_rate == 0.005);
  CHECK(c.beta1 == 0.9);
  CHECK(c.beta2 == 0.999);
  CHECK(c.adam_epsilon == 1e-8);
  CHECK(c.clip_norm == 1.0);
  CHECK(c.dropout == 0.5);
  CHECK(c.mask_padding);
  CHECK(c.loss_mode == LossMode::ManyToMany);
  CHECK(c.hidden == std::vector<Eigen::Index>{128, 128, 128});
}

TEST_CASE("train config JSON round trip rejects unknown keys") {
  TrainConfig c = quick();
  c.loss_mode = LossMode::ManyToOne;
  c.time_reduction = TimeReduction::Sum;
  c.mask_padding = false;
  const TrainConfig back = train_config_from_json(train_config_to_json(c));
  CHECK(back.hidden == c.hidden);
  CHECK(back.loss_mode == LossMode::ManyToOne);
  CHECK(back.time_reduction == TimeReduction::Sum);
  CHECK_FALSE(back.mask_padding);
  CHECK(train_config_to_json(back) == train_config_to_json(c));
  CHECK_THROWS_AS(train_config_from_json(R"({"learning_rat": 0.1})"), ConfigError);
}

TEST_CASE("prediction readouts are probability vectors") {
  const auto data = small_set(2, 4);
  const TrainResult r = train(data, quick());
  for (Readout ro : {Readout::LastStep, Readout::MeanOverTime}) {
    const auto probs = predict_probabilities(data, r.params, ro, 3);
    REQUIRE(probs.size() == data.size());
    for (const auto& p : probs) CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
