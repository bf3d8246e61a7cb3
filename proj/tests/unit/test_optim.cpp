#include "dtlstm/error.hpp"
#include "dtlstm/optim.hpp"

#include <doctest.h>

#include <cmath>

using namespace dtlstm;

namespace {

// Single-layer, single-class shape small enough to reason about by hand.
LstmParams tiny() { return LstmParams::zeros(1, {1}, 1); }

}  // namespace

TEST_CASE("clip leaves small gradients alone") {
  LstmParams g = tiny();
  g.b_out(0) = 0.3;
  g.W_out(0, 0) = 0.4;
  const double norm = clip_global_norm(g, 1.0);
  CHECK(norm == doctest::Approx(0.5));
  CHECK(g.b_out(0) == 0.3);
  CHECK(g.W_out(0, 0) == 0.4);
}

TEST_CASE("clip scales (3, 4) to (0.6, 0.8)") {
  LstmParams g = tiny();
  g.W_out(0, 0) = 3.0;
  g.b_out(0) = 4.0;
  clip_global_norm(g, 1.0);
  CHECK(g.W_out(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g.b_out(0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("clip keeps zero gradients and rejects a bad threshold") {
  LstmParams g = tiny();
  clip_global_norm(g, 1.0);
  CHECK(global_norm(g) == 0.0);
  CHECK_THROWS_AS(clip_global_norm(g, 0.0), ArgumentError);
}

TEST_CASE("clipped norm never exceeds the threshold") {
  for (int seed = 0; seed < 100; ++seed) {
    LstmParams g = LstmParams::initialize(3, {4, 2}, 3, static_cast<std::uint64_t>(seed));
    for_each_tensor(g, [&](auto& t) { t *= 1.0 + seed; });
    const double threshold = 0.01 + 0.05 * seed;
    clip_global_norm(g, threshold);
    CHECK(global_norm(g) <= threshold + 1e-12);
  }
}

TEST_CASE("first Adam step with unit gradient moves every entry by the learning rate") {
  LstmParams p = LstmParams::initialize(2, {3}, 2, 4);
  const LstmParams before = p;
  LstmParams g = p.zeros_like();
  for_each_tensor(g, [](auto& t) { t.setOnes(); });
  AdamState state = AdamState::for_params(p);
  adam_update(p, g, state, AdamConfig{});
  CHECK(state.step == 1);
  for_each_tensor_pair(p, before, [](const auto& a, const auto& b) {
    CHECK(((a - b).array() + 0.005).abs().maxCoeff() < 1e-9);
  });
}

TEST_CASE("zero gradient with zero state leaves parameters unchanged") {
  LstmParams p = LstmParams::initialize(2, {3}, 2, 4);
  const LstmParams before = p;
  AdamState state = AdamState::for_params(p);
  adam_update(p, p.zeros_like(), state, AdamConfig{});
  for_each_tensor_pair(p, before, [](const auto& a, const auto& b) { CHECK(a == b); });
}

TEST_CASE("Adam is deterministic and rejects non-finite updates") {
  LstmParams a = LstmParams::initialize(2, {3}, 2, 4), b = a;
  LstmParams g = LstmParams::initialize(2, {3}, 2, 5);
  AdamState sa = AdamState::for_params(a), sb = AdamState::for_params(b);
  for (int k = 0; k < 3; ++k) {
    adam_update(a, g, sa, AdamConfig{});
    adam_update(b, g, sb, AdamConfig{});
  }
  for_each_tensor_pair(a, b, [](const auto& x, const auto& y) { CHECK(x == y); });

  g.b_out(0) = NAN;
  CHECK_THROWS_AS(adam_update(a, g, sa, AdamConfig{}), NumericError);
}
