#include "fixtures.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/lstm.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dtlstm;
using dtlstm::testing::gradient_check;
using dtlstm::testing::random_normalized;

namespace {

std::vector<NormalizedSequence> batch_of(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index steps,
                                         std::vector<int> labels, std::vector<Eigen::Index> real = {}) {
  std::vector<NormalizedSequence> out;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    out.push_back(random_normalized(rng, dim, steps, labels[n], real.empty() ? steps : real[n]));
  }
  return out;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(42);
  const auto data = batch_of(rng, 4, 5, {0, 2});
  const LstmParams p = LstmParams::initialize(4, {8, 8}, 3, 17);
  SUBCASE("many-to-many") {
    const auto r = gradient_check(data, p, {});
    CHECK(r.checked == static_cast<std::size_t>(p.parameter_count()));
    CHECK_MESSAGE(r.max_relative_error < 1e-4, r.worst);
    CHECK_MESSAGE(r.beyond_noise == 0, r.worst);
  }
  SUBCASE("many-to-one") {
    const auto r = gradient_check(data, p, {LossMode::ManyToOne, TimeReduction::Mean, true});
    CHECK_MESSAGE(r.beyond_noise == 0, r.worst);
  }
  SUBCASE("sum over time") {
    const auto r = gradient_check(data, p, {LossMode::ManyToMany, TimeReduction::Sum, true});
    CHECK_MESSAGE(r.beyond_noise == 0, r.worst);
  }
}

TEST_CASE("gradients with padding, masks and dropout") {
  std::mt19937_64 rng(9);
  const auto data = batch_of(rng, 3, 6, {1, 0, 1}, {6, 3, 4});
  const LstmParams p = LstmParams::initialize(3, {5, 4, 6}, 2, 5);
  SUBCASE("masked many-to-many") {
    { const auto r = gradient_check(data, p, {}); CHECK_MESSAGE(r.beyond_noise == 0, r.worst); }
  }
  SUBCASE("masked many-to-one") {
    { const auto r = gradient_check(data, p, {LossMode::ManyToOne, TimeReduction::Mean, true}); CHECK_MESSAGE(r.beyond_noise == 0, r.worst); }
  }
  SUBCASE("padding scored") {
    { const auto r = gradient_check(data, p, {LossMode::ManyToMany, TimeReduction::Mean, false}); CHECK_MESSAGE(r.beyond_noise == 0, r.worst); }
  }
  SUBCASE("fixed dropout masks") {
    const ForwardOptions drop{0.4, true, 123};
    { const auto r = gradient_check(data, p, {}, 1e-5, drop); CHECK_MESSAGE(r.beyond_noise == 0, r.worst); }
  }
}

TEST_CASE("zero network: only the output layer receives gradient") {
  std::mt19937_64 rng(1);
  // Both samples in class 0 so the uniform output leaves a nonzero bias gradient.
  const auto data = batch_of(rng, 4, 3, {0, 0});
  const LstmParams p = LstmParams::zeros(4, {3, 3}, 2);
  std::vector<const NormalizedSequence*> ptrs{&data[0], &data[1]};
  const BatchTargets tg = BatchTargets::from(ptrs);
  const LstmParams g = backward_through_time(forward_batch(ptrs, p, {}), tg, {}, p);
  // h is identically zero, so W_out sees no signal while b_out does; the recurrent stack is blocked.
  for (const auto& layer : g.layers) {
    CHECK(layer.W.isZero());
    CHECK(layer.U.isZero());
    CHECK(layer.b.isZero());
  }
  CHECK(g.W_out.isZero());
  CHECK_FALSE(g.b_out.isZero());
  { const auto r = gradient_check(data, p, {}); CHECK_MESSAGE(r.beyond_noise == 0, r.worst); }
}

TEST_CASE("zero network with nonzero hidden state gives a nonzero W_out gradient") {
  std::mt19937_64 rng(1);
  const auto data = batch_of(rng, 4, 3, {0, 0});
  LstmParams p = LstmParams::zeros(4, {3}, 2);
  p.layers[0].b.segment(6, 3).setConstant(0.5);  // candidate bias makes c and h nonzero
  std::vector<const NormalizedSequence*> ptrs{&data[0], &data[1]};
  const BatchTargets tg = BatchTargets::from(ptrs);
  const LstmParams g = backward_through_time(forward_batch(ptrs, p, {}), tg, {}, p);
  CHECK(g.W_out.norm() > 0.0);
}

TEST_CASE("gradient vanishes at a line-search minimum") {
  std::mt19937_64 rng(31);
  const auto data = batch_of(rng, 3, 4, {1, 1, 0});
  LstmParams p = LstmParams::initialize(3, {4, 4}, 2, 8);
  std::vector<const NormalizedSequence*> ptrs{&data[0], &data[1], &data[2]};
  const BatchTargets tg = BatchTargets::from(ptrs);
  auto loss_at = [&](double x) {
    LstmParams q = p;
    q.b_out(0) = x;
    return compute_loss(forward_batch(ptrs, q, {}), tg, {}).value;
  };
  double lo = -20.0, hi = 20.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  while (hi - lo > 1e-10) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    if (loss_at(a) < loss_at(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  p.b_out(0) = 0.5 * (lo + hi);
  const LstmParams g = backward_through_time(forward_batch(ptrs, p, {}), tg, {}, p);
  CHECK(std::abs(g.b_out(0)) < 1e-6);
}

TEST_CASE("tape and parameters must agree") {
  std::mt19937_64 rng(2);
  const auto data = batch_of(rng, 3, 2, {0});
  std::vector<const NormalizedSequence*> ptrs{&data[0]};
  const LstmTape tape = forward_batch(ptrs, LstmParams::initialize(3, {4, 4}, 2, 1), {});
  const BatchTargets tg = BatchTargets::from(ptrs);
  CHECK_THROWS_AS(backward_through_time(tape, tg, {}, LstmParams::initialize(3, {4}, 2, 1)), ConsistencyError);
  CHECK_THROWS_AS(backward_through_time(tape, tg, {}, LstmParams::initialize(3, {4, 5}, 2, 1)), ConsistencyError);
}
