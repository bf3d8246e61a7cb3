#include "fixtures.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/lstm.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dtlstm;
using Eigen::VectorXd;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LayerParams scalar_cell() {
  LayerParams p;
  p.W = Eigen::MatrixXd::Zero(4, 1);
  p.U = Eigen::MatrixXd::Zero(4, 1);
  p.b = VectorXd::Zero(4);
  return p;
}

bool same_tape(const LstmTape& a, const LstmTape& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    if (a.probs[t] != b.probs[t]) return false;
    for (std::size_t l = 0; l < a.steps[t].size(); ++l) {
      const auto& x = a.steps[t][l];
      const auto& y = b.steps[t][l];
      if (x.pre != y.pre || x.gates != y.gates || x.c != y.c || x.h != y.h || x.dropout != y.dropout) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("zero parameters are a fixpoint") {
  const LstmParams p = LstmParams::zeros(3, {4}, 2);
  const CellStep s = cell_step(VectorXd::Random(3), VectorXd::Zero(4), VectorXd::Zero(4), p.layers[0]);
  CHECK(s.h.isZero());
  CHECK(s.c.isZero());
  CHECK((s.gates.segment(0, 4).array() == 0.5).all());   // i
  CHECK((s.gates.segment(4, 4).array() == 0.5).all());   // f
  CHECK(s.gates.segment(8, 4).isZero());                  // g
  CHECK((s.gates.segment(12, 4).array() == 0.5).all());  // o
}

TEST_CASE("scalar cell with a saturated forget gate keeps its memory") {
  LayerParams p = scalar_cell();
  p.b(1) = 20.0;
  const CellStep s = cell_step(VectorXd::Zero(1), VectorXd::Zero(1), VectorXd::Constant(1, 3.0), p);
  CHECK(s.c(0) == doctest::Approx(3.0 * sigmoid(20.0)).epsilon(1e-14));
  CHECK(std::abs(s.c(0) - (3.0 - 6e-9)) < 1e-9);
}

TEST_CASE("scalar cell with open input, candidate and output gates") {
  LayerParams p = scalar_cell();
  p.b(0) = 20.0;
  p.b(2) = 20.0;
  p.b(3) = 20.0;
  const CellStep s = cell_step(VectorXd::Zero(1), VectorXd::Zero(1), VectorXd::Zero(1), p);
  const double c = sigmoid(20.0) * std::tanh(20.0);
  CHECK(s.c(0) == doctest::Approx(c).epsilon(1e-14));
  CHECK(s.c(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.h(0) == doctest::Approx(sigmoid(20.0) * std::tanh(c)).epsilon(1e-14));
}

TEST_CASE("non-finite state is a numeric error") {
  LayerParams p = scalar_cell();
  CHECK_THROWS_AS(cell_step(VectorXd::Constant(1, NAN), VectorXd::Zero(1), VectorXd::Zero(1), p), NumericError);
}

TEST_CASE("forward with zero parameters gives uniform probabilities") {
  std::mt19937_64 rng(1);
  const auto seq = dtlstm::testing::random_normalized(rng, 6, 1, 0);
  const LstmTape tape = forward_sequence(seq, LstmParams::zeros(6, {4, 4}, 3), {});
  REQUIRE(tape.probs.size() == 1);
  for (int c = 0; c < 3; ++c) CHECK(tape.probs[0](c, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("forward rejects a dimension mismatch") {
  std::mt19937_64 rng(1);
  const auto seq = dtlstm::testing::random_normalized(rng, 5, 2, 0);
  CHECK_THROWS_AS(forward_sequence(seq, LstmParams::zeros(6, {4}, 3), {}), ShapeError);
}

TEST_CASE("forward is deterministic, with and without dropout") {
  std::mt19937_64 rng(4);
  const auto seq = dtlstm::testing::random_normalized(rng, 5, 2, 1);
  const LstmParams p = LstmParams::initialize(5, {4, 4, 4}, 3, 9);
  CHECK(same_tape(forward_sequence(seq, p, {}), forward_sequence(seq, p, {})));
  const ForwardOptions drop{0.5, true, 77};
  const LstmTape a = forward_sequence(seq, p, drop);
  CHECK(same_tape(a, forward_sequence(seq, p, drop)));
  CHECK_FALSE(same_tape(a, forward_sequence(seq, p, {0.5, true, 78})));
  // kept units are scaled by 1/(1-p)
  for (std::size_t l = 0; l + 1 < a.steps[0].size(); ++l) {
    const auto& layer = a.steps[0][l];
    CHECK(layer.dropout.size() == layer.h.size());
    CHECK(((layer.dropout.array() == 0.0) || (layer.dropout.array() == 2.0)).all());
  }
  // masks sit between stacked layers; the top layer reaches the softmax undropped
  CHECK(a.steps[0].back().dropout.size() == 0);
}

TEST_CASE("dropout is inactive outside training") {
  std::mt19937_64 rng(4);
  const auto seq = dtlstm::testing::random_normalized(rng, 5, 3, 1);
  const LstmParams p = LstmParams::initialize(5, {4, 4}, 3, 9);
  CHECK(same_tape(forward_sequence(seq, p, {0.5, false, 1}), forward_sequence(seq, p, {})));
}

TEST_CASE("softmax rows sum to one at every step") {
  std::mt19937_64 rng(8);
  const auto seq = dtlstm::testing::random_normalized(rng, 7, 12, 0);
  const LstmParams p = LstmParams::initialize(7, {8, 8, 8}, 5, 3);
  const LstmTape tape = forward_sequence(seq, p, {0.3, true, 5});
  for (const auto& probs : tape.probs) CHECK(std::abs(probs.sum() - 1.0) < 1e-12);
}

TEST_CASE("batched forward matches per-sequence forward") {
  std::mt19937_64 rng(10);
  std::vector<NormalizedSequence> data;
  for (int k = 0; k < 3; ++k) data.push_back(dtlstm::testing::random_normalized(rng, 4, 6, k, 3 + k));
  const LstmParams p = LstmParams::initialize(4, {5, 6}, 3, 2);
  std::vector<const NormalizedSequence*> ptrs{&data[0], &data[1], &data[2]};
  const LstmTape batch = forward_batch(ptrs, p, {});
  for (Eigen::Index n = 0; n < 3; ++n) {
    const LstmTape single = forward_sequence(data[static_cast<std::size_t>(n)], p, {});
    for (std::size_t t = 0; t < 6; ++t) {
      CHECK((batch.probs[t].col(n) - single.probs[t].col(0)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("initialization follows the stated ranges") {
  const LstmParams p = LstmParams::initialize(10, {16, 4}, 3, 1);
  CHECK(p.layers[0].W.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(p.layers[1].U.cwiseAbs().maxCoeff() <= 0.5);
  CHECK(p.layers[0].b.segment(16, 16).isOnes());
  CHECK(p.layers[0].b.segment(0, 16).isZero());
  CHECK(p.layers[1].b.segment(4, 4).isOnes());
  CHECK(p.b_out.isZero());
  CHECK(p.parameter_count() == 4 * 16 * (10 + 16 + 1) + 4 * 4 * (16 + 4 + 1) + 3 * 4 + 3);
  CHECK(std::string(kGateOrder) == "ifgo");
}

TEST_CASE("argmax breaks ties low") {
  CHECK(argmax(Eigen::Vector3d(1, 3, 3)) == 1);
  CHECK(argmax(Eigen::Vector3d(0, 0, 0)) == 0);
}
