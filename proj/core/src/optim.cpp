#include "dtlstm/optim.hpp"

#include "dtlstm/error.hpp"

#include <cmath>

namespace dtlstm {

double global_norm(const LstmParams& grads) {
  double sq = 0.0;
  for_each_tensor(grads, [&sq](const auto& t) { sq += t.squaredNorm(); });
  return std::sqrt(sq);
}

double clip_global_norm(LstmParams& grads, double threshold) {
  if (!(threshold > 0.0)) throw ArgumentError("clip threshold must be positive");
  const double norm = global_norm(grads);
  if (norm > threshold) {
    const double factor = threshold / norm;
    for_each_tensor(grads, [factor](auto& t) { t *= factor; });
  }
  return norm;
}

AdamState AdamState::for_params(const LstmParams& params) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_update(LstmParams& params, const LstmParams& grads, AdamState& state, const AdamConfig& config) {
  if (state.step < 0) throw ArgumentError("Adam step counter must be non-negative");
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw ShapeError("Adam: parameters, gradients and moments differ in shape");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);

  for (std::size_t l = 0; l <= params.layers.size(); ++l) {
    // Index layers.size() stands for the output projection.
    auto step_tensor = [&](auto& theta, const auto& g, auto& m, auto& v) {
      m.array() = config.beta1 * m.array() + (1.0 - config.beta1) * g.array();
      v.array() = config.beta2 * v.array() + (1.0 - config.beta2) * g.array().square();
      theta.array() -= config.learning_rate * (m.array() / correct1) /
                       ((v.array() / correct2).sqrt() + config.epsilon);
      if (!theta.allFinite()) throw NumericError("Adam produced a non-finite parameter");
    };
    if (l < params.layers.size()) {
      auto& p = params.layers[l];
      const auto& g = grads.layers[l];
      auto& m = state.m.layers[l];
      auto& v = state.v.layers[l];
      step_tensor(p.W, g.W, m.W, v.W);
      step_tensor(p.U, g.U, m.U, v.U);
      step_tensor(p.b, g.b, m.b, v.b);
    } else {
      step_tensor(params.W_out, grads.W_out, state.m.W_out, state.v.W_out);
      step_tensor(params.b_out, grads.b_out, state.m.b_out, state.v.b_out);
    }
  }
}

}  // namespace dtlstm
