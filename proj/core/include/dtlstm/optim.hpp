#pragma once

#include "dtlstm/lstm.hpp"

namespace dtlstm {

/// L2 norm over every entry of every tensor.
double global_norm(const LstmParams& grads);

/// Rescales all gradients by threshold/norm when the global norm exceeds
/// `threshold`. Returns the norm measured before clipping.
double clip_global_norm(LstmParams& grads, double threshold);

struct AdamConfig {
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  LstmParams m;
  LstmParams v;
  long step = 0;

  static AdamState for_params(const LstmParams& params);
};

/// One bias-corrected Adam step, in place. Throws NumericError on a non-finite update.
void adam_update(LstmParams& params, const LstmParams& grads, AdamState& state, const AdamConfig& config);

}  // namespace dtlstm
