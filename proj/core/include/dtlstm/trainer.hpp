#pragma once

#include "dtlstm/lstm.hpp"
#include "dtlstm/optim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dtlstm {

struct TrainConfig {
  std::vector<Eigen::Index> hidden{128, 128, 128};
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 1.0;
  double dropout = 0.5;
  int epochs = 50;
  int batch_size = 16;
  std::uint64_t seed = 1;
  LossMode loss_mode = LossMode::ManyToMany;
  TimeReduction time_reduction = TimeReduction::Mean;
  bool mask_padding = true;
  // 0 runs every batch sequentially and is bit-reproducible. N > 0 splits each
  // batch into N chunks whose gradients are summed in chunk order.
  int threads = 0;

  void check() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, adam_epsilon}; }
  LossOptions loss() const { return {loss_mode, time_reduction, mask_padding}; }
};

std::string train_config_to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys are ConfigError.
TrainConfig train_config_from_json(const std::string& text);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  LstmParams params;
  std::vector<EpochLog> log;
};

/// Mini-batch training: forward, loss, BPTT, global-norm clip, Adam.
/// Accuracy in the log is the argmax of mean-over-real-steps probabilities
/// from the training passes of that epoch.
TrainResult train(const std::vector<NormalizedSequence>& data, const TrainConfig& config);

/// Inference-mode class probabilities, one vector per sample.
std::vector<Eigen::VectorXd> predict_probabilities(const std::vector<NormalizedSequence>& data,
                                                   const LstmParams& params, Readout readout,
                                                   int batch_size = 64);

}  // namespace dtlstm
