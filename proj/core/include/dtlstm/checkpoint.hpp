#pragma once

#include "dtlstm/lstm.hpp"
#include "dtlstm/trainer.hpp"

#include <string>

namespace dtlstm {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  LstmParams params;
  TrainConfig config;
};

// Structured-text (JSON) checkpoint: version, gate order tag, shapes, every
// tensor in row-major order, and the training configuration. Doubles are
// written in shortest round-trip form, so save/load is exact.
std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dtlstm
