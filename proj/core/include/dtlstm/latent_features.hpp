#pragma once

#include "dtlstm/lstm.hpp"
#include "dtlstm/normalization.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace dtlstm {

/// Top-layer hidden states of one sequence: row t is h_t (T x H_L).
struct LatentFeatureMatrix {
  std::string id;
  int subject = 0;
  int label = 0;
  Eigen::MatrixXd rows;
  std::vector<bool> mask;
};

enum class FeatureLayout { FlattenTime, MeanOverTime, LastStep };

FeatureLayout parse_feature_layout(const std::string& name);
std::string to_string(FeatureLayout layout);

/// Inference-mode forward pass; no dropout.
LatentFeatureMatrix extract_latents(const NormalizedSequence& seq, const LstmParams& params);
std::vector<LatentFeatureMatrix> extract_all(const std::vector<NormalizedSequence>& data,
                                             const LstmParams& params, int batch_size = 64);

/// flatten-time concatenates every row (padding included, dimension T*H);
/// mean-over-time averages the real rows; last-step takes the last real row.
Eigen::VectorXd to_classifier_vector(const LatentFeatureMatrix& m, FeatureLayout layout);

}  // namespace dtlstm
