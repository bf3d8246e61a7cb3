#pragma once

#include "dtlstm/scores.hpp"
#include "dtlstm/text_io.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dtlstm {

enum class ScoreNormalization { Softmax, MinMax, None };

ScoreNormalization parse_score_normalization(const std::string& name);
std::string to_string(ScoreNormalization n);

/// Weights and normalizations are looked up by producer tag; unlisted streams
/// use the defaults.
struct FusionConfig {
  std::map<std::string, double> weights;
  std::map<std::string, ScoreNormalization> normalization;
  double default_weight = 1.0;
  ScoreNormalization default_normalization = ScoreNormalization::Softmax;

  double weight_for(const std::string& producer) const;
  ScoreNormalization normalization_for(const std::string& producer) const;
  void check() const;
};

/// softmax: max-shifted exp / sum; min-max: (s - min) / (max - min), with an
/// all-equal vector mapped to 1/C; none: identity.
ClassScores normalize_scores(const ClassScores& s, ScoreNormalization mode);

struct FusedPrediction {
  ClassScores scores;
  int label = 0;
};

/// Weighted mean of the normalized streams; argmax with lowest index on ties.
/// The result does not depend on the order of `streams`.
FusedPrediction fuse(std::vector<ClassScores> streams, const FusionConfig& config);

/// Fuses score tables sample by sample. Every sample present in any table must
/// be present in all of them (AlignmentError otherwise). `labels` fills the
/// true-label column when given.
std::vector<PredictionRecord> fuse_tables(const std::vector<std::vector<ScoreRecord>>& tables,
                                          const FusionConfig& config,
                                          const std::optional<std::map<std::string, int>>& labels = std::nullopt);

}  // namespace dtlstm
