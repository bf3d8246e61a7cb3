#pragma once

#include "dtlstm/scores.hpp"

#include <Eigen/Core>

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dtlstm {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
/// Strict decimal parse of a whole token; rejects NaN, Inf and trailing junk.
double parse_double(std::string_view token, const std::string& context);
long long parse_integer(std::string_view token, const std::string& context);

std::vector<std::string_view> split_tokens(std::string_view line);

/// Feature dump line: <id> <label> <layout-tag> <dim> <v_1> ... <v_dim>
struct FeatureRecord {
  std::string id;
  int label = 0;
  std::string layout;
  Eigen::VectorXd values;
};

std::string format_feature_record(const FeatureRecord& r);
FeatureRecord parse_feature_record(std::string_view line);
std::vector<FeatureRecord> load_feature_file(const std::string& path);
void save_feature_file(const std::string& path, const std::vector<FeatureRecord>& records);

/// Score file line: <id> <producer-tag> <s_1> ... <s_C>
struct ScoreRecord {
  std::string id;
  ClassScores scores;
};

std::string format_score_record(const ScoreRecord& r);
ScoreRecord parse_score_record(std::string_view line);
std::vector<ScoreRecord> load_score_file(const std::string& path);
void save_score_file(const std::string& path, const std::vector<ScoreRecord>& records);

/// Prediction file line: <id> <C> <s_1> ... <s_C> <predicted> <true-label or ->
/// followed by one summary line "# accuracy <value> <correct>/<total>" when
/// every record carries a true label.
struct PredictionRecord {
  std::string id;
  Eigen::VectorXd scores;
  int predicted = 0;
  std::optional<int> truth;
};

struct PredictionSummary {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

std::optional<PredictionSummary> summarize(const std::vector<PredictionRecord>& records);
std::string format_prediction_record(const PredictionRecord& r);
PredictionRecord parse_prediction_record(std::string_view line);
void save_prediction_file(const std::string& path, const std::vector<PredictionRecord>& records);
/// Lines starting with '#' are skipped.
std::vector<PredictionRecord> load_prediction_file(const std::string& path);

/// Opens for reading, throwing InputNotFound when the path is missing.
std::ifstream open_input(const std::string& path, const std::string& what);
std::ofstream open_output(const std::string& path, const std::string& what);

}  // namespace dtlstm
