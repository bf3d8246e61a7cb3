#pragma once

#include "dtlstm/scores.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dtlstm {

/// One-vs-rest linear classifier: row c of `weights` and `bias(c)` score class c.
struct SvmModel {
  Eigen::MatrixXd weights;  // C x D
  Eigen::VectorXd bias;     // C
  double c_reg = 1.0;

  Eigen::Index classes() const { return weights.rows(); }
  Eigen::Index dim() const { return weights.cols(); }
};

struct SvmTrainConfig {
  double c_reg = 1.0;
  int epochs = 50;
  std::uint64_t seed = 1;
  int classes = 0;  // 0 infers max label + 1
};

/// For every class minimizes 0.5*|w|^2 + C * sum hinge(y (w.x + b)) by
/// stochastic subgradient steps eta_t = 1/(lambda t), lambda = 1/(C n).
SvmModel train_ovr(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels,
                   const SvmTrainConfig& config);

ClassScores predict_scores(const SvmModel& model, const Eigen::VectorXd& x, const std::string& producer = "svm");
int predict_label(const SvmModel& model, const Eigen::VectorXd& x);
double accuracy(const SvmModel& model, const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels);

std::string svm_model_to_string(const SvmModel& model);
SvmModel svm_model_from_string(const std::string& text);
void save_svm_model(const std::string& path, const SvmModel& model);
SvmModel load_svm_model(const std::string& path);

struct CvConfig {
  int folds = 5;
  double c_reg = 1.0;
  int epochs = 50;
  std::uint64_t seed = 1;
};

/// Fold assignment: group-disjoint when `groups` is given, otherwise seeded and
/// stratified by label. Each index appears in exactly one fold.
std::vector<std::vector<std::size_t>> make_folds(const std::vector<int>& labels,
                                                 const std::optional<std::vector<int>>& groups,
                                                 int folds, std::uint64_t seed);

/// Mean held-out fold accuracy.
double cross_validate(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels,
                      const std::optional<std::vector<int>>& groups, const CvConfig& config);

/// Picks the grid value with the best cross-validated accuracy (first on ties).
double select_c_reg(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels,
                    const std::optional<std::vector<int>>& groups, const std::vector<double>& grid,
                    const CvConfig& config);

}  // namespace dtlstm
