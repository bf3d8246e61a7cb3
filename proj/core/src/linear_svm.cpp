#include "dtlstm/linear_svm.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/lstm.hpp"
#include "dtlstm/text_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace dtlstm {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

void check_features(const std::vector<VectorXd>& features, const std::vector<int>& labels) {
  if (features.empty()) throw ArgumentError("svm: empty training set");
  if (features.size() != labels.size()) throw ShapeError("svm: one label per feature vector required");
  const Index dim = features.front().size();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) {
      throw ShapeError("svm: feature " + std::to_string(i) + " has dimension " +
                       std::to_string(features[i].size()) + ", expected " + std::to_string(dim));
    }
    if (labels[i] < 0) throw ArgumentError("svm: negative label");
  }
}

// Binary hinge-loss problem for one class against the rest. Features arrive centered on the
// training mean; the bias is unregularized, so centering leaves the objective unchanged and
// keeps the bias step from fighting the weights.
void train_binary(const std::vector<VectorXd>& x, const std::vector<int>& labels, int positive,
                  double c_reg, int epochs, std::uint64_t seed, Eigen::Ref<VectorXd> w, double& b) {
  const std::size_t n = x.size();
  const double lambda = 1.0 / (c_reg * static_cast<double>(n));
  // The optimum has lambda/2 |w|^2 <= objective at zero = 1.
  const double radius = std::sqrt(2.0 / lambda);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  w.setZero();
  b = 0.0;
  double t = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      t += 1.0;
      const double eta = 1.0 / (lambda * t);
      const double y = labels[i] == positive ? 1.0 : -1.0;
      const double margin = y * (w.dot(x[i]) + b);
      w *= 1.0 - eta * lambda;
      if (margin < 1.0) {
        w += (eta * y) * x[i];
        b += eta * y;
      }
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
    }
  }
}

}  // namespace

SvmModel train_ovr(const std::vector<VectorXd>& features, const std::vector<int>& labels,
                   const SvmTrainConfig& config) {
  check_features(features, labels);
  if (!(config.c_reg > 0.0)) throw ArgumentError("svm: C must be positive");
  if (config.epochs <= 0) throw ArgumentError("svm: epochs must be positive");
  const std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) throw ArgumentError("svm: at least two classes are required");
  const int classes = std::max(config.classes, *present.rbegin() + 1);

  SvmModel model;
  model.c_reg = config.c_reg;
  model.weights = Eigen::MatrixXd::Zero(classes, features.front().size());
  model.bias = VectorXd::Zero(classes);
  VectorXd mean = VectorXd::Zero(features.front().size());
  for (const auto& f : features) mean += f;
  mean /= static_cast<double>(features.size());
  std::vector<VectorXd> centered;
  centered.reserve(features.size());
  for (const auto& f : features) centered.push_back(f - mean);
  VectorXd w(features.front().size());
  for (int c = 0; c < classes; ++c) {
    double b = 0.0;
    train_binary(centered, labels, c, config.c_reg, config.epochs,
                 config.seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(c + 1), w, b);
    model.weights.row(c) = w.transpose();
    model.bias(c) = b - w.dot(mean);
  }
  return model;
}

ClassScores predict_scores(const SvmModel& model, const VectorXd& x, const std::string& producer) {
  if (x.size() != model.dim()) {
    throw ShapeError("svm: input dimension " + std::to_string(x.size()) + " does not match model dimension " +
                     std::to_string(model.dim()));
  }
  return ClassScores{producer, model.weights * x + model.bias};
}

int predict_label(const SvmModel& model, const VectorXd& x) { return argmax(predict_scores(model, x).values); }

double accuracy(const SvmModel& model, const std::vector<VectorXd>& features, const std::vector<int>& labels) {
  if (features.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) correct += predict_label(model, features[i]) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(features.size());
}

std::string svm_model_to_string(const SvmModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "dtlstm-svm";
  j["version"] = 1;
  j["classes"] = model.classes();
  j["dim"] = model.dim();
  j["c_reg"] = model.c_reg;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Index c = 0; c < model.classes(); ++c) {
    std::vector<double> row(static_cast<std::size_t>(model.dim()));
    for (Index d = 0; d < model.dim(); ++d) row[static_cast<std::size_t>(d)] = model.weights(c, d);
    rows.push_back(row);
  }
  j["weights"] = std::move(rows);
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  return j.dump() + "\n";
}

SvmModel svm_model_from_string(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "dtlstm-svm" || j.at("version").get<int>() != 1) {
      throw FormatError("not a version-1 SVM model");
    }
    const Index classes = j.at("classes").get<Index>();
    const Index dim = j.at("dim").get<Index>();
    SvmModel m;
    m.c_reg = j.at("c_reg").get<double>();
    m.weights.resize(classes, dim);
    const auto& rows = j.at("weights");
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (static_cast<Index>(rows.size()) != classes || static_cast<Index>(bias.size()) != classes) {
      throw FormatError("SVM model class count mismatch");
    }
    for (Index c = 0; c < classes; ++c) {
      const auto row = rows[static_cast<std::size_t>(c)].get<std::vector<double>>();
      if (static_cast<Index>(row.size()) != dim) throw FormatError("SVM model row has wrong dimension");
      for (Index d = 0; d < dim; ++d) m.weights(c, d) = row[static_cast<std::size_t>(d)];
    }
    m.bias = Eigen::Map<const VectorXd>(bias.data(), classes);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed SVM model: ") + e.what());
  }
}

void save_svm_model(const std::string& path, const SvmModel& model) {
  auto out = open_output(path, "SVM model");
  out << svm_model_to_string(model);
}

SvmModel load_svm_model(const std::string& path) {
  auto in = open_input(path, "SVM model");
  std::ostringstream buf;
  buf << in.rdbuf();
  return svm_model_from_string(buf.str());
}

std::vector<std::vector<std::size_t>> make_folds(const std::vector<int>& labels,
                                                 const std::optional<std::vector<int>>& groups, int folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (labels.size() < static_cast<std::size_t>(folds)) {
    throw ArgumentError("cross-validation: fewer samples than folds");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  if (groups) {
    if (groups->size() != labels.size()) throw ShapeError("cross-validation: one group per sample required");
    std::vector<int> unique(groups->begin(), groups->end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < static_cast<std::size_t>(folds)) {
      throw ArgumentError("cross-validation: " + std::to_string(folds) + " folds but only " +
                          std::to_string(unique.size()) + " groups");
    }
    std::shuffle(unique.begin(), unique.end(), rng);
    std::map<int, std::size_t> fold_of;
    for (std::size_t k = 0; k < unique.size(); ++k) fold_of[unique[k]] = k % out.size();
    for (std::size_t i = 0; i < labels.size(); ++i) out[fold_of.at((*groups)[i])].push_back(i);
    return out;
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::size_t next = 0;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) out[next++ % out.size()].push_back(i);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

double cross_validate(const std::vector<VectorXd>& features, const std::vector<int>& labels,
                      const std::optional<std::vector<int>>& groups, const CvConfig& config) {
  check_features(features, labels);
  const auto folds = make_folds(labels, groups, config.folds, config.seed);
  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  double sum = 0.0;
  int used = 0;
  std::vector<bool> held(features.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].empty()) continue;
    std::fill(held.begin(), held.end(), false);
    for (std::size_t i : folds[f]) held[i] = true;
    std::vector<VectorXd> train_x;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!held[i]) {
        train_x.push_back(features[i]);
        train_y.push_back(labels[i]);
      }
    }
    std::size_t correct = 0;
    const std::set<int> present(train_y.begin(), train_y.end());
    if (present.size() < 2) {
      // Single-class training fold: the only sensible prediction is that class.
      for (std::size_t i : folds[f]) correct += labels[i] == *present.begin();
    } else {
      const SvmModel model =
          train_ovr(train_x, train_y, {config.c_reg, config.epochs, config.seed + f, classes});
      for (std::size_t i : folds[f]) correct += predict_label(model, features[i]) == labels[i];
    }
    sum += static_cast<double>(correct) / static_cast<double>(folds[f].size());
    ++used;
  }
  return sum / static_cast<double>(used);
}

double select_c_reg(const std::vector<VectorXd>& features, const std::vector<int>& labels,
                    const std::optional<std::vector<int>>& groups, const std::vector<double>& grid,
                    const CvConfig& config) {
  if (grid.empty()) throw ArgumentError("C grid is empty");
  double best_c = grid.front();
  double best_acc = -1.0;
  for (double c : grid) {
    CvConfig cv = config;
    cv.c_reg = c;
    const double acc = cross_validate(features, labels, groups, cv);
    if (acc > best_acc) {
      best_acc = acc;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace dtlstm
