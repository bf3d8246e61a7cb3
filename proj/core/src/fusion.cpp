#include "dtlstm/fusion.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/lstm.hpp"

#include <algorithm>
#include <set>

namespace dtlstm {

ScoreNormalization parse_score_normalization(const std::string& name) {
  if (name == "softmax") return ScoreNormalization::Softmax;
  if (name == "min-max") return ScoreNormalization::MinMax;
  if (name == "none") return ScoreNormalization::None;
  throw ConfigError("unknown score normalization '" + name + "' (expected softmax, min-max or none)");
}

std::string to_string(ScoreNormalization n) {
  switch (n) {
    case ScoreNormalization::Softmax: return "softmax";
    case ScoreNormalization::MinMax: return "min-max";
    case ScoreNormalization::None: return "none";
  }
  return "?";
}

double FusionConfig::weight_for(const std::string& producer) const {
  const auto it = weights.find(producer);
  return it == weights.end() ? default_weight : it->second;
}

ScoreNormalization FusionConfig::normalization_for(const std::string& producer) const {
  const auto it = normalization.find(producer);
  return it == normalization.end() ? default_normalization : it->second;
}

void FusionConfig::check() const {
  if (!(default_weight >= 0.0)) throw ConfigError("fusion: default weight must be non-negative");
  for (const auto& [tag, w] : weights) {
    if (!(w >= 0.0)) throw ConfigError("fusion: weight for '" + tag + "' must be non-negative");
  }
}

ClassScores normalize_scores(const ClassScores& s, ScoreNormalization mode) {
  ClassScores out{s.producer, s.values};
  const Eigen::Index c = s.values.size();
  if (c == 0) return out;
  switch (mode) {
    case ScoreNormalization::Softmax: {
      const double m = s.values.maxCoeff();
      out.values = (s.values.array() - m).exp();
      out.values /= out.values.sum();
      break;
    }
    case ScoreNormalization::MinMax: {
      const double lo = s.values.minCoeff();
      const double hi = s.values.maxCoeff();
      if (hi > lo) {
        out.values = (s.values.array() - lo) / (hi - lo);
      } else {
        out.values.setConstant(1.0 / static_cast<double>(c));
      }
      break;
    }
    case ScoreNormalization::None:
      break;
  }
  return out;
}

FusedPrediction fuse(std::vector<ClassScores> streams, const FusionConfig& config) {
  if (streams.empty()) throw ArgumentError("fusion needs at least one score stream");
  config.check();
  const Eigen::Index classes = streams.front().classes();
  for (const auto& s : streams) {
    if (s.classes() != classes) {
      throw ShapeError("fusion: stream '" + s.producer + "' has " + std::to_string(s.classes()) +
                       " classes, expected " + std::to_string(classes));
    }
  }
  // Canonical order makes the floating-point sum independent of input order.
  std::sort(streams.begin(), streams.end(), [](const ClassScores& a, const ClassScores& b) {
    if (a.producer != b.producer) return a.producer < b.producer;
    return std::lexicographical_compare(a.values.data(), a.values.data() + a.values.size(), b.values.data(),
                                        b.values.data() + b.values.size());
  });
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(classes);
  double total = 0.0;
  std::string producer;
  for (const auto& s : streams) {
    const double w = config.weight_for(s.producer);
    acc += w * normalize_scores(s, config.normalization_for(s.producer)).values;
    total += w;
    producer += (producer.empty() ? "" : "+") + s.producer;
  }
  if (!(total > 0.0)) throw ConfigError("fusion: stream weights are all zero");
  FusedPrediction out;
  out.scores = ClassScores{producer, acc / total};
  out.label = argmax(out.scores.values);
  return out;
}

std::vector<PredictionRecord> fuse_tables(const std::vector<std::vector<ScoreRecord>>& tables,
                                          const FusionConfig& config,
                                          const std::optional<std::map<std::string, int>>& labels) {
  if (tables.empty()) throw ArgumentError("fusion needs at least one score file");
  std::vector<std::map<std::string, const ClassScores*>> index(tables.size());
  std::set<std::string> ids;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    for (const auto& r : tables[k]) {
      if (!index[k].emplace(r.id, &r.scores).second) {
        throw AlignmentError("score stream " + std::to_string(k) + " lists sample '" + r.id + "' twice");
      }
      ids.insert(r.id);
    }
  }
  std::vector<PredictionRecord> out;
  for (const auto& id : ids) {
    std::vector<ClassScores> streams;
    for (std::size_t k = 0; k < tables.size(); ++k) {
      const auto it = index[k].find(id);
      if (it == index[k].end()) {
        throw AlignmentError("sample '" + id + "' is missing from score stream " + std::to_string(k));
      }
      streams.push_back(*it->second);
    }
    const FusedPrediction fused = fuse(std::move(streams), config);
    PredictionRecord rec{id, fused.scores.values, fused.label, std::nullopt};
    if (labels) {
      const auto it = labels->find(id);
      if (it != labels->end()) rec.truth = it->second;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace dtlstm
