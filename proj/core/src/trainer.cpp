#include "dtlstm/trainer.hpp"

#include "dtlstm/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <thread>

namespace dtlstm {

using Eigen::Index;

void TrainConfig::check() const {
  if (hidden.empty()) throw ConfigError("train: at least one LSTM layer is required");
  for (Index h : hidden) {
    if (h <= 0) throw ConfigError("train: hidden sizes must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("train: clip threshold must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train: dropout must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train: Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("train: Adam epsilon must be positive");
  if (epochs < 0) throw ConfigError("train: epochs must be non-negative");
  if (batch_size <= 0) throw ConfigError("train: batch size must be positive");
  if (threads < 0) throw ConfigError("train: threads must be non-negative");
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["hidden"] = c.hidden;
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["clip_norm"] = c.clip_norm;
  j["dropout"] = c.dropout;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["loss_mode"] = to_string(c.loss_mode);
  j["time_reduction"] = to_string(c.time_reduction);
  j["mask_padding"] = c.mask_padding;
  j["threads"] = c.threads;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("train config must be an object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "hidden") c.hidden = v.get<std::vector<Index>>();
      else if (k == "learning_rate") c.learning_rate = v.get<double>();
      else if (k == "beta1") c.beta1 = v.get<double>();
      else if (k == "beta2") c.beta2 = v.get<double>();
      else if (k == "adam_epsilon") c.adam_epsilon = v.get<double>();
      else if (k == "clip_norm") c.clip_norm = v.get<double>();
      else if (k == "dropout") c.dropout = v.get<double>();
      else if (k == "epochs") c.epochs = v.get<int>();
      else if (k == "batch_size") c.batch_size = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "loss_mode") c.loss_mode = parse_loss_mode(v.get<std::string>());
      else if (k == "time_reduction") c.time_reduction = parse_time_reduction(v.get<std::string>());
      else if (k == "mask_padding") c.mask_padding = v.get<bool>();
      else if (k == "threads") c.threads = v.get<int>();
      else throw ConfigError("train config: unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.check();
  return c;
}

namespace {

struct BatchResult {
  LstmParams grads;
  double loss = 0.0;
  int correct = 0;
};

BatchResult run_batch(std::span<const NormalizedSequence* const> batch, const LstmParams& params,
                      const TrainConfig& config, std::uint64_t dropout_seed) {
  const ForwardOptions fwd{config.dropout, true, dropout_seed};
  const LstmTape tape = forward_batch(batch, params, fwd);
  const BatchTargets targets = BatchTargets::from(batch);
  BatchResult r;
  r.loss = compute_loss(tape, targets, config.loss()).value;
  r.grads = backward_through_time(tape, targets, config.loss(), params);
  for (Index n = 0; n < tape.batch; ++n) {
    const auto& mask = batch[static_cast<std::size_t>(n)]->mask;
    if (argmax(readout_probabilities(tape, n, mask, Readout::MeanOverTime)) ==
        targets.labels[static_cast<std::size_t>(n)]) {
      ++r.correct;
    }
  }
  return r;
}

}  // namespace

TrainResult train(const std::vector<NormalizedSequence>& data, const TrainConfig& config) {
  config.check();
  if (data.empty()) throw ArgumentError("train: empty dataset");
  std::set<int> labels;
  for (const auto& s : data) {
    if (s.label < 0) throw ArgumentError("train: negative label on '" + s.id + "'");
    labels.insert(s.label);
  }
  if (labels.size() < 2) throw ArgumentError("train: at least two classes must be present");
  const Index classes = *labels.rbegin() + 1;
  const Index dim = data.front().dim();
  const Index steps = data.front().length();
  for (const auto& s : data) {
    if (s.dim() != dim || s.length() != steps) {
      throw ShapeError("train: sequence '" + s.id + "' differs in frame dim or length");
    }
  }

  TrainResult result;
  result.params = LstmParams::initialize(dim, config.hidden, classes, config.seed);
  AdamState adam = AdamState::for_params(result.params);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<const NormalizedSequence*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&data[order[k]]);
      const std::uint64_t batch_seed = rng();

      BatchResult combined;
      const std::size_t chunks =
          std::min<std::size_t>(config.threads <= 1 ? 1 : static_cast<std::size_t>(config.threads), batch.size());
      if (chunks == 1) {
        combined = run_batch(batch, result.params, config, batch_seed);
      } else {
        std::vector<BatchResult> parts(chunks);
        std::vector<std::thread> workers;
        const std::size_t per = (batch.size() + chunks - 1) / chunks;
        std::vector<std::span<const NormalizedSequence* const>> views;
        for (std::size_t c = 0; c * per < batch.size(); ++c) {
          const std::size_t lo = c * per;
          const std::size_t hi = std::min(batch.size(), lo + per);
          views.emplace_back(batch.data() + lo, hi - lo);
        }
        parts.resize(views.size());
        for (std::size_t c = 0; c < views.size(); ++c) {
          workers.emplace_back([&, c] { parts[c] = run_batch(views[c], result.params, config, batch_seed + c); });
        }
        for (auto& w : workers) w.join();
        combined.grads = result.params.zeros_like();
        for (std::size_t c = 0; c < views.size(); ++c) {
          const double share = static_cast<double>(views[c].size()) / static_cast<double>(batch.size());
          for_each_tensor_pair(combined.grads, parts[c].grads,
                               [share](auto& acc, const auto& g) { acc += share * g; });
          combined.loss += share * parts[c].loss;
          combined.correct += parts[c].correct;
        }
      }
      clip_global_norm(combined.grads, config.clip_norm);
      adam_update(result.params, combined.grads, adam, config.adam());
      loss_sum += combined.loss * static_cast<double>(batch.size());
      correct += combined.correct;
    }
    const double n = static_cast<double>(data.size());
    result.log.push_back({epoch, loss_sum / n, static_cast<double>(correct) / n});
  }
  return result;
}

std::vector<Eigen::VectorXd> predict_probabilities(const std::vector<NormalizedSequence>& data,
                                                   const LstmParams& params, Readout readout,
                                                   int batch_size) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.size());
  const std::size_t step = static_cast<std::size_t>(std::max(1, batch_size));
  for (std::size_t start = 0; start < data.size(); start += step) {
    std::vector<const NormalizedSequence*> batch;
    for (std::size_t k = start; k < std::min(data.size(), start + step); ++k) batch.push_back(&data[k]);
    const LstmTape tape = forward_batch(batch, params, ForwardOptions{});
    for (Index n = 0; n < tape.batch; ++n) {
      out.push_back(readout_probabilities(tape, n, batch[static_cast<std::size_t>(n)]->mask, readout));
    }
  }
  return out;
}

}  // namespace dtlstm
