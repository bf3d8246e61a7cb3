#pragma once

#include "dtlstm/normalization.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dtlstm {

// Gate blocks inside every 4H-row tensor are stacked in this order.
inline constexpr const char* kGateOrder = "ifgo";

enum class LossMode { ManyToMany, ManyToOne };
enum class TimeReduction { Mean, Sum };

LossMode parse_loss_mode(const std::string& name);
std::string to_string(LossMode mode);
TimeReduction parse_time_reduction(const std::string& name);
std::string to_string(TimeReduction r);

struct LayerParams {
  Eigen::MatrixXd W;  // 4H x D
  Eigen::MatrixXd U;  // 4H x H
  Eigen::VectorXd b;  // 4H

  Eigen::Index input_dim() const { return W.cols(); }
  Eigen::Index hidden() const { return U.cols(); }
};

/// Weights of an L-layer stacked LSTM plus the softmax projection on top.
/// The same type holds gradients and Adam moments.
struct LstmParams {
  std::vector<LayerParams> layers;
  Eigen::MatrixXd W_out;  // C x H_L
  Eigen::VectorXd b_out;  // C

  static LstmParams zeros(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden,
                          Eigen::Index classes);
  /// Weights uniform in [-1/sqrt(H), 1/sqrt(H)], biases zero except forget bias +1.
  static LstmParams initialize(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden,
                               Eigen::Index classes, std::uint64_t seed);

  LstmParams zeros_like() const;
  Eigen::Index input_dim() const { return layers.front().input_dim(); }
  Eigen::Index top_hidden() const { return layers.back().hidden(); }
  Eigen::Index classes() const { return W_out.rows(); }
  std::size_t layer_count() const { return layers.size(); }
  std::vector<Eigen::Index> hidden_sizes() const;
  Eigen::Index parameter_count() const;

  /// Throws ShapeError when tensor shapes do not chain or any entry is non-finite.
  void check() const;
  bool same_shape(const LstmParams& other) const;
};

/// Calls f(tensor) on every tensor in a fixed order (layers bottom-up W, U, b, then W_out, b_out).
template <typename Params, typename F>
void for_each_tensor(Params& p, F&& f) {
  for (auto& layer : p.layers) {
    f(layer.W);
    f(layer.U);
    f(layer.b);
  }
  f(p.W_out);
  f(p.b_out);
}

/// Calls f(a_tensor, b_tensor) on matching tensors of two same-shaped parameter sets.
template <typename A, typename B, typename F>
void for_each_tensor_pair(A& a, B& b, F&& f) {
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    f(a.layers[l].W, b.layers[l].W);
    f(a.layers[l].U, b.layers[l].U);
    f(a.layers[l].b, b.layers[l].b);
  }
  f(a.W_out, b.W_out);
  f(a.b_out, b.b_out);
}

struct CellStep {
  Eigen::VectorXd pre;    // 4H gate pre-activations
  Eigen::VectorXd gates;  // 4H activations (sigmoid for i, f, o; tanh for g)
  Eigen::VectorXd c;
  Eigen::VectorXd h;
};

/// One LSTM step: c = f*c_prev + i*g, h = o*tanh(c). Throws NumericError on overflow.
CellStep cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                   const Eigen::VectorXd& c_prev, const LayerParams& layer);

/// Record of one layer at one timestep for a batch of N samples (one per column).
struct LayerRecord {
  Eigen::MatrixXd input;    // D_l x N, as fed to the layer
  Eigen::MatrixXd pre;      // 4H x N
  Eigen::MatrixXd gates;    // 4H x N
  Eigen::MatrixXd c;        // H x N
  Eigen::MatrixXd h;        // H x N, before dropout
  Eigen::MatrixXd dropout;  // H x N multiplier (0 or 1/(1-p)); empty when no dropout ran
};

/// Everything the backward pass needs from a forward pass over a batch.
struct LstmTape {
  Eigen::Index batch = 0;
  std::vector<std::vector<LayerRecord>> steps;  // [t][layer]
  std::vector<Eigen::MatrixXd> probs;           // [t] C x N softmax outputs

  Eigen::Index length() const { return static_cast<Eigen::Index>(steps.size()); }
  const LayerRecord& top(Eigen::Index t) const { return steps[static_cast<std::size_t>(t)].back(); }
  /// Input of the softmax projection at step t: top-layer h with its dropout applied.
  Eigen::MatrixXd top_output(Eigen::Index t) const;
};

struct ForwardOptions {
  double dropout = 0.0;
  bool training = false;
  std::uint64_t seed = 0;
};

/// Runs every sequence (same length and input dim) through all layers and steps.
LstmTape forward_batch(std::span<const NormalizedSequence* const> batch, const LstmParams& params,
                       const ForwardOptions& options);
LstmTape forward_sequence(const NormalizedSequence& seq, const LstmParams& params,
                          const ForwardOptions& options);

struct LossOptions {
  LossMode mode = LossMode::ManyToMany;
  TimeReduction reduction = TimeReduction::Mean;
  bool mask_padding = true;
};

/// Labels and frame masks for the samples of a tape, in column order.
struct BatchTargets {
  std::vector<int> labels;
  std::vector<std::vector<bool>> masks;

  static BatchTargets from(std::span<const NormalizedSequence* const> batch);
};

/// T x N matrix of per-(step, sample) loss weights; the loss is
/// sum_{t,n} weight(t,n) * -log p_t[label_n] and the gradient uses the same weights.
Eigen::MatrixXd loss_weights(const BatchTargets& targets, Eigen::Index steps, const LossOptions& options);

struct LossValue {
  double value = 0.0;
  int clamped = 0;  // number of probabilities raised to 1e-12 before the log
};

LossValue compute_loss(const LstmTape& tape, const BatchTargets& targets, const LossOptions& options);

/// Exact gradient of compute_loss with respect to every parameter.
LstmParams backward_through_time(const LstmTape& tape, const BatchTargets& targets,
                                 const LossOptions& options, const LstmParams& params);

enum class Readout { LastStep, MeanOverTime };

/// Class probabilities for sample n of a tape, read at the last real step or
/// averaged over the real steps.
Eigen::VectorXd readout_probabilities(const LstmTape& tape, Eigen::Index n,
                                      const std::vector<bool>& mask, Readout readout);

/// Lowest index wins ties.
int argmax(const Eigen::VectorXd& v);

}  // namespace dtlstm
