#include "dtlstm/lstm.hpp"

#include "dtlstm/error.hpp"

#include <cmath>
#include <random>

namespace dtlstm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LossMode parse_loss_mode(const std::string& name) {
  if (name == "many-to-many") return LossMode::ManyToMany;
  if (name == "many-to-one") return LossMode::ManyToOne;
  throw ConfigError("unknown loss mode '" + name + "' (expected many-to-many or many-to-one)");
}

std::string to_string(LossMode mode) {
  return mode == LossMode::ManyToMany ? "many-to-many" : "many-to-one";
}

TimeReduction parse_time_reduction(const std::string& name) {
  if (name == "mean") return TimeReduction::Mean;
  if (name == "sum") return TimeReduction::Sum;
  throw ConfigError("unknown time reduction '" + name + "' (expected mean or sum)");
}

std::string to_string(TimeReduction r) { return r == TimeReduction::Mean ? "mean" : "sum"; }

LstmParams LstmParams::zeros(Index input_dim, const std::vector<Index>& hidden, Index classes) {
  if (input_dim <= 0 || hidden.empty() || classes <= 0) {
    throw ShapeError("LSTM needs a positive input dim, at least one layer and at least one class");
  }
  LstmParams p;
  Index d = input_dim;
  for (Index h : hidden) {
    if (h <= 0) throw ShapeError("hidden sizes must be positive");
    p.layers.push_back({MatrixXd::Zero(4 * h, d), MatrixXd::Zero(4 * h, h), VectorXd::Zero(4 * h)});
    d = h;
  }
  p.W_out = MatrixXd::Zero(classes, d);
  p.b_out = VectorXd::Zero(classes);
  return p;
}

LstmParams LstmParams::initialize(Index input_dim, const std::vector<Index>& hidden, Index classes,
                                  std::uint64_t seed) {
  LstmParams p = zeros(input_dim, hidden, classes);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](MatrixXd& m, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  };
  for (auto& layer : p.layers) {
    const Index h = layer.hidden();
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    fill(layer.W, bound);
    fill(layer.U, bound);
    layer.b.segment(h, h).setOnes();
  }
  fill(p.W_out, 1.0 / std::sqrt(static_cast<double>(p.top_hidden())));
  return p;
}

LstmParams LstmParams::zeros_like() const { return zeros(input_dim(), hidden_sizes(), classes()); }

std::vector<Index> LstmParams::hidden_sizes() const {
  std::vector<Index> out;
  for (const auto& l : layers) out.push_back(l.hidden());
  return out;
}

Index LstmParams::parameter_count() const {
  Index n = 0;
  for_each_tensor(*this, [&n](const auto& t) { n += t.size(); });
  return n;
}

void LstmParams::check() const {
  if (layers.empty()) throw ShapeError("LSTM has no layers");
  Index d = layers.front().input_dim();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const Index h = layer.hidden();
    if (layer.W.rows() != 4 * h || layer.W.cols() != d || layer.U.rows() != 4 * h ||
        layer.b.size() != 4 * h) {
      throw ShapeError("LSTM layer " + std::to_string(l) + " has inconsistent tensor shapes");
    }
    d = h;
  }
  if (W_out.cols() != d || b_out.size() != W_out.rows()) {
    throw ShapeError("LSTM output projection does not match the top layer");
  }
  bool finite = true;
  for_each_tensor(*this, [&finite](const auto& t) { finite = finite && t.allFinite(); });
  if (!finite) throw ShapeError("LSTM parameters contain non-finite entries");
}

bool LstmParams::same_shape(const LstmParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  bool same = true;
  for_each_tensor_pair(*this, other, [&same](const auto& a, const auto& b) {
    same = same && a.rows() == b.rows() && a.cols() == b.cols();
  });
  return same;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Applies the gate nonlinearities to a 4H x N block of pre-activations.
void activate(const MatrixXd& pre, MatrixXd& gates, Index h) {
  gates.resize(pre.rows(), pre.cols());
  gates.topRows(2 * h) = pre.topRows(2 * h).unaryExpr(&sigmoid);
  gates.middleRows(2 * h, h) = pre.middleRows(2 * h, h).array().tanh();
  gates.bottomRows(h) = pre.bottomRows(h).unaryExpr(&sigmoid);
}

MatrixXd softmax_columns(const MatrixXd& logits) {
  MatrixXd p(logits.rows(), logits.cols());
  for (Index n = 0; n < logits.cols(); ++n) {
    const double m = logits.col(n).maxCoeff();
    p.col(n) = (logits.col(n).array() - m).exp();
    p.col(n) /= p.col(n).sum();
  }
  return p;
}

}  // namespace

CellStep cell_step(const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
                   const LayerParams& layer) {
  const Index h = layer.hidden();
  if (x.size() != layer.input_dim() || h_prev.size() != h || c_prev.size() != h) {
    throw ShapeError("cell_step: input or state size does not match the layer");
  }
  CellStep s;
  s.pre = layer.W * x + layer.U * h_prev + layer.b;
  MatrixXd gates;
  activate(s.pre, gates, h);
  s.gates = gates.col(0);
  const auto i = s.gates.segment(0, h).array();
  const auto f = s.gates.segment(h, h).array();
  const auto g = s.gates.segment(2 * h, h).array();
  const auto o = s.gates.segment(3 * h, h).array();
  s.c = f * c_prev.array() + i * g;
  s.h = o * s.c.array().tanh();
  if (!s.c.allFinite() || !s.h.allFinite()) throw NumericError("cell_step: non-finite state");
  return s;
}

MatrixXd LstmTape::top_output(Index t) const {
  const LayerRecord& r = top(t);
  if (r.dropout.size() == 0) return r.h;
  return r.h.cwiseProduct(r.dropout);
}

LstmTape forward_batch(std::span<const NormalizedSequence* const> batch, const LstmParams& params,
                       const ForwardOptions& options) {
  if (batch.empty()) throw ArgumentError("forward pass over an empty batch");
  if (options.dropout < 0.0 || options.dropout >= 1.0) {
    throw ArgumentError("dropout probability must lie in [0, 1)");
  }
  const Index n_batch = static_cast<Index>(batch.size());
  const Index steps = batch.front()->length();
  for (const NormalizedSequence* s : batch) {
    if (s->dim() != params.input_dim()) {
      throw ShapeError("sequence '" + s->id + "' has frame dim " + std::to_string(s->dim()) +
                       ", network expects " + std::to_string(params.input_dim()));
    }
    if (s->length() != steps) throw ShapeError("sequences in a batch must share one length");
  }

  const bool use_dropout = options.training && options.dropout > 0.0;
  const double keep = 1.0 - options.dropout;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t L = params.layer_count();
  LstmTape tape;
  tape.batch = n_batch;
  tape.steps.resize(static_cast<std::size_t>(steps));
  tape.probs.resize(static_cast<std::size_t>(steps));

  for (Index t = 0; t < steps; ++t) {
    auto& records = tape.steps[static_cast<std::size_t>(t)];
    records.resize(L);
    MatrixXd input(params.input_dim(), n_batch);
    for (Index n = 0; n < n_batch; ++n) input.col(n) = batch[static_cast<std::size_t>(n)]->vectors.col(t);

    for (std::size_t l = 0; l < L; ++l) {
      const LayerParams& layer = params.layers[l];
      const Index h = layer.hidden();
      LayerRecord& r = records[l];
      r.input = std::move(input);
      r.pre = layer.W * r.input;
      r.pre.colwise() += layer.b;
      if (t > 0) r.pre.noalias() += layer.U * tape.steps[static_cast<std::size_t>(t - 1)][l].h;
      activate(r.pre, r.gates, h);
      const auto i = r.gates.topRows(h).array();
      const auto f = r.gates.middleRows(h, h).array();
      const auto g = r.gates.middleRows(2 * h, h).array();
      const auto o = r.gates.bottomRows(h).array();
      if (t > 0) {
        r.c = f * tape.steps[static_cast<std::size_t>(t - 1)][l].c.array() + i * g;
      } else {
        r.c = i * g;
      }
      r.h = o * r.c.array().tanh();
      if (!r.c.allFinite() || !r.h.allFinite()) {
        throw NumericError("forward pass: non-finite state at step " + std::to_string(t) +
                           ", layer " + std::to_string(l));
      }
      // Between stacked layers only; the top layer feeds the softmax undropped.
      if (use_dropout && l + 1 < L) {
        r.dropout.resize(h, n_batch);
        for (Index k = 0; k < r.dropout.size(); ++k) {
          r.dropout.data()[k] = unit(rng) < keep ? 1.0 / keep : 0.0;
        }
        input = r.h.cwiseProduct(r.dropout);
      } else {
        input = r.h;
      }
    }
    MatrixXd logits = params.W_out * input;
    logits.colwise() += params.b_out;
    tape.probs[static_cast<std::size_t>(t)] = softmax_columns(logits);
  }
  return tape;
}

LstmTape forward_sequence(const NormalizedSequence& seq, const LstmParams& params,
                          const ForwardOptions& options) {
  const NormalizedSequence* one[] = {&seq};
  return forward_batch(one, params, options);
}

BatchTargets BatchTargets::from(std::span<const NormalizedSequence* const> batch) {
  BatchTargets t;
  for (const NormalizedSequence* s : batch) {
    t.labels.push_back(s->label);
    t.masks.push_back(s->mask);
  }
  return t;
}

MatrixXd loss_weights(const BatchTargets& targets, Index steps, const LossOptions& options) {
  if (targets.labels.empty()) throw ArgumentError("loss over an empty batch");
  if (targets.masks.size() != targets.labels.size()) {
    throw ConsistencyError("loss targets: one mask per label required");
  }
  const Index n_batch = static_cast<Index>(targets.labels.size());
  MatrixXd w = MatrixXd::Zero(steps, n_batch);
  const double per_sample = 1.0 / static_cast<double>(n_batch);
  for (Index n = 0; n < n_batch; ++n) {
    const auto& mask = targets.masks[static_cast<std::size_t>(n)];
    if (static_cast<Index>(mask.size()) != steps) {
      throw ConsistencyError("loss targets: mask length does not match the tape");
    }
    auto counts = [&](Index t) { return !options.mask_padding || mask[static_cast<std::size_t>(t)]; };
    if (options.mode == LossMode::ManyToOne) {
      for (Index t = steps - 1; t >= 0; --t) {
        if (counts(t)) {
          w(t, n) = per_sample;
          break;
        }
      }
    } else {
      Index real = 0;
      for (Index t = 0; t < steps; ++t) real += counts(t) ? 1 : 0;
      if (real == 0) continue;
      const double scale =
          options.reduction == TimeReduction::Mean ? per_sample / static_cast<double>(real) : per_sample;
      for (Index t = 0; t < steps; ++t) {
        if (counts(t)) w(t, n) = scale;
      }
    }
  }
  return w;
}

LossValue compute_loss(const LstmTape& tape, const BatchTargets& targets, const LossOptions& options) {
  if (static_cast<Index>(targets.labels.size()) != tape.batch) {
    throw ConsistencyError("loss targets do not match the tape batch size");
  }
  const MatrixXd w = loss_weights(targets, tape.length(), options);
  LossValue out;
  for (Index t = 0; t < tape.length(); ++t) {
    const MatrixXd& p = tape.probs[static_cast<std::size_t>(t)];
    for (Index n = 0; n < tape.batch; ++n) {
      if (w(t, n) == 0.0) continue;
      const int label = targets.labels[static_cast<std::size_t>(n)];
      if (label < 0 || label >= p.rows()) throw ConsistencyError("label outside the class range");
      double prob = p(label, n);
      if (!(prob > 1e-12)) {
        prob = 1e-12;
        ++out.clamped;
      }
      out.value -= w(t, n) * std::log(prob);
    }
  }
  return out;
}

LstmParams backward_through_time(const LstmTape& tape, const BatchTargets& targets,
                                 const LossOptions& options, const LstmParams& params) {
  const std::size_t L = params.layer_count();
  if (tape.steps.empty() || tape.steps.front().size() != L) {
    throw ConsistencyError("tape layer count does not match the parameters");
  }
  for (std::size_t l = 0; l < L; ++l) {
    const LayerRecord& r = tape.steps.front()[l];
    if (r.input.rows() != params.layers[l].input_dim() || r.h.rows() != params.layers[l].hidden()) {
      throw ConsistencyError("tape layer " + std::to_string(l) + " does not match the parameters");
    }
  }
  if (tape.probs.front().rows() != params.classes()) {
    throw ConsistencyError("tape class count does not match the parameters");
  }
  if (static_cast<Index>(targets.labels.size()) != tape.batch) {
    throw ConsistencyError("loss targets do not match the tape batch size");
  }

  const Index steps = tape.length();
  const Index n_batch = tape.batch;
  const MatrixXd w = loss_weights(targets, steps, options);
  LstmParams grad = params.zeros_like();

  std::vector<MatrixXd> dh_next(L), dc_next(L);
  for (std::size_t l = 0; l < L; ++l) {
    dh_next[l] = MatrixXd::Zero(params.layers[l].hidden(), n_batch);
    dc_next[l] = MatrixXd::Zero(params.layers[l].hidden(), n_batch);
  }

  MatrixXd dlogits(params.classes(), n_batch);
  for (Index t = steps - 1; t >= 0; --t) {
    const auto& records = tape.steps[static_cast<std::size_t>(t)];
    const MatrixXd& p = tape.probs[static_cast<std::size_t>(t)];

    // Softmax cross-entropy: d(-log p_y)/dlogits = p - onehot(y).
    dlogits = p;
    for (Index n = 0; n < n_batch; ++n) {
      dlogits(targets.labels[static_cast<std::size_t>(n)], n) -= 1.0;
      dlogits.col(n) *= w(t, n);
    }
    grad.W_out.noalias() += dlogits * tape.top_output(t).transpose();
    grad.b_out += dlogits.rowwise().sum();

    MatrixXd d_above = params.W_out.transpose() * dlogits;
    if (records.back().dropout.size() != 0) d_above.array() *= records.back().dropout.array();

    for (std::size_t li = L; li-- > 0;) {
      const LayerParams& layer = params.layers[li];
      const LayerRecord& r = records[li];
      const Index h = layer.hidden();
      const bool has_prev = t > 0;
      const LayerRecord* prev = has_prev ? &tape.steps[static_cast<std::size_t>(t - 1)][li] : nullptr;

      const MatrixXd dh = d_above + dh_next[li];
      const auto i = r.gates.topRows(h).array();
      const auto f = r.gates.middleRows(h, h).array();
      const auto g = r.gates.middleRows(2 * h, h).array();
      const auto o = r.gates.bottomRows(h).array();
      const Eigen::ArrayXXd tanh_c = r.c.array().tanh();

      const Eigen::ArrayXXd dc = dh.array() * o * (1.0 - tanh_c.square()) + dc_next[li].array();
      MatrixXd dz(4 * h, n_batch);
      dz.topRows(h) = dc * g * i * (1.0 - i);
      if (has_prev) {
        dz.middleRows(h, h) = dc * prev->c.array() * f * (1.0 - f);
      } else {
        dz.middleRows(h, h).setZero();
      }
      dz.middleRows(2 * h, h) = dc * i * (1.0 - g.square());
      dz.bottomRows(h) = dh.array() * tanh_c * o * (1.0 - o);
      dc_next[li] = dc * f;

      LayerParams& gl = grad.layers[li];
      gl.W.noalias() += dz * r.input.transpose();
      gl.b += dz.rowwise().sum();
      if (has_prev) gl.U.noalias() += dz * prev->h.transpose();
      dh_next[li].noalias() = layer.U.transpose() * dz;

      if (li > 0) {
        d_above.noalias() = layer.W.transpose() * dz;
        const LayerRecord& below = records[li - 1];
        if (below.dropout.size() != 0) d_above.array() *= below.dropout.array();
      }
    }
  }
  return grad;
}

VectorXd readout_probabilities(const LstmTape& tape, Index n, const std::vector<bool>& mask,
                               Readout readout) {
  const Index steps = tape.length();
  if (static_cast<Index>(mask.size()) != steps) throw ConsistencyError("mask length does not match the tape");
  if (readout == Readout::LastStep) {
    for (Index t = steps - 1; t >= 0; --t) {
      if (mask[static_cast<std::size_t>(t)]) return tape.probs[static_cast<std::size_t>(t)].col(n);
    }
    throw ArgumentError("readout over a sequence with no real frames");
  }
  VectorXd acc = VectorXd::Zero(tape.probs.front().rows());
  Index real = 0;
  for (Index t = 0; t < steps; ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    acc += tape.probs[static_cast<std::size_t>(t)].col(n);
    ++real;
  }
  if (real == 0) throw ArgumentError("readout over a sequence with no real frames");
  return acc / static_cast<double>(real);
}

int argmax(const VectorXd& v) {
  int best = 0;
  for (Index k = 1; k < v.size(); ++k) {
    if (v(k) > v(best)) best = static_cast<int>(k);
  }
  return best;
}

}  // namespace dtlstm
