#include "dtlstm/latent_features.hpp"

#include "dtlstm/error.hpp"

namespace dtlstm {

using Eigen::Index;

FeatureLayout parse_feature_layout(const std::string& name) {
  if (name == "flatten-time") return FeatureLayout::FlattenTime;
  if (name == "mean-over-time") return FeatureLayout::MeanOverTime;
  if (name == "last-step") return FeatureLayout::LastStep;
  throw ConfigError("unknown feature layout '" + name +
                    "' (expected flatten-time, mean-over-time or last-step)");
}

std::string to_string(FeatureLayout layout) {
  switch (layout) {
    case FeatureLayout::FlattenTime: return "flatten-time";
    case FeatureLayout::MeanOverTime: return "mean-over-time";
    case FeatureLayout::LastStep: return "last-step";
  }
  return "?";
}

namespace {

LatentFeatureMatrix from_tape(const LstmTape& tape, Index n, const NormalizedSequence& seq) {
  LatentFeatureMatrix m;
  m.id = seq.id;
  m.subject = seq.subject;
  m.label = seq.label;
  m.mask = seq.mask;
  m.rows.resize(tape.length(), tape.top(0).h.rows());
  for (Index t = 0; t < tape.length(); ++t) m.rows.row(t) = tape.top(t).h.col(n).transpose();
  return m;
}

}  // namespace

LatentFeatureMatrix extract_latents(const NormalizedSequence& seq, const LstmParams& params) {
  const LstmTape tape = forward_sequence(seq, params, ForwardOptions{});
  return from_tape(tape, 0, seq);
}

std::vector<LatentFeatureMatrix> extract_all(const std::vector<NormalizedSequence>& data,
                                             const LstmParams& params, int batch_size) {
  std::vector<LatentFeatureMatrix> out;
  out.reserve(data.size());
  const std::size_t step = static_cast<std::size_t>(std::max(1, batch_size));
  for (std::size_t start = 0; start < data.size(); start += step) {
    std::vector<const NormalizedSequence*> batch;
    for (std::size_t k = start; k < std::min(data.size(), start + step); ++k) batch.push_back(&data[k]);
    const LstmTape tape = forward_batch(batch, params, ForwardOptions{});
    for (Index n = 0; n < tape.batch; ++n) out.push_back(from_tape(tape, n, *batch[static_cast<std::size_t>(n)]));
  }
  return out;
}

Eigen::VectorXd to_classifier_vector(const LatentFeatureMatrix& m, FeatureLayout layout) {
  const Index steps = m.rows.rows();
  const Index hidden = m.rows.cols();
  if (static_cast<Index>(m.mask.size()) != steps) throw ShapeError("latent matrix mask length mismatch");
  Index real = 0;
  for (bool b : m.mask) real += b ? 1 : 0;
  if (real == 0) throw ArgumentError("latent matrix '" + m.id + "' has no real frames");

  switch (layout) {
    case FeatureLayout::FlattenTime: {
      Eigen::VectorXd v(steps * hidden);
      for (Index t = 0; t < steps; ++t) {
        if (m.mask[static_cast<std::size_t>(t)]) {
          v.segment(t * hidden, hidden) = m.rows.row(t).transpose();
        } else {
          v.segment(t * hidden, hidden).setZero();
        }
      }
      return v;
    }
    case FeatureLayout::MeanOverTime: {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(hidden);
      for (Index t = 0; t < steps; ++t) {
        if (m.mask[static_cast<std::size_t>(t)]) v += m.rows.row(t).transpose();
      }
      return v / static_cast<double>(real);
    }
    case FeatureLayout::LastStep:
      for (Index t = steps - 1; t >= 0; --t) {
        if (m.mask[static_cast<std::size_t>(t)]) return m.rows.row(t).transpose();
      }
  }
  throw ArgumentError("unreachable feature layout");
}

}  // namespace dtlstm
