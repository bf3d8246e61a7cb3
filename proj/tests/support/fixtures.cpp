#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "dtlstm/text_io.hpp"

namespace dtlstm::testing {

using Eigen::Vector3d;

Frame canonical_frame(int joints) {
  Frame f(static_cast<std::size_t>(joints), Vector3d::Zero());
  f[1] = {1, 0, 0};
  f[2] = {-1, 0, 0};
  f[3] = {0, 0, 0};
  f[4] = {0, 1, 0};
  for (int j = 5; j < joints; ++j) f[static_cast<std::size_t>(j)] = {0.1 * j, 1.0 + 0.2 * j, -0.05 * j};
  return f;
}

SkeletonSequence random_sequence(std::mt19937_64& rng, int frames, int joints, const std::string& id) {
  std::normal_distribution<double> g(0.0, 1.0);
  SkeletonSequence s{id, 1, 0, {}};
  for (int t = 0; t < frames; ++t) {
    Frame f;
    for (int j = 0; j < joints; ++j) f.emplace_back(g(rng), g(rng), g(rng));
    s.frames.push_back(std::move(f));
  }
  return s;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

SkeletonSequence transformed(const SkeletonSequence& seq, const Eigen::Matrix3d& R, const Vector3d& t,
                             double scale) {
  SkeletonSequence out = seq;
  for (auto& f : out.frames) {
    for (auto& p : f) p = scale * (R * p) + t;
  }
  return out;
}

NormalizedSequence random_normalized(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index steps, int label,
                                     Eigen::Index real_steps) {
  std::normal_distribution<double> g(0.0, 1.0);
  if (real_steps < 0) real_steps = steps;
  NormalizedSequence s;
  s.id = "n" + std::to_string(label);
  s.label = label;
  s.vectors = Eigen::MatrixXd::Zero(dim, steps);
  s.mask.assign(static_cast<std::size_t>(steps), false);
  for (Eigen::Index t = 0; t < real_steps; ++t) {
    for (Eigen::Index d = 0; d < dim; ++d) s.vectors(d, t) = g(rng);
    s.mask[static_cast<std::size_t>(t)] = true;
  }
  return s;
}

// Central differences at step 1e-5 carry O(1e-11) truncation and rounding error, which
// dominates the relative error of gradient entries much smaller than 1e-6.
constexpr double kNoiseFloor = 1e-10;

GradCheckResult gradient_check(const std::vector<NormalizedSequence>& batch, const LstmParams& params,
                               const LossOptions& loss, double step,
                               const ForwardOptions& fwd) {
  std::vector<const NormalizedSequence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  const BatchTargets targets = BatchTargets::from(ptrs);
  auto loss_at = [&](const LstmParams& p) { return compute_loss(forward_batch(ptrs, p, fwd), targets, loss).value; };

  const LstmParams analytic = backward_through_time(forward_batch(ptrs, params, fwd), targets, loss, params);
  LstmParams probe = params;
  GradCheckResult out;
  int tensor = 0;
  for_each_tensor_pair(probe, analytic, [&](auto& p, const auto& a) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double saved = p.data()[k];
      p.data()[k] = saved + step;
      const double up = loss_at(probe);
      p.data()[k] = saved - step;
      const double down = loss_at(probe);
      p.data()[k] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double exact = a.data()[k];
      const double rel = std::abs(numeric - exact) / std::max({std::abs(numeric), std::abs(exact), 1e-8});
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.worst_tensor = tensor;
        out.worst_entry = k;
        out.worst_analytic = exact;
        out.worst = "tensor " + std::to_string(tensor) + " entry " + std::to_string(k) + " analytic " +
                    format_double(exact) + " numeric " + format_double(numeric);
      }
      if (rel >= 1e-4 && std::abs(numeric - exact) > kNoiseFloor) ++out.beyond_noise;
      ++out.checked;
    }
    ++tensor;
  });
  return out;
}

}  // namespace dtlstm::testing
