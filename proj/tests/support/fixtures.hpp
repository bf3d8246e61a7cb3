#pragma once

#include "dtlstm/lstm.hpp"
#include "dtlstm/normalization.hpp"
#include "dtlstm/skeleton_data.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace dtlstm::testing {

// Canonical pose: hips on the x axis, spine along +y, hip center at the origin.
// Roles follow synth_roles(joints): 0 center, 1 left hip, 2 right hip, 3 spine base, 4 spine.
Frame canonical_frame(int joints = 6);

SkeletonSequence random_sequence(std::mt19937_64& rng, int frames, int joints, const std::string& id = "s");

Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

SkeletonSequence transformed(const SkeletonSequence& seq, const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
                             double scale);

NormalizedSequence random_normalized(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index steps, int label,
                                     Eigen::Index real_steps = -1);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Entries off by more than 1e-4 relative and by more than the finite-difference noise floor.
  std::size_t beyond_noise = 0;
  int worst_tensor = -1;
  Eigen::Index worst_entry = -1;
  double worst_analytic = 0.0;
  std::string worst;  // tensor/entry with the largest error
};

/// Central finite differences over every parameter entry, compared with the analytic gradient.
GradCheckResult gradient_check(const std::vector<NormalizedSequence>& batch, const LstmParams& params,
                               const LossOptions& loss, double step = 1e-5,
                               const ForwardOptions& forward = {});

}  // namespace dtlstm::testing
