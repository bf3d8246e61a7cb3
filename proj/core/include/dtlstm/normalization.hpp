#pragma once

#include "dtlstm/skeleton_data.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace dtlstm {

inline constexpr double kDegenerateEpsilon = 1e-8;

/// Body frame of one skeleton: p maps to rotation^T (p - origin) / scale.
/// Columns of `rotation` are the body x, y, z axes in sensor coordinates.
struct BodyTransform {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double scale = 1.0;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation.transpose() * (p - origin) / scale;
  }
};

enum class NormalizationMode { PerFrame, FirstFrame };

NormalizationMode parse_normalization_mode(const std::string& name);
std::string to_string(NormalizationMode mode);

/// Fixed-length network input. Column t of `vectors` is v_t, laid out joint-major
/// (x0, y0, z0, x1, ...). Columns whose mask entry is false are zero padding.
struct NormalizedSequence {
  std::string id;
  int subject = 0;
  int label = 0;
  Eigen::MatrixXd vectors;
  std::vector<bool> mask;

  Eigen::Index length() const { return vectors.cols(); }
  Eigen::Index dim() const { return vectors.rows(); }
  std::size_t real_length() const;
};

/// x axis along rightHip -> leftHip, y along the spine component orthogonal to
/// x, z = x cross y, scale = spine length. Degenerate geometry (short vectors
/// or parallel hip/spine) returns `fallback` or throws DegenerateFrameError.
BodyTransform build_body_transform(const Frame& frame, const JointRoleMap& roles,
                                   const std::optional<BodyTransform>& fallback = std::nullopt);

NormalizedSequence normalize_sequence(const SkeletonSequence& seq, const JointRoleMap& roles,
                                      NormalizationMode mode, std::size_t target_length);

std::vector<NormalizedSequence> normalize_all(const std::vector<SkeletonSequence>& samples,
                                              const JointRoleMap& roles, NormalizationMode mode,
                                              std::size_t target_length);

}  // namespace dtlstm
