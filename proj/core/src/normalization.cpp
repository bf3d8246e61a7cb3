#include "dtlstm/normalization.hpp"

#include "dtlstm/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>

namespace dtlstm {

NormalizationMode parse_normalization_mode(const std::string& name) {
  if (name == "per-frame") return NormalizationMode::PerFrame;
  if (name == "first-frame") return NormalizationMode::FirstFrame;
  throw ConfigError("unknown normalization mode '" + name + "' (expected per-frame or first-frame)");
}

std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::PerFrame ? "per-frame" : "first-frame";
}

std::size_t NormalizedSequence::real_length() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

BodyTransform build_body_transform(const Frame& frame, const JointRoleMap& roles,
                                   const std::optional<BodyTransform>& fallback) {
  if (frame.size() != roles.joint_count) {
    throw DimensionError("frame has " + std::to_string(frame.size()) + " joints, role map expects " +
                         std::to_string(roles.joint_count));
  }
  const Eigen::Vector3d hips = frame[roles.hip_left] - frame[roles.hip_right];
  const Eigen::Vector3d spine = frame[roles.spine] - frame[roles.spine_base];
  const double hip_norm = hips.norm();
  const double spine_norm = spine.norm();

  auto degenerate = [&](const char* why) -> BodyTransform {
    if (fallback) return *fallback;
    throw DegenerateFrameError(std::string("degenerate body frame: ") + why);
  };
  if (hip_norm < kDegenerateEpsilon) return degenerate("hip vector too short");
  if (spine_norm < kDegenerateEpsilon) return degenerate("spine vector too short");

  const Eigen::Vector3d x = hips / hip_norm;
  if (x.cross(spine / spine_norm).norm() < kDegenerateEpsilon) {
    return degenerate("hip and spine vectors are parallel");
  }
  const Eigen::Vector3d y = (spine - spine.dot(x) * x).normalized();

  BodyTransform tf;
  tf.origin = frame[roles.hip_center];
  tf.rotation.col(0) = x;
  tf.rotation.col(1) = y;
  tf.rotation.col(2) = x.cross(y);
  tf.scale = spine_norm;
  return tf;
}

NormalizedSequence normalize_sequence(const SkeletonSequence& seq, const JointRoleMap& roles,
                                      NormalizationMode mode, std::size_t target_length) {
  validate_roles(seq, roles);
  if (seq.frames.empty()) throw ArgumentError("sequence '" + seq.id + "' has no frames");

  const std::size_t joints = roles.joint_count;
  std::vector<Eigen::VectorXd> flat;
  flat.reserve(seq.frames.size());

  std::optional<BodyTransform> current;
  if (mode == NormalizationMode::FirstFrame) {
    current = build_body_transform(seq.frames.front(), roles);
  } else {
    // A glitched first frame still keeps the translation to the hip center.
    BodyTransform first;
    first.origin = seq.frames.front()[roles.hip_center];
    current = build_body_transform(seq.frames.front(), roles, first);
  }

  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const Frame& frame = seq.frames[t];
    if (frame.size() != joints) {
      throw DimensionError("sequence '" + seq.id + "' frame " + std::to_string(t) + " has " +
                           std::to_string(frame.size()) + " joints");
    }
    if (mode == NormalizationMode::PerFrame && t > 0) {
      current = build_body_transform(frame, roles, current);
    }
    Eigen::VectorXd v(3 * static_cast<Eigen::Index>(joints));
    for (std::size_t j = 0; j < joints; ++j) {
      v.segment<3>(3 * static_cast<Eigen::Index>(j)) = current->apply(frame[j]);
    }
    flat.push_back(std::move(v));
  }

  PaddedFrames padded = pad_or_truncate(std::move(flat), target_length);
  NormalizedSequence out;
  out.id = seq.id;
  out.subject = seq.subject;
  out.label = seq.label;
  out.vectors.resize(3 * static_cast<Eigen::Index>(joints), static_cast<Eigen::Index>(target_length));
  for (std::size_t t = 0; t < target_length; ++t) {
    out.vectors.col(static_cast<Eigen::Index>(t)) = padded.vectors[t];
  }
  out.mask = std::move(padded.mask);
  return out;
}

std::vector<NormalizedSequence> normalize_all(const std::vector<SkeletonSequence>& samples,
                                              const JointRoleMap& roles, NormalizationMode mode,
                                              std::size_t target_length) {
  std::vector<NormalizedSequence> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(normalize_sequence(s, roles, mode, target_length));
  return out;
}

}  // namespace dtlstm
