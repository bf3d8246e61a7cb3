#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dtlstm {

using Joint = Eigen::Vector3d;
using Frame = std::vector<Joint>;

/// Indices of the joints that define the body frame used by view
/// normalization. All five roles must be distinct and below `joint_count`.
struct JointRoleMap {
  std::size_t hip_center = 0;
  std::size_t hip_left = 0;
  std::size_t hip_right = 0;
  std::size_t spine_base = 0;
  std::size_t spine = 0;
  std::size_t joint_count = 0;

  /// Kinect v1 style 20-joint layout (HipCenter, Spine, ShoulderCenter, ...).
  static JointRoleMap kinect20();
  /// Kinect v2 / NTU style 25-joint layout (SpineBase, SpineMid, ...).
  static JointRoleMap kinect25();

  /// Throws ConfigError if the map itself is inconsistent.
  void check() const;
};

struct SkeletonSequence {
  std::string id;
  int subject = 0;
  int label = 0;
  std::vector<Frame> frames;

  std::size_t length() const { return frames.size(); }
  std::size_t joint_count() const { return frames.empty() ? 0 : frames.front().size(); }
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Parses one line of the skeleton file:
///   {"id": "...", "subject": 3, "label": 1, "frames": [[[x,y,z], ...], ...]}
/// Throws ParseError for schema violations and DimensionError for ragged frames.
SkeletonSequence parse_sequence(std::string_view line);

/// Inverse of parse_sequence. Numbers are written in shortest round-trip form.
std::string serialize_sequence(const SkeletonSequence& seq);

/// Reads a whole skeleton file. Throws InputNotFound if the path cannot be opened.
std::vector<SkeletonSequence> load_skeleton_file(const std::string& path);
void save_skeleton_file(const std::string& path, const std::vector<SkeletonSequence>& samples);

/// Checks that `roles` is usable on `seq`; throws ConfigError otherwise.
void validate_roles(const SkeletonSequence& seq, const JointRoleMap& roles);

struct PaddedFrames {
  std::vector<Eigen::VectorXd> vectors;
  std::vector<bool> mask;
};

/// Zero-pads to `target_length` frames or keeps the first `target_length`.
/// `mask` is true exactly at the real frames.
PaddedFrames pad_or_truncate(std::vector<Eigen::VectorXd> frames, std::size_t target_length);

/// Samples whose subject is in `test_subjects` go to test, the rest to train.
/// Throws SplitError if either side ends up empty.
DatasetSplit cross_subject_split(const std::vector<SkeletonSequence>& samples,
                                 const std::set<int>& test_subjects);

}  // namespace dtlstm
