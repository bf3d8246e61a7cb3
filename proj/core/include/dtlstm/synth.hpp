#pragma once

#include "dtlstm/region_streams.hpp"
#include "dtlstm/scores.hpp"
#include "dtlstm/skeleton_data.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dtlstm {

enum class EvidenceWindow { Early, Late, Full };

EvidenceWindow parse_evidence_window(const std::string& name);
std::string to_string(EvidenceWindow w);

/// Synthetic skeleton actions: each class moves one hand along one body axis
/// with a class-specific offset and frequency, inside the evidence window only.
/// Outside the window both hands follow a class-independent oscillation.
struct SynthSpec {
  int classes = 4;
  int per_class = 20;
  int subjects = 5;
  int joints = 10;
  int min_frames = 30;
  int max_frames = 40;
  EvidenceWindow evidence = EvidenceWindow::Full;
  double evidence_fraction = 0.2;
  double noise = 0.01;
  // Random camera yaw/pitch/translation per sample and body size per subject.
  bool view_jitter = true;
  std::uint64_t seed = 1;

  // Region descriptor streams.
  int regions = 5;
  int planted_region = 3;
  int descriptor_dim = 16;
  int descriptor_frames = 8;
  double region_signal = 1.0;
  double region_nuisance = 1.0;
  double region_frame_noise = 0.3;

  void check() const;
};

std::string synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const std::string& text);

/// Role map of the synthetic layout (hip center 0, left hip 1, right hip 2,
/// spine base 3, spine 4, head 5, left elbow/hand 6/7, right elbow/hand 8/9).
JointRoleMap synth_roles(int joints);

/// Frames in [begin, end) carry class evidence for a sequence of `length` frames.
std::pair<int, int> evidence_range(const SynthSpec& spec, int length);

/// Body-frame pose of a noise-free, unjittered sample of class `label` at frame t.
Frame synth_pose(const SynthSpec& spec, int label, double phase, double background_phase, int t, int length);

std::vector<SkeletonSequence> generate(const SynthSpec& spec);

/// Per-frame region descriptors for `samples`; only `spec.planted_region`
/// carries a class signal, the others are sample nuisance plus noise.
std::vector<RegionFrameDescriptor> generate_descriptors(const SynthSpec& spec,
                                                        const std::vector<SkeletonSequence>& samples,
                                                        int planted_region, std::uint64_t seed);

/// Two score streams over the same samples. Stream "a" is confidently right on
/// the first half and mildly wrong on the second; stream "b" the reverse.
struct ComplementaryScores {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<ClassScores> a;
  std::vector<ClassScores> b;
};
ComplementaryScores complementary_scores(int samples, int classes, std::uint64_t seed);

}  // namespace dtlstm
