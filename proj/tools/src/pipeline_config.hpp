#pragma once

#include "dtlstm/bench.hpp"
#include "dtlstm/fusion.hpp"
#include "dtlstm/latent_features.hpp"
#include "dtlstm/normalization.hpp"
#include "dtlstm/skeleton_data.hpp"
#include "dtlstm/synth.hpp"
#include "dtlstm/trainer.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dtlstm::cli {

// Joint roles: a preset name ("kinect20", "kinect25", "synth", "auto") or explicit indices.
struct RoleSpec {
  std::string preset = "auto";
  std::optional<JointRoleMap> explicit_map;

  JointRoleMap resolve(std::size_t joint_count) const;
};

struct SvmGrid {
  std::vector<double> c_grid;  // empty trains with c_reg directly
  double c_reg = 1.0;
  int epochs = 50;
  int folds = 5;
};

struct PipelineConfig {
  std::string skeletons;
  std::string descriptors;
  std::string output_dir;
  RoleSpec roles;
  NormalizationMode normalization = NormalizationMode::PerFrame;
  int target_length = 0;  // 0 pads to the longest input sequence
  std::set<int> test_subjects;
  TrainConfig train;
  FeatureLayout layout = FeatureLayout::FlattenTime;
  SvmGrid svm;
  FusionConfig fusion;
  SynthSpec synth;
  BenchConfig benchmark = default_bench_config();
  std::uint64_t seed = 1;
  int threads = 0;

  /// Overrides the seed everywhere it is consumed.
  void apply_seed(std::uint64_t s);
  void apply_threads(int n);
};

PipelineConfig pipeline_config_from_json(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);
std::string pipeline_config_to_json(const PipelineConfig& config);

}  // namespace dtlstm::cli
