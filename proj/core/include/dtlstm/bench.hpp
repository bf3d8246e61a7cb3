#pragma once

#include "dtlstm/fusion.hpp"
#include "dtlstm/latent_features.hpp"
#include "dtlstm/linear_svm.hpp"
#include "dtlstm/normalization.hpp"
#include "dtlstm/region_streams.hpp"
#include "dtlstm/synth.hpp"
#include "dtlstm/trainer.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace dtlstm {

enum class BenchMethod {
  TraditionalLstm,      // many-to-one loss, softmax at the last real step
  TraditionalLstmSvm,   // many-to-one loss, latent features into the linear SVM
  DeepTemporalSoftmax,  // many-to-many loss, softmax averaged over time
  DeepTemporalLstm,     // many-to-many loss, latent features into the linear SVM
  AllRegions,           // SVM on the concatenation of every pooled region
  SelectedRegion,       // SVM on the region picked by cross-validation
  Fusion,               // late fusion of DeepTemporalLstm and SelectedRegion scores
};

std::string method_tag(BenchMethod m);
std::string method_label(BenchMethod m);
BenchMethod parse_bench_method(const std::string& tag);
std::vector<BenchMethod> all_bench_methods();

struct BenchDataset {
  std::string name;
  SynthSpec spec;
};

struct BenchConfig {
  std::vector<BenchDataset> datasets;
  std::vector<std::uint64_t> seeds{1};
  std::vector<BenchMethod> methods = all_bench_methods();
  std::set<int> test_subjects{4, 5};
  int target_length = 0;  // 0 uses each dataset's max_frames
  NormalizationMode normalization = NormalizationMode::PerFrame;
  TrainConfig lstm;  // loss mode is set per method
  FeatureLayout layout = FeatureLayout::FlattenTime;
  SvmTrainConfig svm;
  std::vector<double> c_grid;  // non-empty: pick C by subject-wise CV on the training split
  CvConfig cv;
  FusionConfig fusion;
  std::string out_dir;  // empty keeps every artifact in memory
};

/// Defaults sized for a desk run: an easy full-evidence dataset and an
/// early-evidence dataset with 100-frame sequences.
BenchConfig default_bench_config();

struct BenchmarkCell {
  std::string dataset;
  BenchMethod method = BenchMethod::TraditionalLstm;
  std::uint64_t seed = 0;
  std::size_t correct = 0;
  std::size_t total = 0;
  int selected_region = 0;  // 0 when the method does not select a region
  double seconds = 0.0;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct BenchmarkReport {
  std::vector<std::string> datasets;
  std::vector<BenchMethod> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<BenchmarkCell> cells;

  double mean_accuracy(const std::string& dataset, BenchMethod method) const;
  /// Methods as rows, datasets as columns, mean accuracy in percent.
  std::string table() const;
  /// One JSON object per cell, then one summary object per (dataset, method).
  std::string jsonl() const;
  /// Wall-clock seconds per cell; kept apart so the report itself is reproducible.
  std::string timings() const;
};

/// Runs every (dataset, seed) pair: generate, cross-subject split, train,
/// evaluate each requested method on the held-out subjects. With `out_dir`
/// set, writes checkpoints/ and predictions/ below it.
BenchmarkReport run_benchmark(const BenchConfig& config);

/// Writes report.txt, report.jsonl and timings.jsonl into `out_dir`.
void write_report(const BenchmarkReport& report, const std::string& out_dir);

struct RegionAblation {
  RegionSelection selection;
  std::vector<ScoreRecord> selected_scores;  // test samples
  std::vector<ScoreRecord> all_region_scores;
  double selected_accuracy = 0.0;
  double all_regions_accuracy = 0.0;
};

/// Region-stream pipeline on one split: pool, select on the training subjects,
/// then score the test subjects with the selected region and with all regions
/// concatenated.
RegionAblation region_ablation(const PooledRegions& pooled, const DatasetSplit& split,
                               const std::map<std::string, int>& subjects, const SvmTrainConfig& svm,
                               const CvConfig& cv);

}  // namespace dtlstm
