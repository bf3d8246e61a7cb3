#pragma once

#include "dtlstm/linear_svm.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dtlstm {

/// Descriptor of one image region in one frame, produced by an external extractor.
/// Regions are 1-based.
struct RegionFrameDescriptor {
  std::string sample;
  int region = 0;
  int frame = 0;
  Eigen::VectorXd values;
};

/// All descriptors of one stream (e.g. RGB or flow), grouped by (sample, region)
/// and sorted by frame index.
struct RegionStream {
  Eigen::Index dim = 0;
  std::map<std::pair<std::string, int>, std::vector<RegionFrameDescriptor>> groups;

  std::size_t descriptor_count() const;
  std::set<int> regions() const;
  std::set<std::string> samples() const;
};

/// Descriptor file line: <sample-id> <region> <frame> <dim> <v_1> ... <v_dim>
std::string format_descriptor(const RegionFrameDescriptor& d);
RegionStream parse_stream(std::istream& in, const std::string& name);
RegionStream load_stream(const std::string& path);
void save_stream(const std::string& path, const std::vector<RegionFrameDescriptor>& descriptors);

struct PooledVideoDescriptor {
  std::string sample;
  int region = 0;
  int label = 0;
  Eigen::VectorXd values;  // elementwise max over frames, then elementwise min
};

/// Elementwise temporal max followed by elementwise min, dimension 2*D.
Eigen::VectorXd maxmin_pool(std::span<const Eigen::VectorXd> frames);

/// region -> pooled descriptors (sorted by sample id). Samples without a label are skipped.
using PooledRegions = std::map<int, std::vector<PooledVideoDescriptor>>;
PooledRegions pool_stream(const RegionStream& stream, const std::map<std::string, int>& labels);

struct RegionSelection {
  int region = 0;
  std::map<int, double> accuracies;
};

/// Highest accuracy wins; lowest region index on ties.
int pick_best_region(const std::map<int, double>& accuracies);

/// Cross-validates a linear SVM per region using only `train_ids`. Regions
/// must cover the same training samples. `groups` maps sample id to subject
/// for group-disjoint folds.
RegionSelection select_best_region(const PooledRegions& pooled, const std::set<std::string>& train_ids,
                                   const CvConfig& cv,
                                   const std::optional<std::map<std::string, int>>& groups = std::nullopt);

/// Per-sample concatenation of every region's pooled vector, regions ascending.
std::vector<PooledVideoDescriptor> concatenate_regions(const PooledRegions& pooled);

}  // namespace dtlstm
