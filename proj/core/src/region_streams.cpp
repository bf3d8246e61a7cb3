#include "dtlstm/region_streams.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/text_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

namespace dtlstm {

using Eigen::Index;
using Eigen::VectorXd;

std::size_t RegionStream::descriptor_count() const {
  std::size_t n = 0;
  for (const auto& [key, frames] : groups) n += frames.size();
  return n;
}

std::set<int> RegionStream::regions() const {
  std::set<int> out;
  for (const auto& [key, frames] : groups) out.insert(key.second);
  return out;
}

std::set<std::string> RegionStream::samples() const {
  std::set<std::string> out;
  for (const auto& [key, frames] : groups) out.insert(key.first);
  return out;
}

std::string format_descriptor(const RegionFrameDescriptor& d) {
  std::string s = d.sample + ' ' + std::to_string(d.region) + ' ' + std::to_string(d.frame) + ' ' +
                  std::to_string(d.values.size());
  for (Index k = 0; k < d.values.size(); ++k) s += ' ' + format_double(d.values(k));
  return s;
}

RegionStream parse_stream(std::istream& in, const std::string& name) {
  RegionStream stream;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_tokens(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (tok.size() < 5) throw FormatError(where + ": descriptor needs id, region, frame, dim and values");
    RegionFrameDescriptor d;
    d.sample = std::string(tok[0]);
    d.region = static_cast<int>(parse_integer(tok[1], where + " region"));
    d.frame = static_cast<int>(parse_integer(tok[2], where + " frame"));
    const long long dim = parse_integer(tok[3], where + " dimension");
    if (d.region < 1) throw FormatError(where + ": region indices start at 1");
    if (dim <= 0 || static_cast<std::size_t>(dim) != tok.size() - 4) {
      throw FormatError(where + ": declared dimension " + std::to_string(dim) + " but found " +
                        std::to_string(tok.size() - 4) + " values");
    }
    if (stream.dim == 0) {
      stream.dim = dim;
    } else if (dim != stream.dim) {
      throw FormatError(where + ": dimension " + std::to_string(dim) + " differs from stream dimension " +
                        std::to_string(stream.dim));
    }
    d.values.resize(dim);
    for (long long k = 0; k < dim; ++k) d.values(k) = parse_double(tok[4 + static_cast<std::size_t>(k)], where);
    auto& frames = stream.groups[{d.sample, d.region}];
    const auto pos = std::lower_bound(frames.begin(), frames.end(), d.frame,
                                      [](const RegionFrameDescriptor& a, int f) { return a.frame < f; });
    if (pos != frames.end() && pos->frame == d.frame) {
      throw FormatError(where + ": duplicate descriptor for sample '" + d.sample + "', region " +
                        std::to_string(d.region) + ", frame " + std::to_string(d.frame));
    }
    frames.insert(pos, std::move(d));
  }
  return stream;
}

RegionStream load_stream(const std::string& path) {
  std::ifstream in = open_input(path, "descriptor file");
  return parse_stream(in, path);
}

void save_stream(const std::string& path, const std::vector<RegionFrameDescriptor>& descriptors) {
  std::ofstream out = open_output(path, "descriptor file");
  for (const auto& d : descriptors) out << format_descriptor(d) << '\n';
}

VectorXd maxmin_pool(std::span<const VectorXd> frames) {
  if (frames.empty()) throw ArgumentError("max-min pooling over an empty frame list");
  const Index dim = frames.front().size();
  VectorXd hi = frames.front();
  VectorXd lo = frames.front();
  for (const VectorXd& f : frames.subspan(1)) {
    if (f.size() != dim) throw ShapeError("max-min pooling: frame dimensions differ");
    hi = hi.cwiseMax(f);
    lo = lo.cwiseMin(f);
  }
  VectorXd out(2 * dim);
  out << hi, lo;
  return out;
}

PooledRegions pool_stream(const RegionStream& stream, const std::map<std::string, int>& labels) {
  PooledRegions out;
  std::vector<VectorXd> values;
  for (const auto& [key, frames] : stream.groups) {
    const auto label = labels.find(key.first);
    if (label == labels.end()) continue;
    values.clear();
    for (const auto& d : frames) values.push_back(d.values);
    out[key.second].push_back({key.first, key.second, label->second, maxmin_pool(values)});
  }
  return out;
}

int pick_best_region(const std::map<int, double>& accuracies) {
  if (accuracies.empty()) throw ArgumentError("region selection over no regions");
  int best = accuracies.begin()->first;
  double best_acc = accuracies.begin()->second;
  for (const auto& [region, acc] : accuracies) {
    if (acc > best_acc) {
      best = region;
      best_acc = acc;
    }
  }
  return best;
}

RegionSelection select_best_region(const PooledRegions& pooled, const std::set<std::string>& train_ids,
                                   const CvConfig& cv, const std::optional<std::map<std::string, int>>& groups) {
  if (pooled.empty()) throw ArgumentError("region selection over no regions");
  std::optional<std::set<std::string>> coverage;
  RegionSelection sel;
  for (const auto& [region, items] : pooled) {
    std::vector<VectorXd> x;
    std::vector<int> y;
    std::vector<int> g;
    std::set<std::string> seen;
    for (const auto& p : items) {
      if (!train_ids.count(p.sample)) continue;
      seen.insert(p.sample);
      x.push_back(p.values);
      y.push_back(p.label);
      if (groups) {
        const auto it = groups->find(p.sample);
        if (it == groups->end()) throw ArgumentError("region selection: no group for sample '" + p.sample + "'");
        g.push_back(it->second);
      }
    }
    if (!coverage) {
      coverage = seen;
    } else if (*coverage != seen) {
      throw ArgumentError("region " + std::to_string(region) + " covers a different training sample set");
    }
    if (x.empty()) throw ArgumentError("region " + std::to_string(region) + " has no training samples");
    const std::optional<std::vector<int>> grouping = groups ? std::optional(g) : std::nullopt;
    sel.accuracies[region] = cross_validate(x, y, grouping, cv);
  }
  sel.region = pick_best_region(sel.accuracies);
  return sel;
}

std::vector<PooledVideoDescriptor> concatenate_regions(const PooledRegions& pooled) {
  std::map<std::string, PooledVideoDescriptor> joined;
  Index total_dim = 0;
  for (const auto& [region, items] : pooled) {
    if (!items.empty()) total_dim += items.front().values.size();
    for (const auto& p : items) {
      auto [it, fresh] = joined.try_emplace(p.sample, PooledVideoDescriptor{p.sample, 0, p.label, p.values});
      if (!fresh) {
        VectorXd cat(it->second.values.size() + p.values.size());
        cat << it->second.values, p.values;
        it->second.values = std::move(cat);
      }
    }
  }
  std::vector<PooledVideoDescriptor> out;
  for (auto& [id, d] : joined) {
    if (d.values.size() != total_dim) {
      throw ArgumentError("sample '" + id + "' is missing a region in the concatenation");
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace dtlstm
