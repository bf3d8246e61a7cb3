#include "dtlstm/skeleton_data.hpp"

#include "dtlstm/error.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <utility>

namespace dtlstm {

using nlohmann::json;

JointRoleMap JointRoleMap::kinect20() {
  // HipCenter=0, Spine=1, ShoulderCenter=2, HipLeft=12, HipRight=16.
  return JointRoleMap{0, 12, 16, 1, 2, 20};
}

JointRoleMap JointRoleMap::kinect25() {
  // SpineBase=0, SpineMid=1, SpineShoulder=20, HipLeft=12, HipRight=16.
  return JointRoleMap{0, 12, 16, 1, 20, 25};
}

void JointRoleMap::check() const {
  if (joint_count == 0) throw ConfigError("joint role map: joint_count must be positive");
  const std::array<std::pair<const char*, std::size_t>, 5> roles{{{"hip_center", hip_center},
                                                                   {"hip_left", hip_left},
                                                                   {"hip_right", hip_right},
                                                                   {"spine_base", spine_base},
                                                                   {"spine", spine}}};
  for (std::size_t a = 0; a < roles.size(); ++a) {
    if (roles[a].second >= joint_count) {
      throw ConfigError("joint role " + std::string(roles[a].first) + "=" +
                        std::to_string(roles[a].second) + " out of range for " +
                        std::to_string(joint_count) + " joints");
    }
    for (std::size_t b = a + 1; b < roles.size(); ++b) {
      if (roles[a].second == roles[b].second) {
        throw ConfigError("joint roles " + std::string(roles[a].first) + " and " +
                          roles[b].first + " share index " + std::to_string(roles[a].second));
      }
    }
  }
}

namespace {

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + field + "'");
  return *it;
}

double to_coordinate(const json& v, std::size_t t, std::size_t j) {
  if (!v.is_number()) {
    throw ParseError("field 'frames': non-numeric coordinate at frame " + std::to_string(t) +
                     ", joint " + std::to_string(j));
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ParseError("field 'frames': non-finite coordinate at frame " + std::to_string(t) +
                     ", joint " + std::to_string(j));
  }
  return x;
}

}  // namespace

SkeletonSequence parse_sequence(std::string_view line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& e) {
    // Covers syntax errors and number overflow such as 1e999.
    throw ParseError(std::string("malformed skeleton record: ") + e.what());
  }
  if (!rec.is_object()) throw ParseError("skeleton record must be an object");

  SkeletonSequence seq;
  const json& id = require(rec, "id");
  if (!id.is_string()) throw ParseError("field 'id' must be a string");
  seq.id = id.get<std::string>();

  const json& subject = require(rec, "subject");
  if (!subject.is_number_integer()) throw ParseError("field 'subject' must be an integer");
  seq.subject = subject.get<int>();

  const json& label = require(rec, "label");
  if (!label.is_number_integer() || label.get<long long>() < 0) {
    throw ParseError("field 'label' must be a non-negative integer");
  }
  seq.label = label.get<int>();

  const json& frames = require(rec, "frames");
  if (!frames.is_array() || frames.empty()) {
    throw ParseError("field 'frames' must be a non-empty array");
  }
  std::size_t joints = 0;
  seq.frames.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& f = frames[t];
    if (!f.is_array()) throw ParseError("field 'frames': frame " + std::to_string(t) + " is not an array");
    if (t == 0) {
      joints = f.size();
      if (joints == 0) throw DimensionError("frame 0 has no joints");
    } else if (f.size() != joints) {
      throw DimensionError("frame " + std::to_string(t) + " has " + std::to_string(f.size()) +
                           " joints, expected " + std::to_string(joints));
    }
    Frame frame(joints);
    for (std::size_t j = 0; j < joints; ++j) {
      const json& p = f[j];
      if (!p.is_array() || p.size() != 3) {
        throw ParseError("field 'frames': frame " + std::to_string(t) + ", joint " + std::to_string(j) +
                         " is not a 3-vector");
      }
      frame[j] = Joint(to_coordinate(p[0], t, j), to_coordinate(p[1], t, j), to_coordinate(p[2], t, j));
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

std::string serialize_sequence(const SkeletonSequence& seq) {
  json frames = json::array();
  for (const Frame& f : seq.frames) {
    json jf = json::array();
    for (const Joint& p : f) jf.push_back({p.x(), p.y(), p.z()});
    frames.push_back(std::move(jf));
  }
  // Key order is fixed so files are byte-stable.
  json rec = json::object();
  rec["id"] = seq.id;
  rec["subject"] = seq.subject;
  rec["label"] = seq.label;
  rec["frames"] = std::move(frames);
  return rec.dump();
}

std::vector<SkeletonSequence> load_skeleton_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputNotFound("cannot open skeleton file: " + path);
  std::vector<SkeletonSequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_sequence(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DimensionError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_skeleton_file(const std::string& path, const std::vector<SkeletonSequence>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputNotFound("cannot write skeleton file: " + path);
  for (const auto& s : samples) out << serialize_sequence(s) << '\n';
}

void validate_roles(const SkeletonSequence& seq, const JointRoleMap& roles) {
  roles.check();
  if (roles.joint_count != seq.joint_count()) {
    throw ConfigError("joint role map expects " + std::to_string(roles.joint_count) +
                      " joints but sequence '" + seq.id + "' has " +
                      std::to_string(seq.joint_count()));
  }
}

PaddedFrames pad_or_truncate(std::vector<Eigen::VectorXd> frames, std::size_t target_length) {
  if (target_length == 0) throw ArgumentError("pad_or_truncate: target length must be positive");
  if (frames.empty()) throw ArgumentError("pad_or_truncate: input has no frames");
  const Eigen::Index dim = frames.front().size();
  const std::size_t real = std::min(frames.size(), target_length);
  frames.resize(real);
  PaddedFrames out;
  out.mask.assign(target_length, false);
  std::fill_n(out.mask.begin(), real, true);
  out.vectors = std::move(frames);
  out.vectors.resize(target_length, Eigen::VectorXd::Zero(dim));
  return out;
}

DatasetSplit cross_subject_split(const std::vector<SkeletonSequence>& samples,
                                 const std::set<int>& test_subjects) {
  if (test_subjects.empty()) throw SplitError("cross-subject split: no test subjects given");
  DatasetSplit split;
  for (const auto& s : samples) {
    (test_subjects.count(s.subject) ? split.test : split.train).push_back(s.id);
  }
  if (split.train.empty()) throw SplitError("cross-subject split: training side is empty");
  if (split.test.empty()) throw SplitError("cross-subject split: test side is empty");
  return split;
}

}  // namespace dtlstm
