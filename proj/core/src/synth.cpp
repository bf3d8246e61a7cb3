#include "dtlstm/synth.hpp"

#include "dtlstm/error.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace dtlstm {

using Eigen::Vector3d;

EvidenceWindow parse_evidence_window(const std::string& name) {
  if (name == "early") return EvidenceWindow::Early;
  if (name == "late") return EvidenceWindow::Late;
  if (name == "full") return EvidenceWindow::Full;
  throw ConfigError("unknown evidence window '" + name + "' (expected early, late or full)");
}

std::string to_string(EvidenceWindow w) {
  switch (w) {
    case EvidenceWindow::Early: return "early";
    case EvidenceWindow::Late: return "late";
    case EvidenceWindow::Full: return "full";
  }
  return "?";
}

void SynthSpec::check() const {
  if (classes < 2) throw ConfigError("synth: at least 2 classes");
  if (per_class < 1) throw ConfigError("synth: per_class must be positive");
  if (subjects < 1) throw ConfigError("synth: subjects must be positive");
  if (joints < 10) throw ConfigError("synth: the synthetic layout needs at least 10 joints");
  if (min_frames < 2 || max_frames < min_frames) throw ConfigError("synth: frame range must satisfy 2 <= min <= max");
  if (!(evidence_fraction > 0.0 && evidence_fraction <= 1.0)) {
    throw ConfigError("synth: evidence fraction must lie in (0, 1]");
  }
  if (!(noise >= 0.0)) throw ConfigError("synth: noise must be non-negative");
  if (regions < 1 || planted_region < 1 || planted_region > regions) {
    throw ConfigError("synth: planted region must lie in [1, regions]");
  }
  if (descriptor_dim < 1 || descriptor_frames < 1) throw ConfigError("synth: descriptor sizes must be positive");
  if (!(region_signal >= 0.0 && region_nuisance >= 0.0 && region_frame_noise >= 0.0)) {
    throw ConfigError("synth: region noise levels must be non-negative");
  }
}

std::string synth_spec_to_json(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["classes"] = s.classes;
  j["per_class"] = s.per_class;
  j["subjects"] = s.subjects;
  j["joints"] = s.joints;
  j["min_frames"] = s.min_frames;
  j["max_frames"] = s.max_frames;
  j["evidence"] = to_string(s.evidence);
  j["evidence_fraction"] = s.evidence_fraction;
  j["noise"] = s.noise;
  j["view_jitter"] = s.view_jitter;
  j["seed"] = s.seed;
  j["regions"] = s.regions;
  j["planted_region"] = s.planted_region;
  j["descriptor_dim"] = s.descriptor_dim;
  j["descriptor_frames"] = s.descriptor_frames;
  j["region_signal"] = s.region_signal;
  j["region_nuisance"] = s.region_nuisance;
  j["region_frame_noise"] = s.region_frame_noise;
  return j.dump();
}

SynthSpec synth_spec_from_json(const std::string& text) {
  SynthSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("synth spec must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "classes") s.classes = v.get<int>();
      else if (k == "per_class") s.per_class = v.get<int>();
      else if (k == "subjects") s.subjects = v.get<int>();
      else if (k == "joints") s.joints = v.get<int>();
      else if (k == "min_frames") s.min_frames = v.get<int>();
      else if (k == "max_frames") s.max_frames = v.get<int>();
      else if (k == "evidence") s.evidence = parse_evidence_window(v.get<std::string>());
      else if (k == "evidence_fraction") s.evidence_fraction = v.get<double>();
      else if (k == "noise") s.noise = v.get<double>();
      else if (k == "view_jitter") s.view_jitter = v.get<bool>();
      else if (k == "seed") s.seed = v.get<std::uint64_t>();
      else if (k == "regions") s.regions = v.get<int>();
      else if (k == "planted_region") s.planted_region = v.get<int>();
      else if (k == "descriptor_dim") s.descriptor_dim = v.get<int>();
      else if (k == "descriptor_frames") s.descriptor_frames = v.get<int>();
      else if (k == "region_signal") s.region_signal = v.get<double>();
      else if (k == "region_nuisance") s.region_nuisance = v.get<double>();
      else if (k == "region_frame_noise") s.region_frame_noise = v.get<double>();
      else throw ConfigError("synth spec: unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  s.check();
  return s;
}

JointRoleMap synth_roles(int joints) {
  return JointRoleMap{0, 1, 2, 3, 4, static_cast<std::size_t>(joints)};
}

std::pair<int, int> evidence_range(const SynthSpec& spec, int length) {
  const int window = std::max(1, static_cast<int>(std::ceil(spec.evidence_fraction * length - 1e-9)));
  switch (spec.evidence) {
    case EvidenceWindow::Early: return {0, window};
    case EvidenceWindow::Late: return {length - window, length};
    case EvidenceWindow::Full: return {0, length};
  }
  return {0, length};
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAmplitude = 0.12;
constexpr double kOffset = 0.15;

Frame base_pose(int joints) {
  Frame f(static_cast<std::size_t>(joints));
  f[0] = {0.0, 0.0, 0.0};      // hip center
  f[1] = {0.15, 0.0, 0.0};     // left hip
  f[2] = {-0.15, 0.0, 0.0};    // right hip
  f[3] = {0.0, 0.05, 0.0};     // spine base
  f[4] = {0.0, 0.35, 0.0};     // spine
  f[5] = {0.0, 0.75, 0.0};     // head
  f[6] = {0.2, 0.45, 0.0};     // left elbow
  f[7] = {0.25, 0.2, 0.05};    // left hand
  f[8] = {-0.2, 0.45, 0.0};    // right elbow
  f[9] = {-0.25, 0.2, 0.05};   // right hand
  for (int j = 10; j < joints; ++j) {
    const double side = (j % 2 == 0) ? 0.12 : -0.12;
    f[static_cast<std::size_t>(j)] = {side, -0.2 - 0.1 * ((j - 10) / 2), 0.02};
  }
  return f;
}

}  // namespace

Frame synth_pose(const SynthSpec& spec, int label, double phase, double background_phase, int t, int length) {
  Frame f = base_pose(spec.joints);
  const auto [begin, end] = evidence_range(spec, length);
  const double tau = static_cast<double>(t) / static_cast<double>(length);
  if (t >= begin && t < end) {
    const std::size_t hand = (label % 2 == 0) ? 7 : 9;
    Vector3d axis = Vector3d::Zero();
    axis((label / 2) % 3) = 1.0;
    const double frequency = 1.0 + 0.5 * static_cast<double>(label);
    const double sign = ((label / 6) % 2 == 0) ? 1.0 : -1.0;
    f[hand] += axis * (sign * kOffset + kAmplitude * std::sin(kTwoPi * frequency * tau + phase));
  } else {
    const double s = kAmplitude * std::sin(kTwoPi * 1.5 * tau + background_phase);
    f[7] += Vector3d(0.0, s, 0.0);
    f[9] += Vector3d(0.0, s, 0.0);
  }
  return f;
}

std::vector<SkeletonSequence> generate(const SynthSpec& spec) {
  spec.check();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> body_scale(static_cast<std::size_t>(spec.subjects), 1.0);
  if (spec.view_jitter) {
    for (double& s : body_scale) s = 0.85 + 0.3 * unit(rng);
  }

  std::vector<SkeletonSequence> out;
  int index = 0;
  for (int k = 0; k < spec.per_class; ++k) {
    for (int c = 0; c < spec.classes; ++c) {
      SkeletonSequence seq;
      char id[32];
      std::snprintf(id, sizeof(id), "seq%05d", index++);
      seq.id = id;
      seq.label = c;
      seq.subject = (k % spec.subjects) + 1;
      const int length = spec.min_frames + static_cast<int>(unit(rng) * (spec.max_frames - spec.min_frames + 1));
      const int frames = std::min(length, spec.max_frames);
      const double phase = kTwoPi * unit(rng);
      const double background = kTwoPi * unit(rng);

      Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
      Vector3d translation = Vector3d::Zero();
      double scale = 1.0;
      if (spec.view_jitter) {
        const double yaw = (unit(rng) - 0.5) * 2.0 * std::numbers::pi / 3.0;
        const double pitch = (unit(rng) - 0.5) * 0.4;
        rotation = (Eigen::AngleAxisd(yaw, Vector3d::UnitY()) * Eigen::AngleAxisd(pitch, Vector3d::UnitX()))
                       .toRotationMatrix();
        translation = Vector3d(2.0 * unit(rng) - 1.0, unit(rng) - 0.5, 2.0 + 2.0 * unit(rng));
        scale = body_scale[static_cast<std::size_t>(seq.subject - 1)];
      }

      seq.frames.reserve(static_cast<std::size_t>(frames));
      for (int t = 0; t < frames; ++t) {
        Frame f = synth_pose(spec, c, phase, background, t, frames);
        for (Vector3d& p : f) {
          if (spec.noise > 0.0) p += spec.noise * Vector3d(gauss(rng), gauss(rng), gauss(rng));
          p = rotation * (scale * p) + translation;
        }
        seq.frames.push_back(std::move(f));
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

std::vector<RegionFrameDescriptor> generate_descriptors(const SynthSpec& spec,
                                                        const std::vector<SkeletonSequence>& samples,
                                                        int planted_region, std::uint64_t seed) {
  spec.check();
  if (planted_region < 1 || planted_region > spec.regions) {
    throw ConfigError("synth: planted region out of range");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index dim = spec.descriptor_dim;

  std::vector<Eigen::VectorXd> class_means(static_cast<std::size_t>(spec.classes));
  for (auto& m : class_means) {
    m.resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) m(k) = gauss(rng);
    m *= spec.region_signal;
  }

  std::vector<RegionFrameDescriptor> out;
  for (const auto& s : samples) {
    for (int r = 1; r <= spec.regions; ++r) {
      Eigen::VectorXd nuisance(dim);
      for (Eigen::Index k = 0; k < dim; ++k) nuisance(k) = spec.region_nuisance * gauss(rng);
      if (r == planted_region) {
        const int label = s.label % spec.classes;
        nuisance += class_means[static_cast<std::size_t>(label)];
      }
      for (int t = 0; t < spec.descriptor_frames; ++t) {
        RegionFrameDescriptor d{s.id, r, t, Eigen::VectorXd(dim)};
        for (Eigen::Index k = 0; k < dim; ++k) d.values(k) = nuisance(k) + spec.region_frame_noise * gauss(rng);
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

ComplementaryScores complementary_scores(int samples, int classes, std::uint64_t seed) {
  if (samples < 2 || classes < 2) throw ArgumentError("complementary scores need >= 2 samples and classes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  ComplementaryScores out;
  for (int i = 0; i < samples; ++i) {
    const int label = i % classes;
    const int wrong = (label + 1) % classes;
    char id[32];
    std::snprintf(id, sizeof(id), "cmp%05d", i);
    out.ids.emplace_back(id);
    out.labels.push_back(label);
    Eigen::VectorXd confident(classes), mild(classes);
    for (int c = 0; c < classes; ++c) {
      confident(c) = jitter(rng);
      mild(c) = jitter(rng);
    }
    confident(label) += 2.0;
    mild(wrong) += 0.5;
    mild(label) += 0.3;
    const bool first_half = i < samples / 2;
    out.a.push_back({"a", first_half ? confident : mild});
    out.b.push_back({"b", first_half ? mild : confident});
  }
  return out;
}

}  // namespace dtlstm
