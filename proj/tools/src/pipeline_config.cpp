#include "pipeline_config.hpp"

#include "dtlstm/error.hpp"
#include "dtlstm/text_io.hpp"

#include <nlohmann/json.hpp>

#include <iterator>
#include <sstream>

namespace dtlstm::cli {

using nlohmann::json;
using nlohmann::ordered_json;

JointRoleMap RoleSpec::resolve(std::size_t joint_count) const {
  if (explicit_map) return *explicit_map;
  std::string p = preset;
  if (p == "auto") {
    if (joint_count == 20) p = "kinect20";
    else if (joint_count == 25) p = "kinect25";
    else p = "synth";
  }
  if (p == "kinect20") return JointRoleMap::kinect20();
  if (p == "kinect25") return JointRoleMap::kinect25();
  if (p == "synth") return synth_roles(static_cast<int>(joint_count));
  throw ConfigError("unknown role preset '" + preset + "'");
}

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  synth.seed = s;
  benchmark.seeds = {s};
}

void PipelineConfig::apply_threads(int n) {
  if (n < 0) throw ConfigError("threads must be >= 0");
  threads = n;
  train.threads = n;
  benchmark.lstm.threads = n;
}

namespace {

template <class F>
void for_each_key(const json& j, const std::string& where, F&& f) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!f(it.key(), it.value())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

RoleSpec roles_from(const json& j) {
  RoleSpec r;
  if (j.is_string()) {
    r.preset = j.get<std::string>();
    return r;
  }
  JointRoleMap m;
  for_each_key(j, "roles", [&](const std::string& k, const json& v) {
    auto n = v.get<std::size_t>();
    if (k == "hip_center") m.hip_center = n;
    else if (k == "hip_left") m.hip_left = n;
    else if (k == "hip_right") m.hip_right = n;
    else if (k == "spine_base") m.spine_base = n;
    else if (k == "spine") m.spine = n;
    else if (k == "joint_count") m.joint_count = n;
    else return false;
    return true;
  });
  m.check();
  r.explicit_map = m;
  return r;
}

SvmGrid svm_from(const json& j) {
  SvmGrid s;
  for_each_key(j, "svm", [&](const std::string& k, const json& v) {
    if (k == "c_grid") s.c_grid = v.get<std::vector<double>>();
    else if (k == "c_reg") s.c_reg = v.get<double>();
    else if (k == "epochs") s.epochs = v.get<int>();
    else if (k == "folds") s.folds = v.get<int>();
    else return false;
    return true;
  });
  if (s.c_reg <= 0.0 || s.epochs < 1 || s.folds < 2) throw ConfigError("svm: need c_reg > 0, epochs >= 1, folds >= 2");
  for (double c : s.c_grid) {
    if (c <= 0.0) throw ConfigError("svm: c_grid values must be positive");
  }
  return s;
}

FusionConfig fusion_from(const json& j) {
  FusionConfig f;
  for_each_key(j, "fusion", [&](const std::string& k, const json& v) {
    if (k == "weights") {
      f.weights = v.get<std::map<std::string, double>>();
    } else if (k == "normalization") {
      for (const auto& [name, mode] : v.get<std::map<std::string, std::string>>()) {
        f.normalization[name] = parse_score_normalization(mode);
      }
    } else if (k == "default_weight") {
      f.default_weight = v.get<double>();
    } else if (k == "default_normalization") {
      f.default_normalization = parse_score_normalization(v.get<std::string>());
    } else {
      return false;
    }
    return true;
  });
  f.check();
  return f;
}

void benchmark_from(const json& j, BenchConfig& b) {
  for_each_key(j, "benchmark", [&](const std::string& k, const json& v) {
    if (k == "datasets") {
      b.datasets.clear();
      for (const auto& d : v) {
        BenchDataset ds;
        ds.name = d.at("name").get<std::string>();
        if (d.contains("synth")) ds.spec = synth_spec_from_json(d.at("synth").dump());
        for (auto it = d.begin(); it != d.end(); ++it) {
          if (it.key() != "name" && it.key() != "synth") {
            throw ConfigError("unknown key '" + it.key() + "' in benchmark dataset");
          }
        }
        b.datasets.push_back(std::move(ds));
      }
    } else if (k == "seeds") {
      b.seeds = v.get<std::vector<std::uint64_t>>();
    } else if (k == "methods") {
      b.methods.clear();
      for (const auto& m : v) b.methods.push_back(parse_bench_method(m.get<std::string>()));
    } else if (k == "test_subjects") {
      b.test_subjects = v.get<std::set<int>>();
    } else if (k == "target_length") {
      b.target_length = v.get<int>();
    } else if (k == "normalization") {
      b.normalization = parse_normalization_mode(v.get<std::string>());
    } else if (k == "lstm") {
      b.lstm = train_config_from_json(v.dump());
    } else if (k == "layout") {
      b.layout = parse_feature_layout(v.get<std::string>());
    } else if (k == "svm") {
      const SvmGrid s = svm_from(v);
      b.svm.c_reg = s.c_reg;
      b.svm.epochs = s.epochs;
      b.cv.epochs = s.epochs;
      b.cv.folds = s.folds;
      b.c_grid = s.c_grid;
    } else if (k == "fusion") {
      b.fusion = fusion_from(v);
    } else {
      return false;
    }
    return true;
  });
}

}  // namespace

PipelineConfig pipeline_config_from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    for_each_key(j, "pipeline config", [&](const std::string& k, const json& v) {
      if (k == "paths") {
        for_each_key(v, "paths", [&](const std::string& pk, const json& pv) {
          if (pk == "skeletons") c.skeletons = pv.get<std::string>();
          else if (pk == "descriptors") c.descriptors = pv.get<std::string>();
          else if (pk == "output_dir") c.output_dir = pv.get<std::string>();
          else return false;
          return true;
        });
      } else if (k == "roles") {
        c.roles = roles_from(v);
      } else if (k == "normalization") {
        c.normalization = parse_normalization_mode(v.get<std::string>());
      } else if (k == "target_length") {
        c.target_length = v.get<int>();
        if (c.target_length < 0) throw ConfigError("target_length must be >= 0");
      } else if (k == "test_subjects") {
        c.test_subjects = v.get<std::set<int>>();
      } else if (k == "train") {
        c.train = train_config_from_json(v.dump());
      } else if (k == "layout") {
        c.layout = parse_feature_layout(v.get<std::string>());
      } else if (k == "svm") {
        c.svm = svm_from(v);
      } else if (k == "fusion") {
        c.fusion = fusion_from(v);
      } else if (k == "synth") {
        c.synth = synth_spec_from_json(v.dump());
      } else if (k == "benchmark") {
        benchmark_from(v, c.benchmark);
      } else if (k == "seed") {
        // applied after every section so it wins over nested seeds
      } else if (k == "threads") {
        c.apply_threads(v.get<int>());
      } else {
        return false;
      }
      return true;
    });
    if (j.contains("seed")) c.apply_seed(j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  c.train.check();
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  auto in = open_input(path, "config");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return pipeline_config_from_json(text);
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  ordered_json paths = ordered_json::object();
  if (!c.skeletons.empty()) paths["skeletons"] = c.skeletons;
  if (!c.descriptors.empty()) paths["descriptors"] = c.descriptors;
  if (!c.output_dir.empty()) paths["output_dir"] = c.output_dir;
  j["paths"] = paths;
  if (c.roles.explicit_map) {
    const auto& m = *c.roles.explicit_map;
    j["roles"] = {{"hip_center", m.hip_center}, {"hip_left", m.hip_left},   {"hip_right", m.hip_right},
                  {"spine_base", m.spine_base}, {"spine", m.spine},         {"joint_count", m.joint_count}};
  } else {
    j["roles"] = c.roles.preset;
  }
  j["normalization"] = to_string(c.normalization);
  j["target_length"] = c.target_length;
  j["test_subjects"] = c.test_subjects;
  j["train"] = ordered_json::parse(train_config_to_json(c.train));
  j["layout"] = to_string(c.layout);
  j["svm"] = {{"c_grid", c.svm.c_grid}, {"c_reg", c.svm.c_reg}, {"epochs", c.svm.epochs}, {"folds", c.svm.folds}};
  j["synth"] = ordered_json::parse(synth_spec_to_json(c.synth));
  return j.dump(2) + "\n";
}

}  // namespace dtlstm::cli
