#include "cli.hpp"

#include "pipeline_config.hpp"

#include "dtlstm/checkpoint.hpp"
#include "dtlstm/error.hpp"
#include "dtlstm/linear_svm.hpp"
#include "dtlstm/region_streams.hpp"
#include "dtlstm/text_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <iterator>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace dtlstm::cli {

namespace fs = std::filesystem;
using Eigen::VectorXd;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Pipeline config file (JSON)");
  cmd->add_option("--seed", f.seed, "Seed override");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threads", f.threads, "Worker threads, 0 = sequential deterministic mode");
}

PipelineConfig resolve_config(const CommonFlags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_pipeline_config(f.config);
  if (f.seed) c.apply_seed(*f.seed);
  if (f.threads) c.apply_threads(*f.threads);
  if (!f.out.empty()) c.output_dir = f.out;
  if (c.output_dir.empty()) c.output_dir = ".";
  return c;
}

std::string out_path(const PipelineConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

const std::string& require_path(const std::string& value, const std::string& what) {
  if (value.empty()) throw ArgumentError("no " + what + " given");
  return value;
}

std::vector<SkeletonSequence> load_skeletons(const PipelineConfig& c) {
  auto samples = load_skeleton_file(require_path(c.skeletons, "skeleton file"));
  if (samples.empty()) throw ArgumentError("skeleton file '" + c.skeletons + "' holds no sequences");
  return samples;
}

std::vector<NormalizedSequence> normalize(const PipelineConfig& c, const std::vector<SkeletonSequence>& samples,
                                          std::size_t target = 0) {
  const JointRoleMap roles = c.roles.resolve(samples.front().joint_count());
  if (target == 0) target = static_cast<std::size_t>(c.target_length);
  if (target == 0) {
    for (const auto& s : samples) target = std::max(target, s.length());
  }
  return normalize_all(samples, roles, c.normalization, target);
}

// Samples outside the test subjects train; with no test subjects every sample is used for both.
DatasetSplit split_of(const PipelineConfig& c, const std::vector<SkeletonSequence>& samples) {
  if (!c.test_subjects.empty()) return cross_subject_split(samples, c.test_subjects);
  DatasetSplit s;
  for (const auto& x : samples) s.train.push_back(x.id);
  s.test = s.train;
  return s;
}

template <class T>
std::vector<T> pick(const std::vector<T>& items, const std::vector<std::string>& ids) {
  std::map<std::string, const T*> by_id;
  for (const auto& x : items) by_id[x.id] = &x;
  std::vector<T> out;
  for (const auto& id : ids) out.push_back(*by_id.at(id));
  return out;
}

std::map<std::string, int> label_map(const std::vector<SkeletonSequence>& samples) {
  std::map<std::string, int> m;
  for (const auto& s : samples) m[s.id] = s.label;
  return m;
}

std::string summary_suffix(const std::vector<PredictionRecord>& preds) {
  const auto s = summarize(preds);
  if (!s) return "";
  return " accuracy " + format_double(s->accuracy()) + " (" + std::to_string(s->correct) + "/" +
         std::to_string(s->total) + ")";
}

SvmTrainConfig svm_config(const PipelineConfig& c, double c_reg) {
  SvmTrainConfig s;
  s.c_reg = c_reg;
  s.epochs = c.svm.epochs;
  s.seed = c.seed;
  return s;
}

double choose_c(const PipelineConfig& c, const std::vector<VectorXd>& x, const std::vector<int>& y,
                const std::optional<std::vector<int>>& groups) {
  if (c.svm.c_grid.empty()) return c.svm.c_reg;
  CvConfig cv;
  cv.folds = c.svm.folds;
  if (groups) {
    const std::set<int> distinct(groups->begin(), groups->end());
    cv.folds = std::min<int>(cv.folds, static_cast<int>(distinct.size()));
  }
  cv.epochs = c.svm.epochs;
  cv.seed = c.seed;
  return select_c_reg(x, y, groups, c.svm.c_grid, cv);
}

int cmd_gen_synth(const PipelineConfig& c, bool descriptors, std::ostream& out) {
  c.synth.check();
  const auto samples = generate(c.synth);
  PipelineConfig next = c;
  next.skeletons = out_path(c, "skeletons.jsonl");
  save_skeleton_file(next.skeletons, samples);
  std::size_t descriptor_count = 0;
  if (descriptors) {
    next.descriptors = out_path(c, "descriptors.txt");
    const auto d = generate_descriptors(c.synth, samples, c.synth.planted_region, c.synth.seed ^ 0x5bd1e995ULL);
    save_stream(next.descriptors, d);
    descriptor_count = d.size();
  }
  next.roles.preset = "synth";
  next.roles.explicit_map.reset();
  next.output_dir.clear();
  if (next.test_subjects.empty()) {
    const int held_out = std::max(1, c.synth.subjects * 2 / 5);
    for (int s = c.synth.subjects - held_out + 1; s <= c.synth.subjects; ++s) next.test_subjects.insert(s);
  }
  open_output(out_path(c, "pipeline.json"), "config") << pipeline_config_to_json(next);
  out << "gen-synth: " << samples.size() << " sequences, " << descriptor_count << " region descriptors -> "
      << c.output_dir << "\n";
  return kExitOk;
}

int cmd_normalize(const PipelineConfig& c, std::ostream& out) {
  const auto samples = load_skeletons(c);
  // Unpadded, so the result is again a skeleton file in body coordinates.
  std::vector<SkeletonSequence> result;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto full = normalize(c, {samples[i]}, samples[i].length()).front();
    SkeletonSequence s{samples[i].id, samples[i].subject, samples[i].label, {}};
    const Eigen::Index joints = full.dim() / 3;
    for (Eigen::Index t = 0; t < full.length(); ++t) {
      Frame f;
      for (Eigen::Index j = 0; j < joints; ++j) f.push_back(full.vectors.col(t).segment<3>(3 * j));
      s.frames.push_back(std::move(f));
    }
    result.push_back(std::move(s));
  }
  const std::string path = out_path(c, "normalized.jsonl");
  save_skeleton_file(path, result);
  out << "normalize: " << result.size() << " sequences (" << to_string(c.normalization) << ") -> " << path << "\n";
  return kExitOk;
}

int cmd_train_lstm(const PipelineConfig& c, std::ostream& out) {
  const auto samples = load_skeletons(c);
  const auto normalized = normalize(c, samples);
  const auto split = split_of(c, samples);
  const auto train_data = pick(normalized, split.train);
  const TrainResult result = train(train_data, c.train);
  const std::string path = out_path(c, "lstm.ckpt");
  save_checkpoint(path, Checkpoint{result.params, c.train});
  auto log = open_output(out_path(c, "train_log.jsonl"), "training log");
  for (const auto& e : result.log) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["accuracy"] = e.accuracy;
    log << j.dump() << "\n";
  }
  const auto& last = result.log.back();
  out << "train-lstm: " << train_data.size() << " sequences, " << result.log.size() << " epochs, loss "
      << format_double(last.loss) << ", train accuracy " << format_double(last.accuracy) << " -> " << path << "\n";
  return kExitOk;
}

int cmd_extract(const PipelineConfig& c, const std::string& checkpoint, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(require_path(checkpoint, "checkpoint"));
  const auto samples = load_skeletons(c);
  const auto normalized = normalize(c, samples);
  const auto split = split_of(c, samples);
  auto dump = [&](const std::vector<std::string>& ids, const std::string& name) {
    std::vector<FeatureRecord> records;
    for (const auto& m : extract_all(pick(normalized, ids), ckpt.params)) {
      records.push_back({m.id, m.label, to_string(c.layout), to_classifier_vector(m, c.layout)});
    }
    save_feature_file(out_path(c, name), records);
    return records.size();
  };
  if (c.test_subjects.empty()) {
    const auto n = dump(split.train, "features.txt");
    out << "extract: " << n << " feature vectors (" << to_string(c.layout) << ") -> " << c.output_dir << "\n";
  } else {
    const auto n_train = dump(split.train, "features_train.txt");
    const auto n_test = dump(split.test, "features_test.txt");
    out << "extract: " << n_train << " train + " << n_test << " test feature vectors (" << to_string(c.layout)
        << ") -> " << c.output_dir << "\n";
  }
  return kExitOk;
}

std::vector<PredictionRecord> score_and_save(const PipelineConfig& c, const SvmModel& model,
                                             const std::vector<std::string>& ids, const std::vector<VectorXd>& x,
                                             const std::vector<std::optional<int>>& truth, const std::string& producer,
                                             const std::string& stem) {
  std::vector<ScoreRecord> scores;
  std::vector<PredictionRecord> preds;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ClassScores s = predict_scores(model, x[i], producer);
    preds.push_back({ids[i], s.values, argmax(s.values), truth[i]});
    scores.push_back({ids[i], std::move(s)});
  }
  save_score_file(out_path(c, stem + ".scores"), scores);
  save_prediction_file(out_path(c, stem + ".pred"), preds);
  return preds;
}

int cmd_train_svm(const PipelineConfig& c, const std::string& train_path, const std::string& test_path,
                  const std::string& producer, std::ostream& out) {
  const auto train_records = load_feature_file(require_path(train_path, "training feature file"));
  if (train_records.empty()) throw ArgumentError("training feature file is empty");
  std::vector<VectorXd> x;
  std::vector<int> y;
  for (const auto& r : train_records) {
    x.push_back(r.values);
    y.push_back(r.label);
  }
  const double c_reg = choose_c(c, x, y, std::nullopt);
  const SvmModel model = train_ovr(x, y, svm_config(c, c_reg));
  const std::string model_path = out_path(c, "svm.json");
  save_svm_model(model_path, model);
  out << "train-svm: " << x.size() << " vectors, C " << format_double(c_reg) << ", train accuracy "
      << format_double(accuracy(model, x, y));
  if (!test_path.empty()) {
    const auto test_records = load_feature_file(test_path);
    std::vector<std::string> ids;
    std::vector<VectorXd> tx;
    std::vector<std::optional<int>> truth;
    for (const auto& r : test_records) {
      ids.push_back(r.id);
      tx.push_back(r.values);
      truth.push_back(r.label);
    }
    const auto preds = score_and_save(c, model, ids, tx, truth, producer, producer);
    out << ", test" << summary_suffix(preds);
  }
  out << " -> " << model_path << "\n";
  return kExitOk;
}

PooledRegions pool_from(const PipelineConfig& c, const std::vector<SkeletonSequence>& samples) {
  const RegionStream stream = load_stream(require_path(c.descriptors, "descriptor file"));
  return pool_stream(stream, label_map(samples));
}

int cmd_pool(const PipelineConfig& c, std::ostream& out) {
  const auto samples = load_skeletons(c);
  const PooledRegions pooled = pool_from(c, samples);
  for (const auto& [region, items] : pooled) {
    std::vector<FeatureRecord> records;
    for (const auto& p : items) records.push_back({p.sample, p.label, "max-min", p.values});
    save_feature_file(out_path(c, "pooled_region" + std::to_string(region) + ".txt"), records);
  }
  out << "pool: " << pooled.size() << " regions, " << (pooled.empty() ? 0 : pooled.begin()->second.size())
      << " videos each -> " << c.output_dir << "\n";
  return kExitOk;
}

int cmd_select_region(const PipelineConfig& c, std::ostream& out) {
  const auto samples = load_skeletons(c);
  const PooledRegions pooled = pool_from(c, samples);
  const auto split = split_of(c, samples);
  std::map<std::string, int> subjects;
  for (const auto& s : samples) subjects[s.id] = s.subject;
  std::set<int> train_subjects;
  for (const auto& id : split.train) train_subjects.insert(subjects.at(id));

  CvConfig cv;
  cv.folds = std::min<int>(c.svm.folds, static_cast<int>(train_subjects.size()));
  cv.c_reg = c.svm.c_reg;
  cv.epochs = c.svm.epochs;
  cv.seed = c.seed;
  const std::set<std::string> train_ids(split.train.begin(), split.train.end());
  const RegionSelection sel = select_best_region(pooled, train_ids, cv, subjects);

  std::map<std::string, const PooledVideoDescriptor*> by_id;
  for (const auto& p : pooled.at(sel.region)) by_id[p.sample] = &p;
  std::vector<VectorXd> x;
  std::vector<int> y;
  for (const auto& id : split.train) {
    x.push_back(by_id.at(id)->values);
    y.push_back(by_id.at(id)->label);
  }
  const SvmModel model = train_ovr(x, y, svm_config(c, c.svm.c_reg));
  save_svm_model(out_path(c, "region_svm.json"), model);
  std::vector<VectorXd> tx;
  std::vector<std::optional<int>> truth;
  for (const auto& id : split.test) {
    tx.push_back(by_id.at(id)->values);
    truth.push_back(by_id.at(id)->label);
  }
  const auto preds = score_and_save(c, model, split.test, tx, truth, "region", "region");

  nlohmann::ordered_json j;
  j["region"] = sel.region;
  nlohmann::ordered_json acc = nlohmann::ordered_json::object();
  for (const auto& [r, a] : sel.accuracies) acc[std::to_string(r)] = a;
  j["cv_accuracy"] = acc;
  open_output(out_path(c, "selection.json"), "selection") << j.dump(2) << "\n";
  out << "select-region: region " << sel.region << " (cv accuracy " << format_double(sel.accuracies.at(sel.region))
      << "), test" << summary_suffix(preds) << " -> " << c.output_dir << "\n";
  return kExitOk;
}

int cmd_fuse(const PipelineConfig& c, const std::vector<std::string>& score_paths, std::ostream& out) {
  if (score_paths.empty()) throw ArgumentError("fuse needs at least one --scores file");
  std::vector<std::vector<ScoreRecord>> tables;
  for (const auto& p : score_paths) tables.push_back(load_score_file(p));
  std::optional<std::map<std::string, int>> labels;
  if (!c.skeletons.empty()) labels = label_map(load_skeletons(c));
  const auto preds = fuse_tables(tables, c.fusion, labels);
  const std::string path = out_path(c, "fused.pred");
  save_prediction_file(path, preds);
  out << "fuse: " << tables.size() << " streams, " << preds.size() << " samples" << summary_suffix(preds) << " -> "
      << path << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& predictions, std::ostream& out) {
  const auto preds = load_prediction_file(require_path(predictions, "prediction file"));
  std::vector<PredictionRecord> labeled;
  std::copy_if(preds.begin(), preds.end(), std::back_inserter(labeled), [](const auto& p) { return p.truth; });
  const auto s = summarize(labeled);
  if (!s) {
    out << "evaluate: " << preds.size() << " predictions, no labels\n";
    return kExitOk;
  }
  out << "evaluate: accuracy " << format_double(s->accuracy()) << " " << s->correct << "/" << s->total;
  if (labeled.size() < preds.size()) out << " (" << preds.size() - labeled.size() << " unlabeled)";
  out << "\n";
  return kExitOk;
}

int cmd_benchmark(const PipelineConfig& c, std::ostream& out) {
  BenchConfig b = c.benchmark;
  b.out_dir = c.output_dir;
  const BenchmarkReport report = run_benchmark(b);
  write_report(report, b.out_dir);
  out << report.table();
  out << "benchmark: " << report.cells.size() << " cells -> " << (fs::path(b.out_dir) / "report.txt").string()
      << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skeleton action recognition with deep-temporal LSTMs, region selection and late fusion", "dtlstm"};
  app.require_subcommand(1, 1);
  app.allow_extras(false);

  CommonFlags common;
  std::string checkpoint, predictions, train_features, test_features, producer = "lstm";
  std::string skeletons, descriptors;
  std::vector<std::string> scores;
  bool no_descriptors = false;

  auto data_flags = [&](CLI::App* cmd, bool with_descriptors) {
    cmd->add_option("--skeletons", skeletons, "Skeleton file (JSONL)");
    if (with_descriptors) cmd->add_option("--descriptors", descriptors, "Region descriptor file");
  };

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic skeleton set and region descriptors");
  add_common(gen, common);
  gen->add_flag("--no-descriptors", no_descriptors, "Skip the region descriptor file");
  auto* norm = app.add_subcommand("normalize", "Write view-normalized skeletons");
  add_common(norm, common);
  data_flags(norm, false);
  auto* tl = app.add_subcommand("train-lstm", "Train the stacked LSTM on the training subjects");
  add_common(tl, common);
  data_flags(tl, false);
  auto* ex = app.add_subcommand("extract", "Dump latent LSTM features");
  add_common(ex, common);
  data_flags(ex, false);
  ex->add_option("--checkpoint", checkpoint, "LSTM checkpoint")->required();
  auto* ts = app.add_subcommand("train-svm", "Train the one-vs-rest linear SVM on a feature file");
  add_common(ts, common);
  ts->add_option("--train", train_features, "Training feature file")->required();
  ts->add_option("--test", test_features, "Feature file to score");
  ts->add_option("--producer", producer, "Producer tag written into score files");
  auto* pl = app.add_subcommand("pool", "Max-min pool region descriptors per video");
  add_common(pl, common);
  data_flags(pl, true);
  auto* sr = app.add_subcommand("select-region", "Pick the best region by subject-wise cross-validation");
  add_common(sr, common);
  data_flags(sr, true);
  auto* fu = app.add_subcommand("fuse", "Late-fuse score files");
  add_common(fu, common);
  fu->add_option("--scores", scores, "Score file (repeatable)")->required();
  fu->add_option("--skeletons", skeletons, "Skeleton file supplying true labels");
  auto* ev = app.add_subcommand("evaluate", "Recount accuracy of a prediction file");
  add_common(ev, common);
  ev->add_option("--predictions", predictions, "Prediction file")->required();
  auto* bm = app.add_subcommand("benchmark", "Run the synthetic ablation benchmark");
  add_common(bm, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
      return kExitOk;
    }
    err << "dtlstm: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    PipelineConfig c = resolve_config(common);
    if (!skeletons.empty()) c.skeletons = skeletons;
    if (!descriptors.empty()) c.descriptors = descriptors;
    if (*gen) return cmd_gen_synth(c, !no_descriptors, out);
    if (*norm) return cmd_normalize(c, out);
    if (*tl) return cmd_train_lstm(c, out);
    if (*ex) return cmd_extract(c, checkpoint, out);
    if (*ts) return cmd_train_svm(c, train_features, test_features, producer, out);
    if (*pl) return cmd_pool(c, out);
    if (*sr) return cmd_select_region(c, out);
    if (*fu) return cmd_fuse(c, scores, out);
    if (*ev) return cmd_evaluate(predictions, out);
    if (*bm) return cmd_benchmark(c, out);
  } catch (const InputNotFound& e) {
    err << "dtlstm: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const Error& e) {
    err << "dtlstm: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    err << "dtlstm: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dtlstm::cli
