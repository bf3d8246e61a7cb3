#include "dtlstm/bench.hpp"

#include "dtlstm/checkpoint.hpp"
#include "dtlstm/error.hpp"
#include "dtlstm/text_io.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

namespace dtlstm {

namespace fs = std::filesystem;
using Eigen::VectorXd;

std::string method_tag(BenchMethod m) {
  switch (m) {
    case BenchMethod::TraditionalLstm: return "traditional_lstm";
    case BenchMethod::TraditionalLstmSvm: return "traditional_lstm_svm";
    case BenchMethod::DeepTemporalSoftmax: return "deep_temporal_softmax";
    case BenchMethod::DeepTemporalLstm: return "deep_temporal_lstm";
    case BenchMethod::AllRegions: return "all_regions";
    case BenchMethod::SelectedRegion: return "selected_region";
    case BenchMethod::Fusion: return "fusion";
  }
  return "?";
}

std::string method_label(BenchMethod m) {
  switch (m) {
    case BenchMethod::TraditionalLstm: return "Traditional LSTM";
    case BenchMethod::TraditionalLstmSvm: return "Traditional LSTM + SVM";
    case BenchMethod::DeepTemporalSoftmax: return "Deep Temporal LSTM (softmax)";
    case BenchMethod::DeepTemporalLstm: return "Deep Temporal LSTM";
    case BenchMethod::AllRegions: return "Region CNN (all regions)";
    case BenchMethod::SelectedRegion: return "FS(Region CNN)";
    case BenchMethod::Fusion: return "Deep Temporal LSTM + FS(Region CNN)";
  }
  return "?";
}

std::vector<BenchMethod> all_bench_methods() {
  return {BenchMethod::TraditionalLstm, BenchMethod::TraditionalLstmSvm, BenchMethod::DeepTemporalSoftmax,
          BenchMethod::DeepTemporalLstm, BenchMethod::AllRegions,        BenchMethod::SelectedRegion,
          BenchMethod::Fusion};
}

BenchMethod parse_bench_method(const std::string& tag) {
  for (BenchMethod m : all_bench_methods()) {
    if (method_tag(m) == tag) return m;
  }
  throw ConfigError("unknown benchmark method '" + tag + "'");
}

BenchConfig default_bench_config() {
  BenchConfig c;
  SynthSpec easy;
  easy.evidence = EvidenceWindow::Full;
  easy.noise = 0.01;
  easy.min_frames = 30;
  easy.max_frames = 40;
  SynthSpec early = easy;
  early.evidence = EvidenceWindow::Early;
  early.evidence_fraction = 0.2;
  early.min_frames = 100;
  early.max_frames = 100;
  c.datasets = {{"synth-easy", easy}, {"synth-early", early}};
  c.seeds = {1, 2, 3, 4, 5};
  c.lstm.hidden = {16, 16, 16};
  c.lstm.epochs = 60;
  c.lstm.batch_size = 8;
  c.lstm.dropout = 0.0;
  c.svm.epochs = 30;
  c.cv.folds = 3;
  c.cv.epochs = 30;
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool wants(const BenchConfig& c, BenchMethod m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

struct Scored {
  std::vector<ScoreRecord> scores;
  std::size_t correct = 0;
};

// Trains a linear SVM on the training rows and scores the test rows.
Scored svm_stage(const std::vector<VectorXd>& train_x, const std::vector<int>& train_y,
                 const std::vector<int>& train_groups, const std::vector<VectorXd>& test_x,
                 const std::vector<int>& test_y, const std::vector<std::string>& test_ids,
                 const SvmTrainConfig& svm, const std::vector<double>& c_grid, const CvConfig& cv,
                 const std::string& producer) {
  SvmTrainConfig cfg = svm;
  if (!c_grid.empty()) {
    CvConfig folds = cv;
    std::set<int> distinct(train_groups.begin(), train_groups.end());
    folds.folds = std::min<int>(cv.folds, static_cast<int>(distinct.size()));
    cfg.c_reg = select_c_reg(train_x, train_y, train_groups, c_grid, folds);
  }
  const SvmModel model = train_ovr(train_x, train_y, cfg);
  Scored out;
  for (std::size_t i = 0; i < test_x.size(); ++i) {
    ClassScores s = predict_scores(model, test_x[i], producer);
    out.correct += argmax(s.values) == test_y[i];
    out.scores.push_back({test_ids[i], std::move(s)});
  }
  return out;
}

std::vector<PredictionRecord> predictions_from_scores(const std::vector<ScoreRecord>& scores,
                                                      const std::map<std::string, int>& labels) {
  std::vector<PredictionRecord> out;
  for (const auto& s : scores) {
    out.push_back({s.id, s.scores.values, argmax(s.scores.values), labels.at(s.id)});
  }
  return out;
}

}  // namespace

RegionAblation region_ablation(const PooledRegions& pooled, const DatasetSplit& split,
                               const std::map<std::string, int>& subjects, const SvmTrainConfig& svm,
                               const CvConfig& cv) {
  const std::set<std::string> train_ids(split.train.begin(), split.train.end());
  const std::set<std::string> test_ids(split.test.begin(), split.test.end());
  std::set<int> train_subjects;
  for (const auto& id : split.train) train_subjects.insert(subjects.at(id));
  CvConfig folds = cv;
  folds.folds = std::min<int>(cv.folds, static_cast<int>(train_subjects.size()));

  RegionAblation out;
  out.selection = select_best_region(pooled, train_ids, folds, subjects);

  auto run = [&](const std::vector<PooledVideoDescriptor>& items, const std::string& producer, double& acc) {
    std::vector<VectorXd> tx, sx;
    std::vector<int> ty, sy, tg;
    std::vector<std::string> sid;
    for (const auto& p : items) {
      if (train_ids.count(p.sample)) {
        tx.push_back(p.values);
        ty.push_back(p.label);
        tg.push_back(subjects.at(p.sample));
      } else if (test_ids.count(p.sample)) {
        sx.push_back(p.values);
        sy.push_back(p.label);
        sid.push_back(p.sample);
      }
    }
    Scored s = svm_stage(tx, ty, tg, sx, sy, sid, svm, {}, cv, producer);
    acc = sx.empty() ? 0.0 : static_cast<double>(s.correct) / static_cast<double>(sx.size());
    return std::move(s.scores);
  };
  out.selected_scores = run(pooled.at(out.selection.region), "region", out.selected_accuracy);
  out.all_region_scores = run(concatenate_regions(pooled), "all_regions", out.all_regions_accuracy);
  return out;
}

BenchmarkReport run_benchmark(const BenchConfig& config) {
  if (config.datasets.empty()) throw ConfigError("benchmark: no datasets");
  if (config.seeds.empty()) throw ConfigError("benchmark: at least one seed is required");
  if (config.methods.empty()) throw ConfigError("benchmark: no methods selected");
  config.lstm.check();

  BenchmarkReport report;
  report.methods = config.methods;
  report.seeds = config.seeds;
  for (const auto& d : config.datasets) report.datasets.push_back(d.name);

  if (!config.out_dir.empty()) {
    fs::create_directories(fs::path(config.out_dir) / "checkpoints");
    fs::create_directories(fs::path(config.out_dir) / "predictions");
  }

  for (const BenchDataset& dataset : config.datasets) {
    for (std::uint64_t seed : config.seeds) {
      SynthSpec spec = dataset.spec;
      spec.seed = seed;
      const std::vector<SkeletonSequence> samples = generate(spec);
      const DatasetSplit split = cross_subject_split(samples, config.test_subjects);
      const std::size_t target =
          static_cast<std::size_t>(config.target_length > 0 ? config.target_length : spec.max_frames);
      const std::vector<NormalizedSequence> normalized =
          normalize_all(samples, synth_roles(spec.joints), config.normalization, target);

      std::map<std::string, int> labels, subjects;
      for (const auto& s : samples) {
        labels[s.id] = s.label;
        subjects[s.id] = s.subject;
      }
      const std::set<std::string> test_set(split.test.begin(), split.test.end());
      std::vector<NormalizedSequence> train_data, test_data;
      for (const auto& n : normalized) (test_set.count(n.id) ? test_data : train_data).push_back(n);

      const std::string stem = dataset.name + "_seed" + std::to_string(seed);
      std::map<BenchMethod, std::vector<PredictionRecord>> predictions;
      std::map<BenchMethod, double> seconds;
      std::map<BenchMethod, int> selected;
      std::vector<ScoreRecord> deep_temporal_scores, region_scores;

      auto lstm_branch = [&](LossMode mode, BenchMethod softmax_method, BenchMethod svm_method,
                             std::vector<ScoreRecord>* keep_scores) {
        const bool need_softmax = wants(config, softmax_method);
        const bool need_svm = wants(config, svm_method) || (keep_scores && wants(config, BenchMethod::Fusion));
        if (!need_softmax && !need_svm) return;
        const auto start = Clock::now();
        TrainConfig tc = config.lstm;
        tc.loss_mode = mode;
        tc.seed = seed;
        const TrainResult trained = train(train_data, tc);
        const double train_time = seconds_since(start);
        if (!config.out_dir.empty()) {
          save_checkpoint((fs::path(config.out_dir) / "checkpoints" / (stem + "_" + to_string(mode) + ".ckpt")).string(),
                          Checkpoint{trained.params, tc});
        }
        if (need_softmax) {
          const auto t0 = Clock::now();
          const Readout readout = mode == LossMode::ManyToOne ? Readout::LastStep : Readout::MeanOverTime;
          const auto probs = predict_probabilities(test_data, trained.params, readout);
          auto& preds = predictions[softmax_method];
          for (std::size_t i = 0; i < test_data.size(); ++i) {
            preds.push_back({test_data[i].id, probs[i], argmax(probs[i]), test_data[i].label});
          }
          seconds[softmax_method] = train_time + seconds_since(t0);
        }
        if (need_svm) {
          const auto t0 = Clock::now();
          auto featurize = [&](const std::vector<NormalizedSequence>& data, std::vector<VectorXd>& x,
                               std::vector<int>& y, std::vector<int>& g, std::vector<std::string>& ids) {
            for (const auto& m : extract_all(data, trained.params)) {
              x.push_back(to_classifier_vector(m, config.layout));
              y.push_back(m.label);
              g.push_back(m.subject);
              ids.push_back(m.id);
            }
          };
          std::vector<VectorXd> tx, sx;
          std::vector<int> ty, tg, sy, sg;
          std::vector<std::string> tid, sid;
          featurize(train_data, tx, ty, tg, tid);
          featurize(test_data, sx, sy, sg, sid);
          SvmTrainConfig svm = config.svm;
          svm.seed = seed;
          svm.classes = spec.classes;
          Scored scored = svm_stage(tx, ty, tg, sx, sy, sid, svm, config.c_grid, config.cv, "lstm");
          predictions[svm_method] = predictions_from_scores(scored.scores, labels);
          seconds[svm_method] = train_time + seconds_since(t0);
          if (keep_scores) *keep_scores = std::move(scored.scores);
        }
      };

      lstm_branch(LossMode::ManyToOne, BenchMethod::TraditionalLstm, BenchMethod::TraditionalLstmSvm, nullptr);
      lstm_branch(LossMode::ManyToMany, BenchMethod::DeepTemporalSoftmax, BenchMethod::DeepTemporalLstm,
                  &deep_temporal_scores);

      if (wants(config, BenchMethod::AllRegions) || wants(config, BenchMethod::SelectedRegion) ||
          wants(config, BenchMethod::Fusion)) {
        const auto start = Clock::now();
        const auto descriptors = generate_descriptors(spec, samples, spec.planted_region, seed ^ 0x5bd1e995ULL);
        RegionStream stream;
        stream.dim = spec.descriptor_dim;
        for (const auto& d : descriptors) stream.groups[{d.sample, d.region}].push_back(d);
        SvmTrainConfig svm = config.svm;
        svm.seed = seed;
        svm.classes = spec.classes;
        CvConfig cv = config.cv;
        cv.seed = seed;
        const RegionAblation ablation = region_ablation(pool_stream(stream, labels), split, subjects, svm, cv);
        const double elapsed = seconds_since(start);
        predictions[BenchMethod::SelectedRegion] = predictions_from_scores(ablation.selected_scores, labels);
        predictions[BenchMethod::AllRegions] = predictions_from_scores(ablation.all_region_scores, labels);
        seconds[BenchMethod::SelectedRegion] = elapsed;
        seconds[BenchMethod::AllRegions] = elapsed;
        selected[BenchMethod::SelectedRegion] = ablation.selection.region;
        region_scores = ablation.selected_scores;
      }

      if (wants(config, BenchMethod::Fusion)) {
        const auto start = Clock::now();
        predictions[BenchMethod::Fusion] = fuse_tables({deep_temporal_scores, region_scores}, config.fusion, labels);
        seconds[BenchMethod::Fusion] =
            seconds[BenchMethod::DeepTemporalLstm] + seconds[BenchMethod::SelectedRegion] + seconds_since(start);
        selected[BenchMethod::Fusion] = selected[BenchMethod::SelectedRegion];
      }

      for (BenchMethod m : config.methods) {
        const auto& preds = predictions.at(m);
        BenchmarkCell cell;
        cell.dataset = dataset.name;
        cell.method = m;
        cell.seed = seed;
        cell.total = preds.size();
        for (const auto& p : preds) cell.correct += p.truth && *p.truth == p.predicted;
        cell.selected_region = selected.count(m) ? selected.at(m) : 0;
        cell.seconds = seconds[m];
        report.cells.push_back(cell);
        if (!config.out_dir.empty()) {
          const fs::path dir = fs::path(config.out_dir) / "predictions" / dataset.name;
          fs::create_directories(dir);
          save_prediction_file((dir / (method_tag(m) + "_seed" + std::to_string(seed) + ".pred")).string(), preds);
        }
      }
    }
  }
  return report;
}

double BenchmarkReport::mean_accuracy(const std::string& dataset, BenchMethod method) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : cells) {
    if (c.dataset == dataset && c.method == method) {
      sum += c.accuracy();
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / n;
}

std::string BenchmarkReport::table() const {
  std::size_t label_width = 6;
  for (BenchMethod m : methods) label_width = std::max(label_width, method_label(m).size());
  std::string out;
  char buf[64];
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::vector<std::size_t> widths;
  out += pad("Method", label_width);
  for (const auto& d : datasets) {
    widths.push_back(std::max<std::size_t>(d.size(), 8));
    out += " | " + pad(d, widths.back());
  }
  out += "\n" + std::string(label_width, '-');
  for (std::size_t w : widths) out += "-+-" + std::string(w, '-');
  out += "\n";
  for (BenchMethod m : methods) {
    out += pad(method_label(m), label_width);
    for (std::size_t k = 0; k < datasets.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%*.2f", static_cast<int>(widths[k]), 100.0 * mean_accuracy(datasets[k], m));
      out += std::string(" | ") + buf;
    }
    out += "\n";
  }
  out += "\nAccuracy [%] on held-out subjects, mean over seeds {";
  for (std::size_t k = 0; k < seeds.size(); ++k) out += (k ? "," : "") + std::to_string(seeds[k]);
  out += "}.\n";
  return out;
}

std::string BenchmarkReport::jsonl() const {
  std::string out;
  for (const auto& c : cells) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset;
    j["method"] = method_tag(c.method);
    j["seed"] = c.seed;
    j["correct"] = c.correct;
    j["total"] = c.total;
    j["accuracy"] = c.accuracy();
    if (c.selected_region > 0) j["selected_region"] = c.selected_region;
    out += j.dump() + "\n";
  }
  for (const auto& d : datasets) {
    for (BenchMethod m : methods) {
      nlohmann::ordered_json j;
      j["dataset"] = d;
      j["method"] = method_tag(m);
      j["seeds"] = seeds;
      j["mean_accuracy"] = mean_accuracy(d, m);
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::string BenchmarkReport::timings() const {
  std::string out;
  for (const auto& c : cells) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset;
    j["method"] = method_tag(c.method);
    j["seed"] = c.seed;
    j["seconds"] = c.seconds;
    out += j.dump() + "\n";
  }
  return out;
}

void write_report(const BenchmarkReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  open_output((fs::path(out_dir) / "report.txt").string(), "report") << report.table();
  open_output((fs::path(out_dir) / "report.jsonl").string(), "report") << report.jsonl();
  open_output((fs::path(out_dir) / "timings.jsonl").string(), "timings") << report.timings();
}

}  // namespace dtlstm
