#include "dtlstm/bench.hpp"
#include "dtlstm/error.hpp"
#include "dtlstm/text_io.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dtlstm;
namespace fs = std::filesystem;

namespace {

BenchConfig tiny() {
  BenchConfig c = default_bench_config();
  for (auto& d : c.datasets) {
    d.spec.per_class = 5;
    d.spec.min_frames = 10;
    d.spec.max_frames = 12;
    d.spec.descriptor_frames = 3;
  }
  c.seeds = {1, 2};
  c.lstm.hidden = {6};
  c.lstm.epochs = 2;
  c.svm.epochs = 5;
  c.cv.epochs = 5;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("method tags round trip") {
  for (BenchMethod m : all_bench_methods()) CHECK(parse_bench_method(method_tag(m)) == m);
  CHECK_THROWS_AS(parse_bench_method("magic"), ConfigError);
}

TEST_CASE("report accuracies match the emitted prediction files") {
  const fs::path dir = fs::temp_directory_path() / "dtlstm_bench_test";
  fs::remove_all(dir);
  BenchConfig c = tiny();
  c.out_dir = dir.string();
  const BenchmarkReport r = run_benchmark(c);
  write_report(r, c.out_dir);
  CHECK(r.cells.size() == c.datasets.size() * c.seeds.size() * c.methods.size());
  for (const auto& cell : r.cells) {
    const auto preds = load_prediction_file(
        (dir / "predictions" / cell.dataset / (method_tag(cell.method) + "_seed" + std::to_string(cell.seed) + ".pred"))
            .string());
    std::size_t correct = 0;
    for (const auto& p : preds) correct += p.truth && *p.truth == p.predicted;
    CHECK(correct == cell.correct);
    CHECK(preds.size() == cell.total);
    CHECK(cell.accuracy() >= 0.0);
    CHECK(cell.accuracy() <= 1.0);
  }
  CHECK(fs::exists(dir / "checkpoints" / "synth-easy_seed1_many-to-one.ckpt"));
  CHECK(fs::exists(dir / "checkpoints" / "synth-early_seed2_many-to-many.ckpt"));

  const std::string table = slurp(dir / "report.txt");
  for (BenchMethod m : c.methods) CHECK(table.find(method_label(m)) != std::string::npos);
  CHECK(table.find("synth-early") != std::string::npos);

  std::istringstream lines(slurp(dir / "report.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("dataset"));
    ++n;
  }
  CHECK(n == r.cells.size() + c.datasets.size() * c.methods.size());
}

TEST_CASE("benchmark reports are reproducible") {
  const BenchConfig c = tiny();
  const BenchmarkReport a = run_benchmark(c);
  const BenchmarkReport b = run_benchmark(c);
  CHECK(a.table() == b.table());
  CHECK(a.jsonl() == b.jsonl());
}

TEST_CASE("benchmark needs seeds and datasets") {
  BenchConfig c = tiny();
  c.seeds.clear();
  CHECK_THROWS_AS(run_benchmark(c), ConfigError);
  c = tiny();
  c.datasets.clear();
  CHECK_THROWS_AS(run_benchmark(c), ConfigError);
}

TEST_CASE("region ablation uses training subjects only") {
  SynthSpec spec;
  spec.per_class = 10;
  const auto samples = generate(spec);
  std::map<std::string, int> labels, subjects;
  for (const auto& s : samples) {
    labels[s.id] = s.label;
    subjects[s.id] = s.subject;
  }
  RegionStream stream;
  stream.dim = spec.descriptor_dim;
  for (const auto& d : generate_descriptors(spec, samples, 2, 3)) stream.groups[{d.sample, d.region}].push_back(d);
  const DatasetSplit split = cross_subject_split(samples, {5});
  const RegionAblation r = region_ablation(pool_stream(stream, labels), split, subjects, {}, {3, 1.0, 20, 1});
  CHECK(r.selection.region == 2);
  CHECK(r.selected_scores.size() == split.test.size());
  CHECK(r.all_region_scores.size() == split.test.size());
}
