#include "dtlstm/text_io.hpp"

#include "dtlstm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace dtlstm {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& context) {
  double x = 0.0;
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(context + ": '" + std::string(token) + "' is not a decimal number");
  }
  if (!std::isfinite(x)) throw ParseError(context + ": non-finite value '" + std::string(token) + "'");
  return x;
}

long long parse_integer(std::string_view token, const std::string& context) {
  long long x = 0;
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(context + ": '" + std::string(token) + "' is not an integer");
  }
  return x;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::ifstream open_input(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InputNotFound("cannot open " + what + ": " + path);
  return in;
}

std::ofstream open_output(const std::string& path, const std::string& what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputNotFound("cannot write " + what + ": " + path);
  return out;
}

namespace {

bool skippable(const std::string& line) {
  const auto p = line.find_first_not_of(" \t\r");
  return p == std::string::npos || line[p] == '#';
}

template <typename Record, typename Parse>
std::vector<Record> load_lines(const std::string& path, const std::string& what, Parse parse) {
  std::ifstream in = open_input(path, what);
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    try {
      out.push_back(parse(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string format_feature_record(const FeatureRecord& r) {
  std::string s = r.id + ' ' + std::to_string(r.label) + ' ' + r.layout + ' ' + std::to_string(r.values.size());
  for (Eigen::Index k = 0; k < r.values.size(); ++k) s += ' ' + format_double(r.values(k));
  return s;
}

FeatureRecord parse_feature_record(std::string_view line) {
  const auto tok = split_tokens(line);
  if (tok.size() < 4) throw ParseError("feature record needs id, label, layout and dimension");
  FeatureRecord r;
  r.id = std::string(tok[0]);
  r.label = static_cast<int>(parse_integer(tok[1], "feature label"));
  r.layout = std::string(tok[2]);
  const long long dim = parse_integer(tok[3], "feature dimension");
  if (dim < 0 || static_cast<std::size_t>(dim) != tok.size() - 4) {
    throw ParseError("feature record '" + r.id + "' declares dimension " + std::to_string(dim) + " but has " +
                     std::to_string(tok.size() - 4) + " values");
  }
  r.values.resize(dim);
  for (long long k = 0; k < dim; ++k) r.values(k) = parse_double(tok[4 + static_cast<std::size_t>(k)], "feature value");
  return r;
}

std::vector<FeatureRecord> load_feature_file(const std::string& path) {
  return load_lines<FeatureRecord>(path, "feature file", parse_feature_record);
}

void save_feature_file(const std::string& path, const std::vector<FeatureRecord>& records) {
  std::ofstream out = open_output(path, "feature file");
  for (const auto& r : records) out << format_feature_record(r) << '\n';
}

std::string format_score_record(const ScoreRecord& r) {
  std::string s = r.id + ' ' + r.scores.producer;
  for (Eigen::Index k = 0; k < r.scores.values.size(); ++k) s += ' ' + format_double(r.scores.values(k));
  return s;
}

ScoreRecord parse_score_record(std::string_view line) {
  const auto tok = split_tokens(line);
  if (tok.size() < 3) throw ParseError("score record needs id, producer and at least one score");
  ScoreRecord r;
  r.id = std::string(tok[0]);
  r.scores.producer = std::string(tok[1]);
  r.scores.values.resize(static_cast<Eigen::Index>(tok.size() - 2));
  for (std::size_t k = 2; k < tok.size(); ++k) {
    r.scores.values(static_cast<Eigen::Index>(k - 2)) = parse_double(tok[k], "score");
  }
  return r;
}

std::vector<ScoreRecord> load_score_file(const std::string& path) {
  return load_lines<ScoreRecord>(path, "score file", parse_score_record);
}

void save_score_file(const std::string& path, const std::vector<ScoreRecord>& records) {
  std::ofstream out = open_output(path, "score file");
  for (const auto& r : records) out << format_score_record(r) << '\n';
}

std::optional<PredictionSummary> summarize(const std::vector<PredictionRecord>& records) {
  PredictionSummary s;
  for (const auto& r : records) {
    if (!r.truth) return std::nullopt;
    ++s.total;
    if (*r.truth == r.predicted) ++s.correct;
  }
  if (s.total == 0) return std::nullopt;
  return s;
}

std::string format_prediction_record(const PredictionRecord& r) {
  std::string s = r.id + ' ' + std::to_string(r.scores.size());
  for (Eigen::Index k = 0; k < r.scores.size(); ++k) s += ' ' + format_double(r.scores(k));
  s += ' ' + std::to_string(r.predicted) + ' ' + (r.truth ? std::to_string(*r.truth) : std::string("-"));
  return s;
}

PredictionRecord parse_prediction_record(std::string_view line) {
  const auto tok = split_tokens(line);
  if (tok.size() < 4) throw ParseError("prediction record is too short");
  PredictionRecord r;
  r.id = std::string(tok[0]);
  const long long classes = parse_integer(tok[1], "class count");
  if (classes < 1 || static_cast<std::size_t>(classes) + 4 != tok.size()) {
    throw ParseError("prediction record '" + r.id + "' has a bad class count");
  }
  r.scores.resize(classes);
  for (long long k = 0; k < classes; ++k) r.scores(k) = parse_double(tok[2 + static_cast<std::size_t>(k)], "score");
  r.predicted = static_cast<int>(parse_integer(tok[2 + static_cast<std::size_t>(classes)], "predicted label"));
  const std::string_view truth = tok[3 + static_cast<std::size_t>(classes)];
  if (truth != "-") r.truth = static_cast<int>(parse_integer(truth, "true label"));
  return r;
}

void save_prediction_file(const std::string& path, const std::vector<PredictionRecord>& records) {
  std::ofstream out = open_output(path, "prediction file");
  for (const auto& r : records) out << format_prediction_record(r) << '\n';
  if (const auto s = summarize(records)) {
    out << "# accuracy " << format_double(s->accuracy()) << ' ' << s->correct << '/' << s->total << '\n';
  }
}

std::vector<PredictionRecord> load_prediction_file(const std::string& path) {
  return load_lines<PredictionRecord>(path, "prediction file", parse_prediction_record);
}

}  // namespace dtlstm
