#include "dtlstm/error.hpp"
#include "dtlstm/lstm.hpp"
#include "dtlstm/normalization.hpp"
#include "dtlstm/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

using namespace dtlstm;

namespace {

double frame_distance(const Frame& a, const Frame& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST_CASE("generation is sized and seeded") {
  SynthSpec spec;
  spec.classes = 4;
  spec.per_class = 10;
  const auto a = generate(spec);
  CHECK(a.size() == 40);
  const auto b = generate(spec);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(serialize_sequence(a[i]) == serialize_sequence(b[i]));
  spec.seed = 2;
  CHECK(serialize_sequence(generate(spec)[0]) != serialize_sequence(a[0]));

  std::map<int, int> per_label;
  for (const auto& s : a) {
    ++per_label[s.label];
    CHECK(s.length() >= static_cast<std::size_t>(spec.min_frames));
    CHECK(s.length() <= static_cast<std::size_t>(spec.max_frames));
    CHECK(s.subject >= 1);
    CHECK(s.subject <= spec.subjects);
    CHECK_NOTHROW(validate_roles(s, synth_roles(spec.joints)));
  }
  for (const auto& [label, n] : per_label) CHECK(n == 10);
}

TEST_CASE("generated skeletons normalize without degenerate frames") {
  SynthSpec spec;
  spec.noise = 0.05;
  for (const auto& s : generate(spec)) {
    CHECK_NOTHROW(normalize_sequence(s, synth_roles(spec.joints), NormalizationMode::FirstFrame, 40));
  }
}

TEST_CASE("within a class only the phase differs; between classes the motion differs") {
  SynthSpec spec;
  spec.noise = 0.0;
  spec.evidence = EvidenceWindow::Full;
  const int T = 60;
  for (int a = 0; a < spec.classes; ++a) {
    for (int b = 0; b < spec.classes; ++b) {
      // smallest trajectory distance of class b to class a over a grid of phases
      double closest = 1e9;
      for (int k = 0; k < 64; ++k) {
        const double phase = 2.0 * std::numbers::pi * k / 64.0;
        double worst = 0.0;
        for (int t = 0; t < T; ++t) {
          worst = std::max(worst, frame_distance(synth_pose(spec, a, 0.0, 0.0, t, T), synth_pose(spec, b, phase, 0.0, t, T)));
        }
        closest = std::min(closest, worst);
      }
      if (a == b) {
        CHECK(closest < 1e-12);
      } else {
        CHECK(closest > 0.05);
      }
    }
  }
}

TEST_CASE("early evidence: frames after the window are class independent") {
  SynthSpec spec;
  spec.evidence = EvidenceWindow::Early;
  spec.evidence_fraction = 0.2;
  const int T = 100;
  CHECK(evidence_range(spec, T) == std::pair<int, int>{0, 20});
  for (int t = 0; t < T; ++t) {
    double spread = 0.0;
    for (int c = 1; c < spec.classes; ++c) {
      spread = std::max(spread, frame_distance(synth_pose(spec, 0, 0.3, 1.1, t, T), synth_pose(spec, c, 0.3, 1.1, t, T)));
    }
    if (t >= 20) {
      CHECK(spread == 0.0);
    } else {
      CHECK(spread > 0.0);
    }
  }
  spec.evidence = EvidenceWindow::Late;
  CHECK(evidence_range(spec, T) == std::pair<int, int>{80, 100});
}

TEST_CASE("descriptors plant the class signal in one region") {
  SynthSpec spec;
  spec.region_nuisance = 0.0;
  spec.region_frame_noise = 0.0;
  const auto samples = generate(spec);
  const auto d = generate_descriptors(spec, samples, 3, 7);
  CHECK(d.size() == samples.size() * 5 * static_cast<std::size_t>(spec.descriptor_frames));
  std::map<std::string, int> label;
  for (const auto& s : samples) label[s.id] = s.label;
  // Without noise, the planted region is a pure function of the label and the others are zero.
  std::map<int, Eigen::VectorXd> mean_of;
  for (const auto& x : d) {
    if (x.region != 3) {
      CHECK(x.values.isZero());
      continue;
    }
    const int y = label.at(x.sample);
    if (!mean_of.count(y)) mean_of[y] = x.values;
    CHECK(x.values == mean_of[y]);
  }
  CHECK(mean_of.size() == static_cast<std::size_t>(spec.classes));
  CHECK((mean_of[0] - mean_of[1]).norm() > 0.0);
  CHECK_THROWS_AS(generate_descriptors(spec, samples, 6, 1), ConfigError);
}

TEST_CASE("spec validation and JSON round trip") {
  SynthSpec spec;
  spec.classes = 6;
  spec.evidence = EvidenceWindow::Late;
  spec.noise = 0.125;
  const SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
  CHECK(back.classes == 6);
  CHECK(back.evidence == EvidenceWindow::Late);
  CHECK(back.noise == 0.125);
  CHECK(synth_spec_to_json(back) == synth_spec_to_json(spec));
  CHECK_THROWS_AS(synth_spec_from_json(R"({"colour": 1})"), ConfigError);

  SynthSpec bad;
  bad.classes = 1;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = SynthSpec{};
  bad.min_frames = 1;
  CHECK_THROWS_AS(bad.check(), ConfigError);
  bad = SynthSpec{};
  bad.noise = -1.0;
  CHECK_THROWS_AS(bad.check(), ConfigError);
}

TEST_CASE("complementary score streams") {
  const ComplementaryScores c = complementary_scores(40, 4, 1);
  REQUIRE(c.ids.size() == 40);
  int a_correct = 0, b_correct = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    a_correct += argmax(c.a[i].values) == c.labels[i];
    b_correct += argmax(c.b[i].values) == c.labels[i];
    CHECK(c.a[i].producer != c.b[i].producer);
  }
  CHECK(a_correct == 20);
  CHECK(b_correct == 20);
}
