// Copyright 2026 The voxprotect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voxprotect/eval.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <set>

#include "test_support.h"
#include "voxprotect/error.h"
#include "voxprotect/synth.h"

namespace voxprotect {
namespace {

using testing::ForAll;
using testing::Gen;

class ConstantClassifier : public GenderClassifier {
 public:
  explicit ConstantClassifier(Gender g, std::string id = "const") : g_(g), id_(std::move(id)) {}
  std::string Id() const override { return id_; }
  std::vector<Gender> PredictBatch(const std::vector<Waveform>& corpus) const override {
    return std::vector<Gender>(corpus.size(), g_);
  }

 private:
  Gender g_;
  std::string id_;
};

// Reads the label back and records the lengths it was shown.
class OracleClassifier : public GenderClassifier {
 public:
  std::string Id() const override { return "oracle"; }
  std::vector<Gender> PredictBatch(const std::vector<Waveform>& corpus) const override {
    std::vector<Gender> out;
    for (const Waveform& w : corpus) {
      lengths.push_back(w.samples.size());
      out.push_back(*w.gender);
    }
    return out;
  }
  mutable std::vector<std::size_t> lengths;
};

class FailingClassifier : public GenderClassifier {
 public:
  std::string Id() const override { return "broken"; }
  std::vector<Gender> PredictBatch(const std::vector<Waveform>&) const override {
    throw NumericError("model exploded");
  }
};

std::vector<Waveform> Balanced(Gen& g, int per_gender, std::size_t len) {
  std::vector<Waveform> out;
  for (int i = 0; i < 2 * per_gender; ++i) {
    Waveform w = g.Wave(len);
    w.gender = i < per_gender ? Gender::kFemale : Gender::kMale;
    w.source_id = "u" + std::to_string(i);
    out.push_back(std::move(w));
  }
  return out;
}

TEST(Accuracy, PerfectAndConstantClassifiers) {
  Gen g(1);
  const auto corpus = Balanced(g, 5, 100);
  OracleClassifier oracle;
  const EvalReport perfect = AccuracyByGender(oracle, corpus);
  EXPECT_EQ(perfect.Cell(), "100.0 (100.0/100.0)");
  EXPECT_EQ(perfect.model_id, "oracle");
  EXPECT_EQ(perfect.corpus_id, CorpusId(corpus));
  // First six seconds: short inputs are padded, long ones cut.
  for (std::size_t n : oracle.lengths) EXPECT_EQ(n, 96000u);

  const EvalReport f = AccuracyByGender(ConstantClassifier(Gender::kFemale), corpus);
  EXPECT_EQ(f.Cell(), "50.0 (100.0/0.0)");
  EXPECT_EQ(f.n_f, 5);
  EXPECT_EQ(f.correct_m, 0);
}

TEST(Accuracy, EmptyGenderAndUnlabeledRows) {
  Gen g(2);
  auto corpus = Balanced(g, 2, 50);
  corpus.resize(2);  // females only
  EXPECT_EQ(AccuracyByGender(ConstantClassifier(Gender::kMale), corpus).Cell(), "0.0 (0.0/n/a)");
  corpus[1].gender.reset();
  EXPECT_THROW(AccuracyByGender(ConstantClassifier(Gender::kMale), corpus), DataError);
}

TEST(Accuracy, PropertyPoolingIdentity) {
  ForAll(50, 100, [](Gen& g) {
    const std::size_t n = g.Size(1, 60);
    std::vector<Gender> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = g.Coin() ? Gender::kFemale : Gender::kMale;
      pred[i] = g.Coin() ? Gender::kFemale : Gender::kMale;
    }
    const EvalReport r = ReportFromPredictions(truth, pred);
    EXPECT_EQ(r.n_f + r.n_m, static_cast<int>(n));
    const double f = r.n_f ? r.n_f * r.accuracy_f : 0.0;
    const double m = r.n_m ? r.n_m * r.accuracy_m : 0.0;
    EXPECT_NEAR(r.accuracy_all, (f + m) / static_cast<double>(n), 1e-9);
    EXPECT_NEAR(r.accuracy_all, 100.0 * (r.correct_f + r.correct_m) / static_cast<double>(n),
                1e-9);
  });
}

TEST(Format, Percentages) {
  EXPECT_EQ(FormatPercent(12.345), "12.3");
  EXPECT_EQ(FormatPercent(100.0), "100.0");
  EXPECT_EQ(FormatPercent(std::numeric_limits<double>::quiet_NaN()), "n/a");
  EXPECT_EQ(FormatPercent(std::numeric_limits<double>::infinity()), "inf");
}

TEST(CorpusId, ContentAndOrderSensitive) {
  Gen g(3);
  auto corpus = Balanced(g, 2, 64);
  const std::string id = CorpusId(corpus);
  EXPECT_EQ(id.rfind("corpus-", 0), 0u);
  EXPECT_EQ(CorpusId(corpus), id);
  auto swapped = corpus;
  std::swap(swapped[0], swapped[1]);
  EXPECT_NE(CorpusId(swapped), id);
  corpus[3].samples[10] += 1e-12;
  EXPECT_NE(CorpusId(corpus), id);
}

TEST(SegmentalSnr, SineWithConstantOffset) {
  // 500 Hz divides each 512-sample segment into whole periods.
  const double a = 0.4, d = 0.1;
  std::vector<double> x(512 * 20), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 0.5 + a * std::sin(2.0 * std::numbers::pi * 500.0 * static_cast<double>(i) / 16000.0);
    y[i] = x[i] + d;
  }
  EXPECT_NEAR(SegmentalSnrDb(x, y), 10.0 * std::log10((a * a / 2.0) / (d * d)), 1e-9);
  EXPECT_EQ(SegmentalSnrDb(x, x), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + 1e-7;
  EXPECT_DOUBLE_EQ(SegmentalSnrDb(x, y), kSegmentalSnrCeilingDb);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + 5.0;
  EXPECT_DOUBLE_EQ(SegmentalSnrDb(x, y), kSegmentalSnrFloorDb);
  EXPECT_THROW(SegmentalSnrDb(x, std::vector<double>(3)), ShapeError);
}

std::vector<Waveform> Voices(int per_gender, double seconds, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_per_gender = per_gender;
  spec.duration_s = seconds;
  spec.seed = seed;
  return MakeCorpus(spec).waves;
}

TEST(Utility, IdenticalCorporaAreDriftFree) {
  const auto corpus = Voices(1, 0.5, 4);
  FeatureCache cache;
  const std::vector<double> ones(kNumFeatures, 1.0);
  const UtilityReport r = ComputeUtility(corpus, corpus, ones, cache);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.delta_linf, 0.0);
    EXPECT_EQ(row.delta_l2, 0.0);
    EXPECT_EQ(row.segmental_snr_db, std::numeric_limits<double>::infinity());
    ASSERT_EQ(row.drift.size(), static_cast<std::size_t>(kNumFeatures));
    for (double v : row.drift) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(r.mean_segmental_snr_db, std::numeric_limits<double>::infinity());
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Utility, ConstantShiftNormsAndIdMatching) {
  auto corpus = Voices(1, 0.5, 5);
  for (Waveform& w : corpus) {
    for (double& v : w.samples) v *= 0.8;
  }
  std::vector<Waveform> shifted = corpus;
  std::reverse(shifted.begin(), shifted.end());  // pairing is by id
  for (Waveform& w : shifted) {
    w.samples.resize(w.samples.size() - 100);  // original gets cut to match
    for (double& v : w.samples) v += 0.1;
  }
  FeatureCache cache;
  const std::vector<double> ones(kNumFeatures, 1.0);
  const UtilityReport r = ComputeUtility(corpus, shifted, ones, cache);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.delta_linf, 0.1, 1e-12);
    EXPECT_NEAR(row.delta_l2, 0.1 * std::sqrt(7900.0), 1e-9);
    EXPECT_TRUE(std::isfinite(row.segmental_snr_db));
  }
  EXPECT_NEAR(r.max_delta_linf, 0.1, 1e-12);

  shifted[0].source_id = "stranger";
  try {
    ComputeUtility(corpus, shifted, ones, cache);
    FAIL() << "unmatched id accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("stranger"), std::string::npos);
  }
  EXPECT_THROW(ComputeUtility(corpus, corpus, std::vector<double>(3, 1.0), cache), DataError);
}

// Gender rides on pitch_mean and intensity_mean; the "attack" lifts the
// intensity slots by 6 dB and nothing else.
TEST(Intersection, IntensityOnlyShiftStaysInIntensitySlots) {
  Gen g(6);
  FeatureMatrix clean;
  std::vector<int> y;
  for (int i = 0; i < 80; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    std::vector<double> row(kNumFeatures);
    for (double& v : row) v = g.Normal();
    row[static_cast<int>(Slot::kPitchMean)] += 2.0 * label;
    row[static_cast<int>(Slot::kIntensityMean)] += 1.0 * label;
    clean.push_back(row);
    y.push_back(label);
  }
  const std::set<int> intensity = {static_cast<int>(Slot::kIntensityMin),
                                   static_cast<int>(Slot::kIntensityMax),
                                   static_cast<int>(Slot::kIntensityMean)};
  FeatureMatrix perturbed = clean;
  for (auto& row : perturbed) {
    for (int s : intensity) row[s] += 6.0;
  }
  const IntersectionReport r = RfeIntersection(clean, y, perturbed, 3, SvmOptions{});
  EXPECT_EQ(std::set<int>(r.top_perturb.begin(), r.top_perturb.end()), intensity);
  for (int f : r.intersection) EXPECT_TRUE(intensity.count(f)) << FeatureName(f);
  EXPECT_EQ(r.intersection, std::vector<int>{static_cast<int>(Slot::kIntensityMean)});
  EXPECT_TRUE(r.origin_separable);
  EXPECT_NE(FormatIntersection(r).find("intensity_mean"), std::string::npos);
}

TEST(Intersection, IdenticalCorporaFlagNonSeparableOrigin) {
  Gen g(7);
  FeatureMatrix clean(30, std::vector<double>(kNumFeatures));
  std::vector<int> y(30);
  for (int i = 0; i < 30; ++i) {
    y[i] = i % 2 ? 1 : -1;
    for (double& v : clean[i]) v = g.Normal(0.5 * y[i], 1.0);
  }
  const IntersectionReport r = RfeIntersection(clean, y, clean, 10, SvmOptions{});
  EXPECT_NEAR(r.origin_accuracy, 50.0, 1e-9);
  EXPECT_FALSE(r.origin_separable);
  EXPECT_EQ(r.top_gender.size(), 10u);
  // Each listed feature appears in both rankings.
  for (int f : r.intersection) {
    EXPECT_NE(std::find(r.top_perturb.begin(), r.top_perturb.end(), f), r.top_perturb.end());
  }
}

struct TinyNets {
  std::shared_ptr<M5<float>> a, b;
  std::unique_ptr<M5Differentiable<float>> ref_a, ref_b;
  std::unique_ptr<CnnClassifier> cnn_a, cnn_b;

  TinyNets() {
    a = std::make_shared<M5<float>>(testing::TinyConfig(), 1);
    b = std::make_shared<M5<float>>(testing::TinyConfig(), 2);
    for (auto* m : {a.get(), b.get()}) {
      m->SetMode(Mode::kEval);
      m->model_id = ContentId(*m);
    }
    ref_a = std::make_unique<M5Differentiable<float>>(a);
    ref_b = std::make_unique<M5Differentiable<float>>(b);
    cnn_a = std::make_unique<CnnClassifier>(a);
    cnn_b = std::make_unique<CnnClassifier>(b);
  }
};

PgdConfig QuickPgd() {
  PgdConfig c;
  c.segment_s = 0.05;
  c.iterations = 3;
  return c;
}

TEST(AttackMatrix, StructureWhiteBoxMarksAndErrors) {
  Gen g(8);
  const TinyNets nets;
  std::vector<Waveform> corpus = Balanced(g, 3, 800);
  const ConstantClassifier constant(Gender::kFemale);
  const FailingClassifier broken;
  const AttackMatrix m = BuildAttackMatrix(
      {nets.ref_a.get(), nets.ref_b.get()}, {nets.cnn_a.get(), &constant, &broken}, corpus,
      QuickPgd());
  ASSERT_EQ(m.row_ids.size(), 3u);
  EXPECT_EQ(m.row_ids[0], AttackMatrix::kOriginalRow);
  EXPECT_EQ(m.row_ids[1], nets.a->model_id);
  EXPECT_EQ(m.col_ids.size(), 3u);
  EXPECT_TRUE(m.At(nets.a->model_id, nets.a->model_id).white_box);
  EXPECT_FALSE(m.At(nets.b->model_id, nets.a->model_id).white_box);
  EXPECT_FALSE(m.At(AttackMatrix::kOriginalRow, nets.a->model_id).white_box);
  // Clean row equals a direct evaluation; a constant classifier ignores the attack.
  EXPECT_EQ(m.At(AttackMatrix::kOriginalRow, nets.a->model_id).report->Cell(),
            AccuracyByGender(*nets.cnn_a, corpus).Cell());
  for (const std::string& row : m.row_ids) {
    EXPECT_EQ(m.At(row, "const").report->Cell(), "50.0 (100.0/0.0)");
    EXPECT_FALSE(m.At(row, "broken").report.has_value());
    EXPECT_NE(m.At(row, "broken").error.find("exploded"), std::string::npos);
  }
  EXPECT_THROW(m.At("nope", "const"), DataError);
  const std::string text = FormatAttackMatrix(m);
  EXPECT_NE(text.find("Original"), std::string::npos);
  EXPECT_NE(AttackMatrixTsv(m).find('\t'), std::string::npos);
}

TEST(AttackMatrix, OriginalRowIndependentOfReferences) {
  Gen g(9);
  const TinyNets nets;
  const auto corpus = Balanced(g, 2, 800);
  const AttackMatrix one = BuildAttackMatrix({nets.ref_a.get()}, {nets.cnn_b.get()}, corpus,
                                             QuickPgd());
  const AttackMatrix two = BuildAttackMatrix({nets.ref_b.get(), nets.ref_a.get()},
                                             {nets.cnn_b.get()}, corpus, QuickPgd());
  EXPECT_EQ(one.cells[0][0].report->Cell(), two.cells[0][0].report->Cell());
  EXPECT_EQ(one.At(nets.a->model_id, nets.b->model_id).report->Cell(),
            two.At(nets.a->model_id, nets.b->model_id).report->Cell());
}

TEST(PerturbationCache, ComputesOnceAndPersists) {
  Gen g(10);
  const TinyNets nets;
  const auto corpus = Balanced(g, 2, 800);
  const auto dir = testing::ScratchDir("pcache");
  PerturbationCache cache(dir.string());
  const auto first = cache.Get(*nets.ref_a, corpus, QuickPgd());
  const auto again = cache.Get(*nets.ref_a, corpus, QuickPgd());
  EXPECT_EQ(cache.computed(), 1u);
  ASSERT_EQ(first.size(), 4u);
  EXPECT_EQ(first[0].samples, again[0].samples);
  EXPECT_TRUE(first[0].HasTag(kPerturbedTag));

  PerturbationCache reopened(dir.string());
  const auto loaded = reopened.Get(*nets.ref_a, corpus, QuickPgd());
  EXPECT_EQ(reopened.computed(), 0u);
  EXPECT_EQ(loaded[3].samples, first[3].samples);

  // Put stores a corpus attacked elsewhere under the same key.
  PgdConfig other = QuickPgd();
  other.iterations = 2;
  const PerturbedCorpus pc = PerturbCorpus(*nets.ref_b, corpus, other);
  reopened.Put(corpus, pc);
  const auto put = reopened.Get(*nets.ref_b, corpus, other);
  EXPECT_EQ(reopened.computed(), 0u);
  for (std::size_t k = 0; k < put[0].samples.size(); ++k) {
    ASSERT_NEAR(put[0].samples[k], pc.results[0].adversarial.samples[k], 1e-7);
  }
  EXPECT_NE(PerturbationCache::Key(nets.a->model_id, QuickPgd(), corpus),
            PerturbationCache::Key(nets.a->model_id, other, corpus));
  EXPECT_TRUE(std::filesystem::exists(
      dir / PerturbationCache::Key(nets.a->model_id, QuickPgd(), corpus) / "provenance.json"));
}

TEST(Adaptations, OneRowPerTagOneColumnPerModel) {
  Gen g(11);
  auto corpus = Balanced(g, 2, 100);
  auto happy = Balanced(g, 2, 100);
  for (Waveform& w : corpus) w.tags.insert("adaptation=default");
  for (Waveform& w : happy) w.tags.insert("adaptation=overlyhappy");
  corpus.insert(corpus.end(), happy.begin(), happy.end());
  Waveform stray = g.Wave(100);
  stray.gender = Gender::kMale;
  stray.source_id = "stray";
  corpus.push_back(stray);

  const OracleClassifier oracle;
  const ConstantClassifier female(Gender::kFemale);
  const AdaptationTable t = BuildAdaptationTable({&oracle, &female}, corpus);
  EXPECT_EQ(t.adaptations, (std::vector<std::string>{"default", "overlyhappy"}));
  EXPECT_EQ(t.model_ids, (std::vector<std::string>{"oracle", "const"}));
  ASSERT_EQ(t.cells.size(), 2u);
  EXPECT_EQ(t.cells[1][0].Cell(), "100.0 (100.0/100.0)");
  EXPECT_EQ(t.cells[1][1].Cell(), "50.0 (100.0/0.0)");
  ASSERT_EQ(t.warnings.size(), 1u);
  EXPECT_NE(t.warnings[0].find("stray"), std::string::npos);
  const std::string text = FormatAdaptationTable(t);
  EXPECT_NE(text.find("overlyhappy"), std::string::npos);
  EXPECT_NE(text.find("50.0 (100.0/0.0)"), std::string::npos);
}

TEST(FeatureClassifier, PitchRidgeSeparatesVoices) {
  const auto corpus = Voices(3, 0.5, 12);
  auto cache = std::make_shared<FeatureCache>();
  const FeatureMatrix x = ToMatrix(cache->GetAll(corpus));
  const LinearModel ridge =
      TrainRidgeSingle(x, GenderLabels(corpus), static_cast<int>(Slot::kPitchMean), 1.0);
  const FeatureClassifier clf(ridge, cache);
  EXPECT_EQ(clf.Id(), ridge.model_id);
  EXPECT_EQ(AccuracyByGender(clf, corpus, 0.5).Cell(), "100.0 (100.0/100.0)");
  EXPECT_EQ(cache->size(), 6u);
}

}  // namespace
}  // namespace voxprotect
