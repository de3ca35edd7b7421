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

#include "voxprotect/linmodels.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "test_support.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

using testing::ForAll;
using testing::Gen;

// Two Gaussian blobs in d dimensions, means +/- shift on every axis.
void Blobs(Gen& g, std::size_t n, std::size_t d, double shift, FeatureMatrix* x,
           std::vector<int>* y) {
  x->clear();
  y->clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    std::vector<double> row(d);
    for (double& v : row) v = g.Normal(label * shift, 1.0);
    x->push_back(row);
    y->push_back(label);
  }
}

double TrainAccuracy(const LinearModel& m, const FeatureMatrix& x, const std::vector<int>& y) {
  int hits = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int sign = Predict(m, x[i]).label == Gender::kFemale ? 1 : -1;
    hits += sign == y[i];
  }
  return static_cast<double>(hits) / static_cast<double>(x.size());
}

// Best accuracy of a single threshold (either direction) on one column.
double ThresholdAccuracy(const FeatureMatrix& x, const std::vector<int>& y, int col) {
  std::vector<double> cuts;
  for (const auto& row : x) cuts.push_back(row[col]);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(cuts.back() + 1.0);
  double best = 0.0;
  for (double cut : cuts) {
    int above = 0;
    for (std::size_t i = 0; i < x.size(); ++i) above += (x[i][col] >= cut) == (y[i] > 0);
    const double acc = static_cast<double>(above) / static_cast<double>(x.size());
    best = std::max({best, acc, 1.0 - acc});
  }
  return best;
}

TEST(Standardizer, TwoValueColumn) {
  const Standardizer s = Standardizer::Fit({{1.0}, {3.0}});
  EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.std[0], 1.0);
  EXPECT_DOUBLE_EQ(s.Apply(std::vector<double>{1.0})[0], -1.0);
  EXPECT_DOUBLE_EQ(s.Apply(std::vector<double>{3.0})[0], 1.0);
}

TEST(Standardizer, ConstantColumnFrozenToZero) {
  const Standardizer s = Standardizer::Fit({{5.0, 1.0}, {5.0, 2.0}, {5.0, 4.0}});
  EXPECT_TRUE(s.frozen[0]);
  EXPECT_FALSE(s.frozen[1]);
  EXPECT_DOUBLE_EQ(s.std[0], 1.0);
  for (const auto& row : s.Apply(FeatureMatrix{{5.0, 0.0}, {9.0, 3.0}})) {
    EXPECT_EQ(row[0], 0.0);
  }
}

TEST(Standardizer, PropertyZeroMeanUnitStd) {
  ForAll(20, 300, [](Gen& g) {
    const std::size_t n = g.Size(2, 40), d = g.Size(1, 6);
    FeatureMatrix x(n, std::vector<double>(d));
    for (auto& row : x) {
      for (std::size_t j = 0; j < d; ++j) row[j] = g.Normal(g.Uniform(-1e3, 1e3), 1.0 + j);
    }
    const FeatureMatrix z = Standardizer::Fit(x).Apply(x);
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0.0, v = 0.0;
      for (const auto& row : z) m += row[j] / static_cast<double>(n);
      for (const auto& row : z) v += (row[j] - m) * (row[j] - m) / static_cast<double>(n);
      EXPECT_NEAR(m, 0.0, 1e-9);
      EXPECT_NEAR(std::sqrt(v), 1.0, 1e-9);
    }
  });
}

TEST(Standardizer, HeldOutUsesTrainStatistics) {
  const Standardizer s = Standardizer::Fit({{0.0}, {2.0}});
  EXPECT_DOUBLE_EQ(s.Apply(std::vector<double>{10.0})[0], 9.0);
}

TEST(Standardizer, Errors) {
  EXPECT_THROW(Standardizer::Fit({}), DataError);
  EXPECT_THROW(Standardizer::Fit({{1.0}}), DataError);
  EXPECT_THROW(Standardizer::Fit({{1.0, 2.0}, {1.0}}), ShapeError);
  const Standardizer s = Standardizer::Fit({{1.0}, {2.0}});
  EXPECT_THROW(s.Apply(std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST(LinearSvm, SeparableBlobsFitPerfectly) {
  Gen g(5);
  FeatureMatrix x;
  std::vector<int> y;
  Blobs(g, 60, 2, 4.0, &x, &y);
  const LinearModel m = TrainLinearSvm(x, y, SvmOptions{});
  EXPECT_EQ(TrainAccuracy(m, x, y), 1.0);
  EXPECT_EQ(m.weights.size(), m.feature_subset.size());
}

TEST(LinearSvm, XorIsHalfRight) {
  const FeatureMatrix x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y = {1, 1, -1, -1};
  EXPECT_EQ(TrainAccuracy(TrainLinearSvm(x, y, SvmOptions{}), x, y), 0.5);
}

TEST(LinearSvm, RejectsBadInput) {
  const FeatureMatrix x = {{0.0}, {1.0}};
  EXPECT_THROW(TrainLinearSvm(x, {1, 1}, SvmOptions{}), DataError);
  EXPECT_THROW(TrainLinearSvm(x, {1, 0}, SvmOptions{}), DataError);
  EXPECT_THROW(TrainLinearSvm(x, {1}, SvmOptions{}), DataError);
  EXPECT_THROW(TrainLinearSvm({}, {}, SvmOptions{}), DataError);
  SvmOptions bad;
  bad.c = 0.0;
  EXPECT_THROW(TrainLinearSvm(x, {1, -1}, bad), ConfigError);
  EXPECT_THROW(TrainLinearSvm(x, {1, -1}, SvmOptions{}, {3}), DataError);
}

TEST(LinearSvm, SameSeedSameModel) {
  Gen g(8);
  FeatureMatrix x;
  std::vector<int> y;
  Blobs(g, 50, 4, 0.5, &x, &y);
  SvmOptions opt;
  opt.seed = 17;
  const LinearModel a = TrainLinearSvm(x, y, opt), b = TrainLinearSvm(x, y, opt);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.model_id, b.model_id);
}

// Coarse-to-fine grid over (w1, w2, b) of the convex primal objective.
double GridMinimum(const FeatureMatrix& xs, const std::vector<int>& y, double c) {
  const double radius = std::sqrt(2.0 * c * static_cast<double>(xs.size())) + 0.1;
  double centre[3] = {0.0, 0.0, 0.0};
  double half = radius;
  double best = std::numeric_limits<double>::infinity();
  constexpr int kSteps = 60;
  for (int level = 0; level < 9; ++level) {
    const double step = 2.0 * half / kSteps;
    double arg[3] = {centre[0], centre[1], centre[2]};
    for (int i = 0; i <= kSteps; ++i) {
      for (int j = 0; j <= kSteps; ++j) {
        for (int k = 0; k <= kSteps; ++k) {
          const double w[2] = {centre[0] - half + i * step, centre[1] - half + j * step};
          const double b = centre[2] - half + k * step;
          const double f = SvmPrimalObjective(xs, y, w, b, c);
          if (f < best) {
            best = f;
            arg[0] = w[0];
            arg[1] = w[1];
            arg[2] = b;
          }
        }
      }
    }
    std::copy(arg, arg + 3, centre);
    half = 4.0 * step;
  }
  return best;
}

TEST(LinearSvm, PropertyMatchesGridSearchOptimumOnTinyInstances) {
  ForAll(8, 700, [](Gen& g) {
    const std::size_t n = g.Size(3, 5);
    FeatureMatrix x(n, std::vector<double>(2));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i == 0 ? 1 : (i == 1 ? -1 : (g.Coin() ? 1 : -1));
      x[i] = {g.Normal(0.7 * y[i], 1.0), g.Normal(0.0, 2.0)};
    }
    SvmOptions opt;
    opt.c = g.Uniform(0.1, 3.0);
    const LinearModel m = TrainLinearSvm(x, y, opt);
    const FeatureMatrix xs = m.standardizer.Apply(x);
    const double trained = SvmPrimalObjective(xs, y, m.weights, m.bias, opt.c);
    const double oracle = GridMinimum(xs, y, opt.c);
    EXPECT_LE(trained, oracle + 1e-4);
    EXPECT_LE(oracle, trained + 1e-4) << "gap " << oracle - trained;
  });
}

TEST(LinearSvm, PropertyColumnScalingKeepsTrainLabels) {
  ForAll(10, 900, [](Gen& g) {
    FeatureMatrix x;
    std::vector<int> y;
    Blobs(g, 40, 3, 0.6, &x, &y);
    FeatureMatrix scaled = x;
    const std::size_t col = g.Size(0, 2);
    const double factor = std::exp(g.Uniform(-5.0, 5.0));
    for (auto& row : scaled) row[col] *= factor;
    const LinearModel a = TrainLinearSvm(x, y, SvmOptions{});
    const LinearModel b = TrainLinearSvm(scaled, y, SvmOptions{});
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(Predict(a, x[i]).label, Predict(b, scaled[i]).label) << "row " << i;
    }
  });
}

LinearModel PitchOnlyModel() {
  LinearModel m;
  m.weights = {1.0};
  m.feature_subset = {static_cast<int>(Slot::kPitchMean)};
  m.standardizer.mean = {150.0};
  m.standardizer.std = {10.0};
  m.standardizer.frozen = {false};
  return m;
}

TEST(Predict, ScoreIsAffineInStandardizedSubset) {
  FeatureVector v;
  v[Slot::kPitchMean] = 173.0;  // standardized 2.3
  const Prediction p = Predict(PitchOnlyModel(), v);
  EXPECT_NEAR(p.score, 2.3, 1e-12);
  EXPECT_EQ(p.label, Gender::kFemale);
  v[Slot::kPitchMean] = 140.0;
  EXPECT_EQ(Predict(PitchOnlyModel(), v).label, Gender::kMale);
}

TEST(Predict, ZeroScoreIsFemale) {
  FeatureVector v;
  v[Slot::kPitchMean] = 150.0;
  const Prediction p = Predict(PitchOnlyModel(), v);
  EXPECT_EQ(p.score, 0.0);
  EXPECT_EQ(p.label, Gender::kFemale);
}

TEST(Predict, MissingColumnIsDataError) {
  LinearModel m = PitchOnlyModel();
  m.feature_subset = {7};
  EXPECT_THROW(Predict(m, std::vector<double>{1.0, 2.0}), DataError);
}

// Ten columns, only column 3 informative.
void OneInformative(Gen& g, FeatureMatrix* x, std::vector<int>* y) {
  x->assign(60, std::vector<double>(10));
  y->resize(60);
  for (std::size_t i = 0; i < 60; ++i) {
    (*y)[i] = i % 2 == 0 ? 1 : -1;
    for (int j = 0; j < 10; ++j) (*x)[i][j] = g.Normal();
    (*x)[i][3] += 1.5 * (*y)[i];
  }
}

TEST(SvmRfe, RecoversTheInformativeColumn) {
  int rfe_hits = 0, oracle_hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Gen g(5000 + trial);
    FeatureMatrix x;
    std::vector<int> y;
    OneInformative(g, &x, &y);
    SvmOptions opt;
    opt.seed = trial;
    const RfeRanking r = SvmRfe(x, y, 1, opt);
    rfe_hits += r.top_n == std::vector<int>{3};
    int best = 0;
    for (int j = 1; j < 10; ++j) {
      if (ThresholdAccuracy(x, y, j) > ThresholdAccuracy(x, y, best)) best = j;
    }
    oracle_hits += best == 3;
  }
  EXPECT_GE(oracle_hits, 95);
  EXPECT_GE(rfe_hits, 95);
}

TEST(SvmRfe, PropertyEliminationOrderIsPermutation) {
  ForAll(10, 1300, [](Gen& g) {
    FeatureMatrix x;
    std::vector<int> y;
    Blobs(g, 30, g.Size(2, 8), 0.4, &x, &y);
    const std::size_t d = x[0].size();
    const std::size_t n = g.Size(1, d);
    const RfeRanking r = SvmRfe(x, y, n, SvmOptions{});
    std::vector<int> sorted = r.elimination_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(sorted, all);
    EXPECT_EQ(r.num_eliminated, d - n);
    ASSERT_EQ(r.top_n.size(), n);
    // Survivors close the order, least important first.
    EXPECT_TRUE(std::equal(r.top_n.rbegin(), r.top_n.rend(),
                           r.elimination_order.begin() + static_cast<long>(d - n)));
  });
}

TEST(SvmRfe, FullSizeKeepsEverythingRankedByWeight) {
  Gen g(31);
  FeatureMatrix x;
  std::vector<int> y;
  Blobs(g, 40, 4, 0.5, &x, &y);
  for (auto& row : x) row[2] += 2.0 * (row[0] > 0 ? 1 : 0);
  const RfeRanking r = SvmRfe(x, y, 4, SvmOptions{});
  EXPECT_EQ(r.num_eliminated, 0u);
  const LinearModel m = TrainLinearSvm(x, y, SvmOptions{});
  std::vector<int> by_weight = {0, 1, 2, 3};
  std::stable_sort(by_weight.begin(), by_weight.end(), [&](int a, int b) {
    return std::abs(m.weights[a]) > std::abs(m.weights[b]);
  });
  EXPECT_EQ(r.top_n, by_weight);
}

TEST(SvmRfe, DuplicatedColumnsKeepOneCopy) {
  Gen g(77);
  FeatureMatrix x(80, std::vector<double>(6));
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    y[i] = i % 2 == 0 ? 1 : -1;
    for (double& v : x[i]) v = g.Normal();
    x[i][1] += 2.0 * y[i];
    x[i][2] = x[i][1];
    x[i][4] += 1.2 * y[i];
  }
  const RfeRanking r = SvmRfe(x, y, 2, SvmOptions{});
  std::set<int> kept(r.top_n.begin(), r.top_n.end());
  EXPECT_EQ(kept.count(1) + kept.count(2), 1u);
  EXPECT_EQ(kept.count(4), 1u);
  // Equal weights: the lower index goes first.
  EXPECT_EQ(kept.count(2), 1u);
}

TEST(SvmRfe, DeterministicAndValidated) {
  Gen g(4);
  FeatureMatrix x;
  std::vector<int> y;
  OneInformative(g, &x, &y);
  const RfeRanking a = SvmRfe(x, y, 3, SvmOptions{});
  const RfeRanking b = SvmRfe(x, y, 3, SvmOptions{});
  EXPECT_EQ(a.elimination_order, b.elimination_order);
  EXPECT_EQ(a.top_n, b.top_n);
  EXPECT_THROW(SvmRfe(x, y, 0, SvmOptions{}), ConfigError);
  EXPECT_THROW(SvmRfe(x, y, 11, SvmOptions{}), ConfigError);
  const RfeRanking sub = SvmRfe(x, y, 1, SvmOptions{}, {0, 3, 5});
  EXPECT_EQ(sub.top_n, std::vector<int>{3});
  EXPECT_EQ(sub.elimination_order.size(), 3u);
}

TEST(Ridge, ClosedFormOnStandardizedColumn) {
  const FeatureMatrix x = {{0.0, 1.0}, {0.0, 2.0}, {0.0, 4.0}, {0.0, 7.0}};
  const std::vector<int> y = {-1, -1, 1, 1};
  const double lambda = 0.5;
  const LinearModel m = TrainRidgeSingle(x, y, 1, lambda);
  // Independent computation.
  const double mean = 3.5;
  double var = 0.0;
  for (const auto& r : x) var += (r[1] - mean) * (r[1] - mean) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double z = (x[i][1] - mean) / std::sqrt(var);
    sxy += z * y[i];
    sxx += z * z;
  }
  ASSERT_EQ(m.weights.size(), 1u);
  EXPECT_NEAR(m.weights[0], sxy / (sxx + lambda), 1e-12);
  EXPECT_NEAR(m.bias, 0.0, 1e-15);
  EXPECT_EQ(m.feature_subset, std::vector<int>{1});
  EXPECT_EQ(m.kind, ModelKind::kRidge);
  EXPECT_EQ(m.model_id.rfind("ridge-", 0), 0u);
}

TEST(Ridge, UnpenalizedBoundaryAtMidpoint) {
  const FeatureMatrix x = {{1.0}, {2.0}, {3.0}, {7.0}, {8.0}, {9.0}};
  const std::vector<int> y = {-1, -1, -1, 1, 1, 1};
  const LinearModel m = TrainRidgeSingle(x, y, 0, 0.0);
  EXPECT_EQ(Predict(m, std::vector<double>{4.99}).label, Gender::kMale);
  EXPECT_EQ(Predict(m, std::vector<double>{5.01}).label, Gender::kFemale);
}

TEST(Ridge, HugePenaltyFollowsClassBalance) {
  const FeatureMatrix x = {{1.0}, {2.0}, {3.0}, {9.0}};
  const LinearModel f = TrainRidgeSingle(x, {1, 1, 1, -1}, 0, 1e12);
  const LinearModel m = TrainRidgeSingle(x, {-1, -1, -1, 1}, 0, 1e12);
  for (double v : {-100.0, 0.0, 5.0, 100.0}) {
    EXPECT_EQ(Predict(f, std::vector<double>{v}).label, Gender::kFemale);
    EXPECT_EQ(Predict(m, std::vector<double>{v}).label, Gender::kMale);
  }
}

TEST(Ridge, Errors) {
  EXPECT_THROW(TrainRidgeSingle({{1.0}, {1.0}}, {1, -1}, 0, 0.0), DataError);
  EXPECT_THROW(TrainRidgeSingle({{1.0}, {2.0}}, {1, -1}, 0, -1.0), ConfigError);
  EXPECT_THROW(TrainRidgeSingle({{1.0}, {2.0}}, {1, -1}, 4, 0.0), DataError);
}

TEST(Labels, GenderMappingAndUnlabeled) {
  std::vector<Waveform> corpus(2);
  corpus[0].gender = Gender::kFemale;
  corpus[1].gender = Gender::kMale;
  EXPECT_EQ(GenderLabels(corpus), (std::vector<int>{1, -1}));
  corpus[1].gender.reset();
  EXPECT_THROW(GenderLabels(corpus), DataError);
}

TEST(Serialization, PropertyBitExactRoundTrip) {
  ForAll(10, 1600, [](Gen& g) {
    FeatureMatrix x;
    std::vector<int> y;
    Blobs(g, 20, g.Size(1, 5), 0.7, &x, &y);
    for (auto& row : x) row[0] *= std::exp(g.Uniform(-20.0, 20.0));
    LinearModel m = g.Coin() ? TrainLinearSvm(x, y, SvmOptions{})
                             : TrainRidgeSingle(x, y, 0, g.Uniform(0.0, 3.0));
    const std::string text = SerializeModel(m);
    const LinearModel back = DeserializeModel(text);
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_EQ(back.standardizer.mean, m.standardizer.mean);
    EXPECT_EQ(back.standardizer.std, m.standardizer.std);
    EXPECT_EQ(back.standardizer.frozen, m.standardizer.frozen);
    EXPECT_EQ(back.feature_subset, m.feature_subset);
    EXPECT_EQ(back.kind, m.kind);
    EXPECT_EQ(back.model_id, m.model_id);
    EXPECT_EQ(SerializeModel(back), text);
  });
}

TEST(Serialization, IdTracksDecisionFunction) {
  LinearModel m = PitchOnlyModel();
  const std::string id = LinearModelId(m);
  EXPECT_EQ(id.rfind("svm-", 0), 0u);
  EXPECT_EQ(id.size(), 4u + 16u);
  m.epochs = 99;
  EXPECT_EQ(LinearModelId(m), id);
  m.weights[0] = 1.0000001;
  EXPECT_NE(LinearModelId(m), id);
}

TEST(Serialization, FileRoundTripAndMalformedInput) {
  const auto dir = testing::ScratchDir("linmodels");
  const std::string path = (dir / "m.json").string();
  LinearModel m = PitchOnlyModel();
  m.model_id = LinearModelId(m);
  SaveModel(path, m);
  EXPECT_EQ(LoadModel(path).weights, m.weights);
  EXPECT_THROW(LoadModel((dir / "missing.json").string()), DataError);
  EXPECT_THROW(DeserializeModel("{not json"), DataError);
  EXPECT_THROW(DeserializeModel("{\"format\": \"something else\"}"), DataError);
  std::string text = SerializeModel(m);
  text.replace(text.find("\"weights\""), 9, "\"weightz\"");
  EXPECT_THROW(DeserializeModel(text), DataError);
}

}  // namespace
}  // namespace voxprotect
