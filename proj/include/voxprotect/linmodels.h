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

// Linear classifiers over feature vectors: a standardizer, a soft-margin
// linear SVM (dual coordinate descent), SVM-RFE feature ranking and a
// single-feature ridge classifier. Labels use F = +1, M = -1 throughout.

#ifndef VOXPROTECT_LINMODELS_H_
#define VOXPROTECT_LINMODELS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxprotect/audio_io.h"
#include "voxprotect/features.h"

namespace voxprotect {

// Row-major feature matrix: one row per utterance.
using FeatureMatrix = std::vector<std::vector<double>>;

FeatureMatrix ToMatrix(const std::vector<FeatureVector>& rows);
// +1 for F, -1 for M; throws DataError for unlabeled rows.
std::vector<int> GenderLabels(const std::vector<Waveform>& corpus);
std::vector<int> GenderLabels(const std::vector<FeatureRow>& rows);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;  // population std; 1 for frozen columns
  std::vector<bool> frozen;  // zero-variance columns, always mapped to 0

  static Standardizer Fit(const FeatureMatrix& x);
  std::vector<double> Apply(std::span<const double> row) const;
  FeatureMatrix Apply(const FeatureMatrix& x) const;
  std::size_t size() const { return mean.size(); }
};

enum class ModelKind { kSvmHinge, kRidge };

struct LinearModel {
  ModelKind kind = ModelKind::kSvmHinge;
  std::vector<double> weights;
  double bias = 0.0;
  // Statistics over the subset columns, in subset order.
  Standardizer standardizer;
  // Column indices into the full feature row (registry slots for features).
  std::vector<int> feature_subset;
  double c = 1.0;       // SVM soft-margin constant
  double lambda = 0.0;  // ridge penalty
  std::uint64_t seed = 0;
  std::string model_id;
  // Solver bookkeeping (informational, not part of the decision function).
  int epochs = 0;
  double duality_gap = 0.0;
};

struct SvmOptions {
  double c = 1.0;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;  // relative duality gap
  int max_epochs = 10000;
};

// Trains on the columns listed in subset (all columns when empty). The bias is
// an extra constant input, so it is regularized together with w.
LinearModel TrainLinearSvm(const FeatureMatrix& x, const std::vector<int>& y,
                           const SvmOptions& opt, std::vector<int> subset = {});

// 0.5 * (|w|^2 + b^2) + C * sum hinge, on already standardized rows.
double SvmPrimalObjective(const FeatureMatrix& xs, const std::vector<int>& y,
                          std::span<const double> w, double b, double c);

struct Prediction {
  Gender label = Gender::kFemale;
  double score = 0.0;
};

// score >= 0 -> F (a score of exactly 0 is a tie resolved towards F).
Prediction Predict(const LinearModel& m, std::span<const double> row);
Prediction Predict(const LinearModel& m, const FeatureVector& v);

struct RfeRanking {
  // A permutation of the candidate columns from least to most important:
  // the eliminated columns in removal order, then top_n reversed.
  std::vector<int> elimination_order;
  std::size_t num_eliminated = 0;
  // Survivors ordered by |w| of the final model, descending.
  std::vector<int> top_n;
};

// Recursive elimination of the column with the smallest w^2; ties remove
// the lowest column index. The SVMs trained here are discarded.
RfeRanking SvmRfe(const FeatureMatrix& x, const std::vector<int>& y, std::size_t n,
                  const SvmOptions& opt, std::vector<int> candidates = {});

// Closed-form ridge on one standardized column: w = sum(xy) / (sum(x^2) +
// lambda), b = mean(y).
LinearModel TrainRidgeSingle(const FeatureMatrix& x, const std::vector<int>& y,
                             int column, double lambda);

// Content hash of the decision function and its provenance ("svm-" or
// "ridge-" + 16 hex digits); training assigns it as the default model_id.
std::string LinearModelId(const LinearModel& m);

std::string ModelKindName(ModelKind k);

// Versioned JSON. Doubles are written in shortest round-trip form.
std::string SerializeModel(const LinearModel& m);
LinearModel DeserializeModel(const std::string& text);
void SaveModel(const std::string& path, const LinearModel& m);
LinearModel LoadModel(const std::string& path);

}  // namespace voxprotect

#endif  // VOXPROTECT_LINMODELS_H_
