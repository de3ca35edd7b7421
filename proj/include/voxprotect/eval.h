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

// Evaluation artifacts: per-gender accuracy, attack matrices, RFE
// intersection, signal-level utility and the adaptation table. Every
// percentage is printed with one decimal in the "All (F/M)" style.

#ifndef VOXPROTECT_EVAL_H_
#define VOXPROTECT_EVAL_H_

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxprotect/attack.h"
#include "voxprotect/audio_io.h"
#include "voxprotect/features.h"
#include "voxprotect/linmodels.h"
#include "voxprotect/neuralnet.h"

namespace voxprotect {

// Content hash of a waveform's samples and rate.
std::uint64_t WaveformHash(const Waveform& w);
// "corpus-" + 16 hex digits over source ids and sample hashes, in order.
std::string CorpusId(const std::vector<Waveform>& corpus);

// Memoizes ExtractAll by waveform content. Not thread-safe.
class FeatureCache {
 public:
  explicit FeatureCache(PitchConfig cfg = {});
  const FeatureVector& Get(const Waveform& w);
  std::vector<FeatureVector> GetAll(const std::vector<Waveform>& corpus);
  const PitchConfig& config() const { return cfg_; }
  std::size_t size() const { return cache_.size(); }

 private:
  PitchConfig cfg_;
  std::map<std::uint64_t, FeatureVector> cache_;
};

class GenderClassifier {
 public:
  virtual ~GenderClassifier() = default;
  virtual std::string Id() const = 0;
  virtual std::vector<Gender> PredictBatch(const std::vector<Waveform>& corpus) const = 0;
};

// Argmax of the CNN logits (ties -> F).
class CnnClassifier : public GenderClassifier {
 public:
  explicit CnnClassifier(std::shared_ptr<const M5<float>> model, int batch_size = 8);
  std::string Id() const override { return model_->model_id; }
  std::vector<Gender> PredictBatch(const std::vector<Waveform>& corpus) const override;
  const M5<float>& model() const { return *model_; }

 private:
  std::shared_ptr<const M5<float>> model_;
  int batch_size_;
};

// Linear model over extracted features.
class FeatureClassifier : public GenderClassifier {
 public:
  FeatureClassifier(LinearModel model, std::shared_ptr<FeatureCache> cache);
  std::string Id() const override { return model_.model_id; }
  std::vector<Gender> PredictBatch(const std::vector<Waveform>& corpus) const override;
  const LinearModel& model() const { return model_; }

 private:
  LinearModel model_;
  std::shared_ptr<FeatureCache> cache_;
};

struct EvalReport {
  double accuracy_all = 0.0;  // percent
  double accuracy_f = 0.0;    // NaN when n_f == 0
  double accuracy_m = 0.0;    // NaN when n_m == 0
  int n_f = 0, n_m = 0;
  int correct_f = 0, correct_m = 0;
  std::string model_id;
  std::string corpus_id;

  // "All (F/M)", one decimal; "n/a" for an empty gender.
  std::string Cell() const;
};

inline constexpr double kEvalSegmentS = 6.0;

// Evaluates on the first segment_s seconds of each utterance. Throws
// DataError naming the first unlabeled utterance.
EvalReport AccuracyByGender(const GenderClassifier& model, const std::vector<Waveform>& corpus,
                            double segment_s = kEvalSegmentS);
EvalReport ReportFromPredictions(const std::vector<Gender>& truth,
                                 const std::vector<Gender>& predicted);

// Perturbed corpora keyed by (reference id, PGD config hash, corpus id).
// With a directory, entries are also persisted as perturbed-corpus
// directories and reloaded on later runs. With a directory, Get always
// returns the stored (float32) samples so fresh and cached runs agree.
class PerturbationCache {
 public:
  explicit PerturbationCache(std::string dir = {});
  std::vector<Waveform> Get(const DifferentiableClassifier& ref,
                            const std::vector<Waveform>& corpus, const PgdConfig& cfg,
                            std::vector<SkippedInput>* skipped = nullptr);
  // Stores a corpus perturbed elsewhere; `corpus` is the clean input.
  void Put(const std::vector<Waveform>& corpus, const PerturbedCorpus& pc);
  static std::string Key(const std::string& ref_id, const PgdConfig& cfg,
                         const std::vector<Waveform>& corpus);
  std::size_t computed() const { return computed_; }

 private:
  std::string dir_;
  std::map<std::string, std::vector<Waveform>> memory_;
  std::size_t computed_ = 0;
};

struct MatrixCell {
  std::optional<EvalReport> report;
  std::string error;  // set when the cell could not be computed
  bool white_box = false;
};

struct AttackMatrix {
  inline static const std::string kOriginalRow = "Original";
  std::vector<std::string> row_ids;  // kOriginalRow first, then reference ids
  std::vector<std::string> col_ids;  // attacker ids
  std::vector<std::vector<MatrixCell>> cells;
  std::string corpus_id;

  const MatrixCell& At(const std::string& row, const std::string& col) const;
};

// Perturbs the corpus once per reference model and evaluates every
// attacker on it. Cell failures are recorded, not thrown.
AttackMatrix BuildAttackMatrix(const std::vector<const DifferentiableClassifier*>& refs,
                               const std::vector<const GenderClassifier*>& attackers,
                               const std::vector<Waveform>& corpus, const PgdConfig& cfg,
                               PerturbationCache* cache = nullptr);

std::string FormatAttackMatrix(const AttackMatrix& m);
std::string AttackMatrixTsv(const AttackMatrix& m);

struct IntersectionReport {
  std::vector<int> top_gender;   // most important first
  std::vector<int> top_perturb;  // clean (+1) vs perturbed (-1)
  std::vector<int> intersection;  // in top_gender order
  double origin_accuracy = 0.0;   // training accuracy of the origin SVM, percent
  bool origin_separable = true;   // false below kOriginSeparableAccuracy
};

inline constexpr double kOriginSeparableAccuracy = 60.0;

IntersectionReport RfeIntersection(const FeatureMatrix& clean, const std::vector<int>& gender,
                                   const FeatureMatrix& perturbed, std::size_t n,
                                   const SvmOptions& opt);
std::string FormatIntersection(const IntersectionReport& r);
std::string IntersectionTsv(const IntersectionReport& r);

inline constexpr double kSegmentalSnrSegmentS = 0.032;
inline constexpr double kSegmentalSnrFloorDb = -10.0;
inline constexpr double kSegmentalSnrCeilingDb = 35.0;

// Mean over 32 ms segments of 10 log10(signal power / perturbation power),
// each segment clamped to [-10, 35] dB. The signal is taken relative to its
// own mean. +inf when the perturbation is identically zero.
double SegmentalSnrDb(std::span<const double> original, std::span<const double> perturbed);

struct UtteranceUtility {
  std::string source_id;
  double delta_linf = 0.0;
  double delta_l2 = 0.0;
  double segmental_snr_db = 0.0;
  std::vector<double> drift;  // (perturbed - original) / train std, per slot
};

struct UtilityReport {
  std::vector<UtteranceUtility> rows;
  std::vector<double> mean_abs_drift;  // per slot
  double mean_segmental_snr_db = 0.0;  // over finite rows; +inf if none
  double max_delta_linf = 0.0;
};

// Pairs utterances by source_id; the original is cut to the perturbed
// length first. Throws DataError listing unmatched ids.
UtilityReport ComputeUtility(const std::vector<Waveform>& original,
                             const std::vector<Waveform>& perturbed,
                             std::span<const double> train_std, FeatureCache& cache);
std::string FormatUtility(const UtilityReport& r);
std::string UtilityTsv(const UtilityReport& r);

struct AdaptationTable {
  std::vector<std::string> adaptations;  // first-seen order
  std::vector<std::string> model_ids;
  std::vector<std::vector<EvalReport>> cells;  // [adaptation][model]
  std::vector<std::string> warnings;
};

// Groups by the "adaptation=<name>" tag; untagged utterances are skipped
// with a warning.
AdaptationTable BuildAdaptationTable(const std::vector<const GenderClassifier*>& models,
                                     const std::vector<Waveform>& corpus);
std::string FormatAdaptationTable(const AdaptationTable& t);
std::string AdaptationTableTsv(const AdaptationTable& t);

std::string FormatEvalReport(const EvalReport& r);
std::string EvalReportTsv(const std::vector<EvalReport>& reports);

// One decimal, "n/a" for NaN, "inf" for infinities.
std::string FormatPercent(double v);

}  // namespace voxprotect

#endif  // VOXPROTECT_EVAL_H_
