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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_map>

#include "text_util.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void Mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

std::string Hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double Percent(int correct, int total) {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN() : 100.0 * correct / total;
}

// Left-aligned first column, right-aligned others.
std::string AlignedTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string pad(width[c] - r[c].size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? r[c] + pad : pad + r[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string Tsv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out += '\t';
      out += r[c];
    }
    out += '\n';
  }
  return out;
}

std::vector<Waveform> FixAll(const std::vector<Waveform>& corpus, double segment_s) {
  std::vector<Waveform> out;
  out.reserve(corpus.size());
  for (const Waveform& w : corpus) out.push_back(FixLength(w, segment_s));
  return out;
}

std::string AdaptationOf(const Waveform& w) {
  static const std::string prefix = "adaptation=";
  for (const std::string& t : w.tags) {
    if (t.rfind(prefix, 0) == 0) return t.substr(prefix.size());
  }
  return {};
}

}  // namespace

std::uint64_t WaveformHash(const Waveform& w) {
  std::uint64_t h = kFnvOffset;
  Mix(h, &w.sample_rate_hz, sizeof(w.sample_rate_hz));
  Mix(h, w.samples.data(), w.samples.size() * sizeof(double));
  return h;
}

std::string CorpusId(const std::vector<Waveform>& corpus) {
  std::uint64_t h = kFnvOffset;
  for (const Waveform& w : corpus) {
    Mix(h, w.source_id.data(), w.source_id.size());
    const std::uint64_t wh = WaveformHash(w);
    Mix(h, &wh, sizeof(wh));
  }
  return "corpus-" + Hex(h);
}

FeatureCache::FeatureCache(PitchConfig cfg) : cfg_(cfg) { cfg_.Validate(); }

const FeatureVector& FeatureCache::Get(const Waveform& w) {
  const std::uint64_t key = WaveformHash(w);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, ExtractAll(w, cfg_)).first;
  return it->second;
}

std::vector<FeatureVector> FeatureCache::GetAll(const std::vector<Waveform>& corpus) {
  std::vector<FeatureVector> out;
  out.reserve(corpus.size());
  for (const Waveform& w : corpus) out.push_back(Get(w));
  return out;
}

CnnClassifier::CnnClassifier(std::shared_ptr<const M5<float>> model, int batch_size)
    : model_(std::move(model)), batch_size_(batch_size) {
  if (!model_) throw DataError("null CNN model");
  if (model_->mode() != Mode::kEval) throw ModeError("classifier model must be in eval mode");
  if (batch_size_ < 1) throw ConfigError("batch_size must be >= 1");
}

std::vector<Gender> CnnClassifier::PredictBatch(const std::vector<Waveform>& corpus) const {
  std::vector<Gender> out;
  out.reserve(corpus.size());
  std::size_t first = 0;
  while (first < corpus.size()) {
    // Rows of one batch must share a length.
    std::size_t last = first + 1;
    const std::size_t len = corpus[first].samples.size();
    while (last < corpus.size() && last - first < static_cast<std::size_t>(batch_size_) &&
           corpus[last].samples.size() == len) {
      ++last;
    }
    Tensor<float> x({last - first, len});
    for (std::size_t b = first; b < last; ++b) {
      std::transform(corpus[b].samples.begin(), corpus[b].samples.end(),
                     x.values.begin() + static_cast<long>((b - first) * len),
                     [](double v) { return static_cast<float>(v); });
    }
    const Tensor<float> logits = model_->Infer(x);
    for (std::size_t b = 0; b < last - first; ++b) {
      out.push_back(logits.at(b, 0) >= logits.at(b, 1) ? Gender::kFemale : Gender::kMale);
    }
    first = last;
  }
  return out;
}

FeatureClassifier::FeatureClassifier(LinearModel model, std::shared_ptr<FeatureCache> cache)
    : model_(std::move(model)), cache_(std::move(cache)) {
  if (!cache_) cache_ = std::make_shared<FeatureCache>();
}

std::vector<Gender> FeatureClassifier::PredictBatch(const std::vector<Waveform>& corpus) const {
  std::vector<Gender> out;
  out.reserve(corpus.size());
  for (const Waveform& w : corpus) out.push_back(Predict(model_, cache_->Get(w)).label);
  return out;
}

std::string FormatPercent(double v) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string EvalReport::Cell() const {
  return FormatPercent(accuracy_all) + " (" + FormatPercent(accuracy_f) + "/" +
         FormatPercent(accuracy_m) + ")";
}

EvalReport ReportFromPredictions(const std::vector<Gender>& truth,
                                 const std::vector<Gender>& predicted) {
  if (truth.size() != predicted.size()) throw DataError("prediction count mismatch");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool ok = truth[i] == predicted[i];
    if (truth[i] == Gender::kFemale) {
      ++r.n_f;
      r.correct_f += ok;
    } else {
      ++r.n_m;
      r.correct_m += ok;
    }
  }
  r.accuracy_all = Percent(r.correct_f + r.correct_m, r.n_f + r.n_m);
  r.accuracy_f = Percent(r.correct_f, r.n_f);
  r.accuracy_m = Percent(r.correct_m, r.n_m);
  return r;
}

EvalReport AccuracyByGender(const GenderClassifier& model, const std::vector<Waveform>& corpus,
                            double segment_s) {
  std::vector<Gender> truth;
  truth.reserve(corpus.size());
  for (const Waveform& w : corpus) {
    if (!w.gender) throw DataError("unlabeled utterance " + w.source_id);
    truth.push_back(*w.gender);
  }
  const std::vector<Waveform> fixed = FixAll(corpus, segment_s);
  EvalReport r = ReportFromPredictions(truth, model.PredictBatch(fixed));
  r.model_id = model.Id();
  r.corpus_id = CorpusId(corpus);
  return r;
}

PerturbationCache::PerturbationCache(std::string dir) : dir_(std::move(dir)) {}

std::string PerturbationCache::Key(const std::string& ref_id, const PgdConfig& cfg,
                                   const std::vector<Waveform>& corpus) {
  return ref_id + "-" + cfg.Hash() + "-" + CorpusId(corpus);
}

void PerturbationCache::Put(const std::vector<Waveform>& corpus, const PerturbedCorpus& pc) {
  const std::string key = Key(pc.reference_model_id, pc.config, corpus);
  if (dir_.empty()) {
    memory_[key] = pc.Waveforms();
    return;
  }
  const std::string path = (std::filesystem::path(dir_) / key).string();
  WritePerturbedCorpus(path, pc);
  memory_[key] = LoadCorpus(path + "/manifest.csv");
}

std::vector<Waveform> PerturbationCache::Get(const DifferentiableClassifier& ref,
                                             const std::vector<Waveform>& corpus,
                                             const PgdConfig& cfg,
                                             std::vector<SkippedInput>* skipped) {
  const std::string key = Key(ref.Id(), cfg, corpus);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  namespace fs = std::filesystem;
  const fs::path path = dir_.empty() ? fs::path() : fs::path(dir_) / key;
  if (!dir_.empty() && fs::exists(path / "manifest.csv")) {
    std::vector<Waveform> loaded = LoadCorpus((path / "manifest.csv").string());
    memory_[key] = loaded;
    return loaded;
  }
  const PerturbedCorpus pc = PerturbCorpus(ref, corpus, cfg);
  ++computed_;
  if (skipped) skipped->insert(skipped->end(), pc.skipped.begin(), pc.skipped.end());
  Put(corpus, pc);
  return memory_[key];
}

const MatrixCell& AttackMatrix::At(const std::string& row, const std::string& col) const {
  const auto r = std::find(row_ids.begin(), row_ids.end(), row);
  const auto c = std::find(col_ids.begin(), col_ids.end(), col);
  if (r == row_ids.end() || c == col_ids.end()) {
    throw DataError("no matrix cell (" + row + ", " + col + ")");
  }
  return cells[static_cast<std::size_t>(r - row_ids.begin())]
              [static_cast<std::size_t>(c - col_ids.begin())];
}

AttackMatrix BuildAttackMatrix(const std::vector<const DifferentiableClassifier*>& refs,
                               const std::vector<const GenderClassifier*>& attackers,
                               const std::vector<Waveform>& corpus, const PgdConfig& cfg,
                               PerturbationCache* cache) {
  PerturbationCache local;
  if (!cache) cache = &local;
  AttackMatrix m;
  m.corpus_id = CorpusId(corpus);
  m.row_ids.push_back(AttackMatrix::kOriginalRow);
  for (const DifferentiableClassifier* r : refs) m.row_ids.push_back(r->Id());
  for (const GenderClassifier* a : attackers) m.col_ids.push_back(a->Id());

  auto evaluate_row = [&](const std::vector<Waveform>& data, const std::string& ref_id,
                          const std::string& row_error) {
    std::vector<MatrixCell> row;
    for (const GenderClassifier* a : attackers) {
      MatrixCell cell;
      cell.white_box = !ref_id.empty() && ref_id == a->Id();
      if (!row_error.empty()) {
        cell.error = row_error;
      } else {
        try {
          cell.report = AccuracyByGender(*a, data);
        } catch (const Error& e) {
          cell.error = e.what();
        }
      }
      row.push_back(std::move(cell));
    }
    m.cells.push_back(std::move(row));
  };

  evaluate_row(corpus, "", "");
  for (const DifferentiableClassifier* r : refs) {
    std::vector<Waveform> perturbed;
    std::string error;
    try {
      perturbed = cache->Get(*r, corpus, cfg);
      if (perturbed.empty()) error = "no utterance could be perturbed";
    } catch (const Error& e) {
      error = e.what();
    }
    evaluate_row(perturbed, r->Id(), error);
  }
  return m;
}

std::string FormatAttackMatrix(const AttackMatrix& m) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"Ref model"};
  header.insert(header.end(), m.col_ids.begin(), m.col_ids.end());
  rows.push_back(header);
  for (std::size_t r = 0; r < m.row_ids.size(); ++r) {
    std::vector<std::string> line = {m.row_ids[r]};
    for (const MatrixCell& c : m.cells[r]) {
      std::string text = c.report ? c.report->Cell() : "ERROR";
      if (c.white_box) text += " *";
      line.push_back(text);
    }
    rows.push_back(line);
  }
  std::string out = "Gender prediction accuracy, All (F/M); * = white-box\n";
  out += "corpus " + m.corpus_id + "\n";
  out += AlignedTable(rows);
  for (std::size_t r = 0; r < m.row_ids.size(); ++r) {
    for (std::size_t c = 0; c < m.col_ids.size(); ++c) {
      if (!m.cells[r][c].error.empty()) {
        out += "error [" + m.row_ids[r] + " x " + m.col_ids[c] + "]: " + m.cells[r][c].error + "\n";
      }
    }
  }
  return out;
}

std::string AttackMatrixTsv(const AttackMatrix& m) {
  std::vector<std::vector<std::string>> rows = {{"ref_model", "attacker", "cell", "accuracy_all",
                                                 "accuracy_f", "accuracy_m", "n_f", "n_m",
                                                 "white_box", "error"}};
  for (std::size_t r = 0; r < m.row_ids.size(); ++r) {
    for (std::size_t c = 0; c < m.col_ids.size(); ++c) {
      const MatrixCell& cell = m.cells[r][c];
      std::vector<std::string> line = {m.row_ids[r], m.col_ids[c]};
      if (cell.report) {
        const EvalReport& e = *cell.report;
        line.insert(line.end(), {e.Cell(), FormatPercent(e.accuracy_all), FormatPercent(e.accuracy_f),
                                 FormatPercent(e.accuracy_m), std::to_string(e.n_f),
                                 std::to_string(e.n_m)});
      } else {
        line.insert(line.end(), {"ERROR", "", "", "", "", ""});
      }
      line.push_back(cell.white_box ? "1" : "0");
      std::string err = cell.error;
      std::replace(err.begin(), err.end(), '\t', ' ');
      std::replace(err.begin(), err.end(), '\n', ' ');
      line.push_back(err);
      rows.push_back(line);
    }
  }
  return Tsv(rows);
}

IntersectionReport RfeIntersection(const FeatureMatrix& clean, const std::vector<int>& gender,
                                   const FeatureMatrix& perturbed, std::size_t n,
                                   const SvmOptions& opt) {
  if (perturbed.empty()) throw DataError("perturbed feature set is empty");
  IntersectionReport r;
  r.top_gender = SvmRfe(clean, gender, n, opt).top_n;

  FeatureMatrix both = clean;
  both.insert(both.end(), perturbed.begin(), perturbed.end());
  std::vector<int> origin(clean.size(), 1);
  origin.resize(both.size(), -1);
  r.top_perturb = SvmRfe(both, origin, n, opt).top_n;

  const LinearModel full = TrainLinearSvm(both, origin, opt);
  int ok = 0;
  for (std::size_t i = 0; i < both.size(); ++i) {
    ok += (Predict(full, both[i]).score >= 0.0 ? 1 : -1) == origin[i];
  }
  r.origin_accuracy = 100.0 * ok / static_cast<double>(both.size());
  r.origin_separable = r.origin_accuracy >= kOriginSeparableAccuracy;

  const std::set<int> perturb_set(r.top_perturb.begin(), r.top_perturb.end());
  for (int f : r.top_gender) {
    if (perturb_set.count(f)) r.intersection.push_back(f);
  }
  return r;
}

std::string FormatIntersection(const IntersectionReport& r) {
  std::vector<std::vector<std::string>> rows = {{"rank", "gender (M vs F)", "origin (clean vs perturbed)"}};
  const std::size_t n = std::max(r.top_gender.size(), r.top_perturb.size());
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({std::to_string(i + 1),
                    i < r.top_gender.size() ? std::string(FeatureName(r.top_gender[i])) : "",
                    i < r.top_perturb.size() ? std::string(FeatureName(r.top_perturb[i])) : ""});
  }
  std::string out = AlignedTable(rows);
  out += "intersection:";
  if (r.intersection.empty()) out += " (empty)";
  for (int f : r.intersection) out += " " + std::string(FeatureName(f));
  out += "\norigin SVM training accuracy: " + FormatPercent(r.origin_accuracy) + "%";
  if (!r.origin_separable) out += " (origin task not separable; perturbed ranking is uninformative)";
  out += "\n";
  return out;
}

std::string IntersectionTsv(const IntersectionReport& r) {
  std::vector<std::vector<std::string>> rows = {{"list", "rank", "feature"}};
  auto add = [&](const std::string& list, const std::vector<int>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      rows.push_back({list, std::to_string(i + 1), std::string(FeatureName(v[i]))});
    }
  };
  add("gender", r.top_gender);
  add("perturb", r.top_perturb);
  add("intersection", r.intersection);
  rows.push_back({"origin_accuracy", "", FormatPercent(r.origin_accuracy)});
  rows.push_back({"origin_separable", "", r.origin_separable ? "1" : "0"});
  return Tsv(rows);
}

double SegmentalSnrDb(std::span<const double> original, std::span<const double> perturbed) {
  if (original.size() != perturbed.size()) throw ShapeError("segmental SNR needs equal lengths");
  if (original.empty()) throw EmptyInputError("segmental SNR of an empty signal");
  double mean = 0.0;
  for (double v : original) mean += v;
  mean /= static_cast<double>(original.size());
  bool any = false;
  for (std::size_t i = 0; i < original.size(); ++i) any = any || perturbed[i] != original[i];
  if (!any) return std::numeric_limits<double>::infinity();

  const auto seg = static_cast<std::size_t>(std::llround(kSegmentalSnrSegmentS * kSampleRateHz));
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < original.size(); start += seg) {
    const std::size_t end = std::min(original.size(), start + seg);
    double ps = 0.0, pn = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      const double s = original[i] - mean, d = perturbed[i] - original[i];
      ps += s * s;
      pn += d * d;
    }
    double db;
    if (pn == 0.0) {
      db = kSegmentalSnrCeilingDb;
    } else if (ps == 0.0) {
      db = kSegmentalSnrFloorDb;
    } else {
      db = std::clamp(10.0 * std::log10(ps / pn), kSegmentalSnrFloorDb, kSegmentalSnrCeilingDb);
    }
    total += db;
    ++count;
  }
  return total / static_cast<double>(count);
}

UtilityReport ComputeUtility(const std::vector<Waveform>& original,
                             const std::vector<Waveform>& perturbed,
                             std::span<const double> train_std, FeatureCache& cache) {
  if (train_std.size() != static_cast<std::size_t>(kNumFeatures)) {
    throw DataError("train_std needs " + std::to_string(kNumFeatures) + " entries");
  }
  std::unordered_map<std::string, const Waveform*> by_id;
  for (const Waveform& w : original) by_id[w.source_id] = &w;
  std::vector<std::string> missing;
  for (const Waveform& p : perturbed) {
    if (!by_id.count(p.source_id)) missing.push_back(p.source_id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw DataError("perturbed utterances without an original: " + list);
  }

  UtilityReport rep;
  rep.mean_abs_drift.assign(static_cast<std::size_t>(kNumFeatures), 0.0);
  double snr_sum = 0.0;
  std::size_t snr_count = 0;
  for (const Waveform& p : perturbed) {
    const Waveform o = FixLength(*by_id.at(p.source_id), p.DurationSeconds());
    UtteranceUtility u;
    u.source_id = p.source_id;
    double l2 = 0.0;
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
      const double d = p.samples[i] - o.samples[i];
      u.delta_linf = std::max(u.delta_linf, std::abs(d));
      l2 += d * d;
    }
    u.delta_l2 = std::sqrt(l2);
    u.segmental_snr_db = SegmentalSnrDb(o.samples, p.samples);
    if (std::isfinite(u.segmental_snr_db)) {
      snr_sum += u.segmental_snr_db;
      ++snr_count;
    }
    const FeatureVector fo = cache.Get(o);
    const FeatureVector& fp = cache.Get(p);
    u.drift.resize(static_cast<std::size_t>(kNumFeatures));
    for (std::size_t k = 0; k < u.drift.size(); ++k) {
      const double sd = train_std[k] > 0.0 ? train_std[k] : 1.0;
      u.drift[k] = (fp.values[k] - fo.values[k]) / sd;
      rep.mean_abs_drift[k] += std::abs(u.drift[k]);
    }
    rep.max_delta_linf = std::max(rep.max_delta_linf, u.delta_linf);
    rep.rows.push_back(std::move(u));
  }
  if (!rep.rows.empty()) {
    for (double& v : rep.mean_abs_drift) v /= static_cast<double>(rep.rows.size());
  }
  rep.mean_segmental_snr_db = snr_count ? snr_sum / static_cast<double>(snr_count)
                                        : std::numeric_limits<double>::infinity();
  return rep;
}

std::string FormatUtility(const UtilityReport& r) {
  std::string out = "utterances: " + std::to_string(r.rows.size()) + "\n";
  char linf[32];
  std::snprintf(linf, sizeof(linf), "%.6f", r.max_delta_linf);
  out += "max delta_linf: " + std::string(linf) + "\n";
  out += "mean segmental SNR (dB): " + FormatPercent(r.mean_segmental_snr_db) + "\n";
  std::vector<std::vector<std::string>> rows = {{"feature", "mean |drift| (train std)"}};
  for (int k = 0; k < kNumFeatures; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.mean_abs_drift[static_cast<std::size_t>(k)]);
    rows.push_back({std::string(FeatureName(k)), buf});
  }
  return out + AlignedTable(rows);
}

std::string UtilityTsv(const UtilityReport& r) {
  std::vector<std::string> header = {"source_id", "delta_linf", "delta_l2", "segmental_snr_db"};
  for (int k = 0; k < kNumFeatures; ++k) header.push_back("drift_" + std::string(FeatureName(k)));
  std::vector<std::vector<std::string>> rows = {header};
  for (const UtteranceUtility& u : r.rows) {
    std::vector<std::string> line = {u.source_id, text::FormatDouble(u.delta_linf),
                                     text::FormatDouble(u.delta_l2),
                                     text::FormatDouble(u.segmental_snr_db)};
    for (double d : u.drift) line.push_back(text::FormatDouble(d));
    rows.push_back(line);
  }
  return Tsv(rows);
}

AdaptationTable BuildAdaptationTable(const std::vector<const GenderClassifier*>& models,
                                     const std::vector<Waveform>& corpus) {
  AdaptationTable t;
  std::map<std::string, std::vector<Waveform>> groups;
  for (const Waveform& w : corpus) {
    const std::string a = AdaptationOf(w);
    if (a.empty()) {
      t.warnings.push_back("skipping " + w.source_id + ": no adaptation tag");
      continue;
    }
    if (!w.gender) {
      t.warnings.push_back("skipping " + w.source_id + ": no gender label");
      continue;
    }
    if (!groups.count(a)) t.adaptations.push_back(a);
    groups[a].push_back(w);
  }
  for (const GenderClassifier* m : models) t.model_ids.push_back(m->Id());
  for (const std::string& a : t.adaptations) {
    std::vector<EvalReport> row;
    for (const GenderClassifier* m : models) row.push_back(AccuracyByGender(*m, groups[a]));
    t.cells.push_back(std::move(row));
  }
  return t;
}

std::string FormatAdaptationTable(const AdaptationTable& t) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"Adaptation"};
  header.insert(header.end(), t.model_ids.begin(), t.model_ids.end());
  rows.push_back(header);
  for (std::size_t a = 0; a < t.adaptations.size(); ++a) {
    std::vector<std::string> line = {t.adaptations[a]};
    for (const EvalReport& e : t.cells[a]) line.push_back(e.Cell());
    rows.push_back(line);
  }
  std::string out = "Gender prediction accuracy by voice adaptation, All (F/M)\n" + AlignedTable(rows);
  for (const std::string& w : t.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string AdaptationTableTsv(const AdaptationTable& t) {
  std::vector<std::vector<std::string>> rows = {
      {"adaptation", "model", "cell", "accuracy_all", "accuracy_f", "accuracy_m", "n_f", "n_m"}};
  for (std::size_t a = 0; a < t.adaptations.size(); ++a) {
    for (std::size_t m = 0; m < t.model_ids.size(); ++m) {
      const EvalReport& e = t.cells[a][m];
      rows.push_back({t.adaptations[a], t.model_ids[m], e.Cell(), FormatPercent(e.accuracy_all),
                      FormatPercent(e.accuracy_f), FormatPercent(e.accuracy_m),
                      std::to_string(e.n_f), std::to_string(e.n_m)});
    }
  }
  return Tsv(rows);
}

std::string FormatEvalReport(const EvalReport& r) {
  return r.model_id + " on " + r.corpus_id + ": " + r.Cell() + "  [n_f=" + std::to_string(r.n_f) +
         ", n_m=" + std::to_string(r.n_m) + "]\n";
}

std::string EvalReportTsv(const std::vector<EvalReport>& reports) {
  std::vector<std::vector<std::string>> rows = {{"model", "corpus", "cell", "accuracy_all",
                                                 "accuracy_f", "accuracy_m", "n_f", "n_m"}};
  for (const EvalReport& e : reports) {
    rows.push_back({e.model_id, e.corpus_id, e.Cell(), FormatPercent(e.accuracy_all),
                    FormatPercent(e.accuracy_f), FormatPercent(e.accuracy_m),
                    std::to_string(e.n_f), std::to_string(e.n_m)});
  }
  return Tsv(rows);
}

}  // namespace voxprotect
