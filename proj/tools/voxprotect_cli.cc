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

// voxprotect: batch front end. Every subcommand resolves one RunConfig
// (defaults < --config file < --set overrides < dedicated flags), writes it
// to <out>/resolved_config.yaml and then produces its artifact.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "voxprotect/attack.h"
#include "voxprotect/audio_io.h"
#include "voxprotect/config.h"
#include "voxprotect/error.h"
#include "voxprotect/eval.h"
#include "voxprotect/features.h"
#include "voxprotect/linmodels.h"
#include "voxprotect/neuralnet.h"
#include "voxprotect/synth.h"

namespace vp = voxprotect;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> manifest, perturbed, features, out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models, ref_models, adaptation_manifests;
  bool quiet = false;
};

void Log(const Flags& f, const std::string& msg) {
  if (!f.quiet) std::cerr << msg << '\n';
}

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

vp::RunConfig Resolve(const Flags& f) {
  vp::RunConfig cfg = f.config.empty() ? vp::RunConfig::Defaults() : vp::LoadRunConfig(f.config);
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw vp::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    vp::SetConfigValue(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.manifest) cfg.paths.manifest = *f.manifest;
  if (f.perturbed) cfg.paths.perturbed = *f.perturbed;
  if (f.features) cfg.paths.features = *f.features;
  if (f.out) cfg.paths.out = *f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.models.empty()) cfg.paths.models = f.models;
  if (!f.ref_models.empty()) cfg.paths.ref_models = f.ref_models;
  if (!f.adaptation_manifests.empty()) cfg.paths.adaptation_manifests = f.adaptation_manifests;
  cfg.ApplySeed();
  cfg.Validate();
  return cfg;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vp::DataError("cannot write " + path.string());
  out << text;
  if (!out) throw vp::DataError("write failed: " + path.string());
}

fs::path PrepareOut(const vp::RunConfig& cfg) {
  const fs::path out(cfg.paths.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw vp::DataError("cannot create output directory " + out.string());
  WriteText(out / "resolved_config.yaml", vp::DumpRunConfig(cfg));
  return out;
}

const std::string& Require(const std::string& value, const char* key) {
  if (value.empty()) throw vp::ConfigError(std::string("missing required key ") + key);
  return value;
}

std::vector<vp::Waveform> LoadManifest(const std::string& path, const char* key) {
  return vp::LoadCorpus(Require(path, key));
}

// CNN checkpoints start with a magic; anything else is a linear model file.
bool IsCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vp::DataError("cannot open model file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string(magic, 4) == "VXM5";
}

struct LoadedModels {
  std::vector<std::unique_ptr<vp::GenderClassifier>> classifiers;
  std::vector<std::unique_ptr<vp::DifferentiableClassifier>> cnns;  // CNN subset
};

LoadedModels LoadModels(const std::vector<std::string>& paths,
                        const std::shared_ptr<vp::FeatureCache>& cache) {
  if (paths.empty()) throw vp::ConfigError("missing required key paths.models");
  LoadedModels lm;
  for (const std::string& p : paths) {
    if (IsCheckpoint(p)) {
      auto m = std::make_shared<const vp::M5<float>>(vp::LoadCheckpoint(p));
      lm.classifiers.push_back(std::make_unique<vp::CnnClassifier>(m));
      lm.cnns.push_back(std::make_unique<vp::M5Differentiable<float>>(m));
    } else {
      vp::LinearModel m;
      try {
        m = vp::LoadModel(p);
      } catch (const vp::Error& e) {
        throw vp::FormatError(p + ": " + e.what());
      }
      lm.classifiers.push_back(std::make_unique<vp::FeatureClassifier>(std::move(m), cache));
    }
  }
  return lm;
}

std::unique_ptr<vp::DifferentiableClassifier> LoadReference(const std::string& path) {
  if (!IsCheckpoint(path)) {
    throw vp::ConfigError("reference model must be a CNN checkpoint: " + path);
  }
  auto m = std::make_shared<const vp::M5<float>>(vp::LoadCheckpoint(path));
  return std::make_unique<vp::M5Differentiable<float>>(m);
}

std::vector<vp::FeatureRow> ReadFeatures(const vp::RunConfig& cfg) {
  return vp::ReadFeatureTable(Require(cfg.paths.features, "paths.features"));
}

vp::FeatureMatrix MatrixOf(const std::vector<vp::FeatureRow>& rows) {
  std::vector<vp::FeatureVector> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.features);
  return vp::ToMatrix(v);
}

double TrainingAccuracy(const vp::LinearModel& m, const std::vector<vp::FeatureRow>& rows) {
  std::size_t ok = 0;
  for (const auto& r : rows) ok += vp::Predict(m, r.features).label == *r.gender;
  return rows.empty() ? 0.0 : 100.0 * static_cast<double>(ok) / static_cast<double>(rows.size());
}

std::vector<int> TopN(const vp::RunConfig& cfg, const vp::FeatureMatrix& x,
                      const std::vector<int>& y) {
  return vp::SvmRfe(x, y, static_cast<std::size_t>(cfg.svm.rfe_top_n), cfg.svm.options).top_n;
}

// eval.cache_dir, relative paths resolved against the output directory.
std::string CacheDir(const vp::RunConfig& cfg, const fs::path& out) {
  if (cfg.eval.cache_dir.empty()) return {};
  const fs::path d(cfg.eval.cache_dir);
  return (d.is_absolute() ? d : out / d).string();
}

// ---- subcommands ----

int CmdSynth(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const fs::path out = PrepareOut(cfg);
  Stopwatch sw;
  const vp::Corpus c = vp::MakeCorpus(cfg.synth);
  vp::WriteCorpus(out.string(), c.waves);
  Log(f, "synth: " + std::to_string(c.waves.size()) + " utterances -> " +
             (out / "manifest.csv").string() + " (" + Fixed(sw.Seconds(), 1) + " s)");
  return 0;
}

int CmdExtract(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto corpus = LoadManifest(cfg.paths.manifest, "paths.manifest");
  const fs::path out = PrepareOut(cfg);
  Stopwatch sw;
  const auto feats = vp::ExtractCorpus(corpus, cfg.pitch);
  std::vector<vp::FeatureRow> rows;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    rows.push_back({corpus[i].source_id, corpus[i].gender, corpus[i].tags, feats[i]});
  }
  vp::WriteFeatureTable((out / "features.csv").string(), rows);
  Log(f, "extract: " + std::to_string(rows.size()) + " rows -> " +
             (out / "features.csv").string() + " (" + Fixed(sw.Seconds(), 1) + " s)");
  return 0;
}

int CmdTrainSvm(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto rows = ReadFeatures(cfg);
  const fs::path out = PrepareOut(cfg);
  const auto x = MatrixOf(rows);
  const auto y = vp::GenderLabels(rows);
  std::vector<int> subset;
  if (cfg.svm.features == "rfe") subset = TopN(cfg, x, y);
  const vp::LinearModel m = vp::TrainLinearSvm(x, y, cfg.svm.options, subset);
  vp::SaveModel((out / "svm.json").string(), m);
  Log(f, "train-svm: " + m.model_id + " train acc " + Fixed(TrainingAccuracy(m, rows), 1) +
             "% after " + std::to_string(m.epochs) + " epochs, gap " + Sci(m.duality_gap));
  return 0;
}

int CmdRfe(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto rows = ReadFeatures(cfg);
  const fs::path out = PrepareOut(cfg);
  const vp::RfeRanking r = vp::SvmRfe(MatrixOf(rows), vp::GenderLabels(rows),
                                      static_cast<std::size_t>(cfg.svm.rfe_top_n),
                                      cfg.svm.options);
  // Most important first.
  std::string tsv = "rank\tfeature\tkept\n";
  const std::size_t n = r.elimination_order.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int col = r.elimination_order[n - 1 - i];
    tsv += std::to_string(i + 1) + "\t" + std::string(vp::FeatureName(col)) + "\t" +
           (i < r.top_n.size() ? "1" : "0") + "\n";
  }
  WriteText(out / "rfe.tsv", tsv);
  std::string top;
  for (int c : r.top_n) top += (top.empty() ? "" : ", ") + std::string(vp::FeatureName(c));
  std::cout << "top " << r.top_n.size() << ": " << top << '\n';
  return 0;
}

int CmdTrainRidge(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto rows = ReadFeatures(cfg);
  const fs::path out = PrepareOut(cfg);
  const vp::LinearModel m =
      vp::TrainRidgeSingle(MatrixOf(rows), vp::GenderLabels(rows),
                           vp::FeatureIndex(cfg.svm.ridge_feature), cfg.svm.ridge_lambda);
  vp::SaveModel((out / "ridge.json").string(), m);
  Log(f, "train-ridge: " + m.model_id + " on " + cfg.svm.ridge_feature + ", train acc " +
             Fixed(TrainingAccuracy(m, rows), 1) + "%");
  return 0;
}

int CmdTrainCnn(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto corpus = LoadManifest(cfg.paths.manifest, "paths.manifest");
  const fs::path out = PrepareOut(cfg);
  Stopwatch sw;
  vp::TrainLog log;
  const long total = cfg.train.total_steps;
  const vp::M5<float> m =
      vp::TrainM5(cfg.model, cfg.train, corpus, &log, [&](long step, double loss) {
        if ((step + 1) % 50 == 0 || step + 1 == total) {
          Log(f, "train-cnn: step " + std::to_string(step + 1) + "/" + std::to_string(total) +
                     " loss " + Fixed(loss, 4) + " (" + Fixed(sw.Seconds(), 0) + " s)");
        }
      });
  vp::SaveCheckpoint((out / "cnn.ckpt").string(), m);
  std::string tsv = "step\tlr\tloss\n";
  for (std::size_t i = 0; i < log.loss.size(); ++i) {
    tsv += std::to_string(i) + "\t" + Sci(log.lr[i]) + "\t" + Fixed(log.loss[i], 6) + "\n";
  }
  WriteText(out / "train_log.tsv", tsv);
  const vp::CnnClassifier clf(std::make_shared<const vp::M5<float>>(m));
  const vp::EvalReport rep = vp::AccuracyByGender(clf, corpus, cfg.eval.segment_s);
  Log(f, "train-cnn: " + m.model_id + " train acc " + rep.Cell());
  return 0;
}

int CmdAttack(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  if (cfg.paths.ref_models.size() != 1) {
    throw vp::ConfigError("attack needs exactly one paths.ref_models entry (--ref-model)");
  }
  const auto ref = LoadReference(cfg.paths.ref_models.front());
  const auto corpus = LoadManifest(cfg.paths.manifest, "paths.manifest");
  const fs::path out = PrepareOut(cfg);
  Stopwatch sw;
  const vp::PerturbedCorpus pc = vp::PerturbCorpus(*ref, corpus, cfg.pgd);
  vp::WritePerturbedCorpus(out.string(), pc);
  const std::string cache_dir = CacheDir(cfg, out);
  if (!cache_dir.empty()) vp::PerturbationCache(cache_dir).Put(corpus, pc);
  for (const auto& s : pc.skipped) Log(f, "attack: skipped " + s.source_id + ": " + s.reason);
  double linf = 0.0;
  for (const auto& r : pc.results) linf = std::max(linf, r.delta_linf);
  Log(f, "attack: " + std::to_string(pc.results.size()) + " perturbed, " +
             std::to_string(pc.skipped.size()) + " skipped, max |delta| " + Fixed(linf, 6) +
             " (" + Fixed(sw.Seconds(), 1) + " s)");
  return pc.results.empty() && !corpus.empty() ? kExitData : 0;
}

int CmdEvaluate(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  auto cache = std::make_shared<vp::FeatureCache>(cfg.pitch);
  const LoadedModels lm = LoadModels(cfg.paths.models, cache);
  const auto clean = LoadManifest(cfg.paths.manifest, "paths.manifest");
  std::vector<vp::Waveform> perturbed;
  if (!cfg.paths.perturbed.empty()) perturbed = vp::LoadCorpus(cfg.paths.perturbed);
  const fs::path out = PrepareOut(cfg);
  std::vector<vp::EvalReport> reports;
  std::string text;
  for (const auto& c : lm.classifiers) {
    reports.push_back(vp::AccuracyByGender(*c, clean, cfg.eval.segment_s));
    text += "clean      " + vp::FormatEvalReport(reports.back());
    if (!perturbed.empty()) {
      reports.push_back(vp::AccuracyByGender(*c, perturbed, cfg.eval.segment_s));
      text += "perturbed  " + vp::FormatEvalReport(reports.back());
    }
  }
  WriteText(out / "evaluate.tsv", vp::EvalReportTsv(reports));
  WriteText(out / "evaluate.txt", text);
  std::cout << text;
  return 0;
}

int CmdMatrix(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  auto cache = std::make_shared<vp::FeatureCache>(cfg.pitch);
  const LoadedModels lm = LoadModels(cfg.paths.models, cache);
  // Reference models default to the CNNs among the attacked models.
  std::vector<std::unique_ptr<vp::DifferentiableClassifier>> own_refs;
  std::vector<const vp::DifferentiableClassifier*> refs;
  if (cfg.paths.ref_models.empty()) {
    for (const auto& r : lm.cnns) refs.push_back(r.get());
  } else {
    for (const auto& p : cfg.paths.ref_models) {
      own_refs.push_back(LoadReference(p));
      refs.push_back(own_refs.back().get());
    }
  }
  if (refs.empty()) throw vp::ConfigError("matrix needs at least one CNN reference model");
  const auto corpus = LoadManifest(cfg.paths.manifest, "paths.manifest");
  const fs::path out = PrepareOut(cfg);
  vp::PerturbationCache pcache(CacheDir(cfg, out));
  std::vector<const vp::GenderClassifier*> attackers;
  for (const auto& c : lm.classifiers) attackers.push_back(c.get());
  Stopwatch sw;
  const vp::AttackMatrix m = vp::BuildAttackMatrix(refs, attackers, corpus, cfg.pgd, &pcache);
  const std::string table = vp::FormatAttackMatrix(m);
  WriteText(out / "matrix.txt", table);
  WriteText(out / "matrix.tsv", vp::AttackMatrixTsv(m));
  std::cout << table;
  Log(f, "matrix: " + std::to_string(pcache.computed()) + " perturbation runs (" +
             Fixed(sw.Seconds(), 1) + " s)");
  for (const auto& row : m.cells) {
    for (const auto& cell : row) {
      if (!cell.error.empty()) return kExitData;
    }
  }
  return 0;
}

int CmdIntersect(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto clean = LoadManifest(cfg.paths.manifest, "paths.manifest");
  const auto perturbed = LoadManifest(cfg.paths.perturbed, "paths.perturbed");
  const fs::path out = PrepareOut(cfg);
  vp::FeatureCache cache(cfg.pitch);
  const auto xc = vp::ToMatrix(cache.GetAll(clean));
  const auto xp = vp::ToMatrix(cache.GetAll(perturbed));
  const vp::IntersectionReport r =
      vp::RfeIntersection(xc, vp::GenderLabels(clean), xp,
                          static_cast<std::size_t>(cfg.svm.rfe_top_n), cfg.svm.options);
  const std::string text = vp::FormatIntersection(r);
  WriteText(out / "intersection.txt", text);
  WriteText(out / "intersection.tsv", vp::IntersectionTsv(r));
  std::cout << text;
  return 0;
}

int CmdUtility(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  const auto clean = LoadManifest(cfg.paths.manifest, "paths.manifest");
  const auto perturbed = LoadManifest(cfg.paths.perturbed, "paths.perturbed");
  vp::FeatureCache cache(cfg.pitch);
  // Drift is measured in units of the training-set spread; without a
  // training feature table the clean corpus stands in.
  vp::FeatureMatrix reference;
  if (!cfg.paths.features.empty()) {
    reference = MatrixOf(ReadFeatures(cfg));
  } else {
    reference = vp::ToMatrix(cache.GetAll(clean));
  }
  const vp::Standardizer st = vp::Standardizer::Fit(reference);
  const fs::path out = PrepareOut(cfg);
  const vp::UtilityReport r = vp::ComputeUtility(clean, perturbed, st.std, cache);
  const std::string text = vp::FormatUtility(r);
  WriteText(out / "utility.txt", text);
  WriteText(out / "utility.tsv", vp::UtilityTsv(r));
  std::cout << text;
  return 0;
}

int CmdAdaptations(const Flags& f) {
  const vp::RunConfig cfg = Resolve(f);
  auto cache = std::make_shared<vp::FeatureCache>(cfg.pitch);
  const LoadedModels lm = LoadModels(cfg.paths.models, cache);
  auto corpus = LoadManifest(cfg.paths.manifest, "paths.manifest");
  for (const auto& extra : cfg.paths.adaptation_manifests) {
    auto more = vp::LoadCorpus(extra);
    corpus.insert(corpus.end(), more.begin(), more.end());
  }
  const fs::path out = PrepareOut(cfg);
  std::vector<const vp::GenderClassifier*> models;
  for (const auto& c : lm.classifiers) models.push_back(c.get());
  const vp::AdaptationTable t = vp::BuildAdaptationTable(models, corpus);
  for (const auto& w : t.warnings) Log(f, "adaptations: " + w);
  const std::string text = vp::FormatAdaptationTable(t);
  WriteText(out / "adaptations.txt", text);
  WriteText(out / "adaptations.tsv", vp::AdaptationTableTsv(t));
  std::cout << text;
  return 0;
}

// ---- wiring ----

enum Opt : unsigned {
  kManifest = 1u << 0,
  kPerturbed = 1u << 1,
  kFeatures = 1u << 2,
  kModels = 1u << 3,
  kRefModels = 1u << 4,
  kAdaptationManifests = 1u << 5,
};

void AddCommon(CLI::App* sub, Flags& f, unsigned opts) {
  sub->add_option("--config", f.config, "YAML run configuration")->check(CLI::ExistingFile);
  sub->add_option("--set", f.sets,
                  "override one config key, e.g. --set train.max_lr=1e-3 (repeatable)");
  sub->add_option("--out", f.out, "output directory [config: paths.out]");
  sub->add_option("--seed", f.seed,
                  "master seed for synthesis, training and SVM shuffling [config: seed]");
  if (opts & kManifest) {
    sub->add_option("--manifest", f.manifest, "input corpus manifest [config: paths.manifest]");
  }
  if (opts & kPerturbed) {
    sub->add_option("--perturbed", f.perturbed,
                    "perturbed corpus manifest [config: paths.perturbed]");
  }
  if (opts & kFeatures) {
    sub->add_option("--features", f.features,
                    "training feature table [config: paths.features]");
  }
  if (opts & kModels) {
    sub->add_option("--model", f.models,
                    "model file, .ckpt CNN or linear JSON (repeatable) [config: paths.models]");
  }
  if (opts & kRefModels) {
    sub->add_option("--ref-model", f.ref_models,
                    "reference CNN checkpoint (repeatable) [config: paths.ref_models]");
  }
  if (opts & kAdaptationManifests) {
    sub->add_option("--adaptation-manifest", f.adaptation_manifests,
                    "further corpus pooled into the report (repeatable) "
                    "[config: paths.adaptation_manifests]");
  }
  sub->add_flag("-q,--quiet", f.quiet, "suppress progress messages on stderr");
}

std::string KeyListing() {
  std::string s = "Config keys (YAML sections, or --set section.key=value):\n";
  for (const auto& k : vp::ConfigKeys()) {
    s += "  " + k.name + std::string(k.name.size() < 26 ? 26 - k.name.size() : 1, ' ') +
         k.help + "\n";
  }
  return s;
}

int Run(int argc, char** argv) {
  CLI::App app{"voxprotect: gender-inference attacks and defences on speech"};
  app.require_subcommand(1);
  app.footer(KeyListing());
  Flags f;
  std::function<int(const Flags&)> action;

  struct Spec {
    const char* name;
    const char* help;
    unsigned opts;
    int (*fn)(const Flags&);
  };
  const Spec specs[] = {
      {"synth", "generate a labeled synthetic corpus (wavs/ + manifest.csv)", 0, CmdSynth},
      {"extract", "extract the 34 acoustic features into features.csv", kManifest, CmdExtract},
      {"train-svm", "train the linear SVM on a feature table (svm.json)", kFeatures,
       CmdTrainSvm},
      {"rfe", "rank features by SVM recursive feature elimination (rfe.tsv)", kFeatures,
       CmdRfe},
      {"train-ridge", "train the single-feature ridge classifier (ridge.json)", kFeatures,
       CmdTrainRidge},
      {"train-cnn", "train the raw-waveform CNN (cnn.ckpt, train_log.tsv)", kManifest,
       CmdTrainCnn},
      {"attack", "perturb a corpus with PGD against one reference CNN", kManifest | kRefModels,
       CmdAttack},
      {"evaluate", "per-gender accuracy of each model on clean and perturbed corpora",
       kManifest | kPerturbed | kModels, CmdEvaluate},
      {"matrix", "attack matrix: reference models x attacked models",
       kManifest | kModels | kRefModels, CmdMatrix},
      {"intersect", "RFE gender ranking vs clean/perturbed ranking", kManifest | kPerturbed,
       CmdIntersect},
      {"utility", "perturbation norms, segmental SNR and feature drift",
       kManifest | kPerturbed | kFeatures, CmdUtility},
      {"adaptations", "per-adaptation accuracy table",
       kManifest | kModels | kAdaptationManifests, CmdAdaptations},
  };
  for (const Spec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    AddCommon(sub, f, s.opts);
    sub->callback([&action, fn = s.fn] { action = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  return action(f);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const vp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vp::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const vp::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
