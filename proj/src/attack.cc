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

#include "voxprotect/attack.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "text_util.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

double CrossEntropy(const std::array<double, 2>& logits, int label) {
  const double m = std::max(logits[0], logits[1]);
  const double z = std::exp(logits[0] - m) + std::exp(logits[1] - m);
  return std::log(z) + m - logits[static_cast<std::size_t>(label)];
}

std::size_t SegmentLength(const PgdConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.segment_s * kSampleRateHz));
}

// Why `w` cannot be attacked under cfg, or empty.
std::string Unattackable(const DifferentiableClassifier& ref, const Waveform& w,
                         const PgdConfig& cfg) {
  if (!w.gender) return "missing gender label";
  if (w.sample_rate_hz != kSampleRateHz) return "sample rate is not 16 kHz";
  if (w.samples.size() != SegmentLength(cfg)) {
    return "length " + std::to_string(w.samples.size()) + " differs from the " +
           std::to_string(SegmentLength(cfg)) + "-sample segment";
  }
  if (w.samples.size() < ref.MinInputLength()) {
    return "segment shorter than the reference model's minimum input of " +
           std::to_string(ref.MinInputLength()) + " samples";
  }
  return {};
}

void RunBatch(const DifferentiableClassifier& ref, const std::vector<Waveform>& inputs,
              std::size_t first, std::size_t count, const PgdConfig& cfg,
              const PgdStepHook& hook, std::vector<PerturbationResult>& out) {
  std::vector<std::vector<double>> x(count);
  std::vector<int> labels(count);
  for (std::size_t b = 0; b < count; ++b) {
    const Waveform& w = inputs[first + b];
    x[b] = w.samples;
    const int truth = ClassIndex(*w.gender);
    labels[b] = cfg.targeted ? 1 - truth : truth;
  }
  std::vector<std::vector<double>> traces(count);
  for (auto& t : traces) t.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  const double direction = cfg.targeted ? -1.0 : 1.0;
  std::vector<double> losses;
  std::vector<std::vector<double>> grads;
  for (int it = 0; it < cfg.iterations; ++it) {
    ref.LossAndInputGrad(x, labels, &losses, &grads);
    for (std::size_t b = 0; b < count; ++b) {
      if (!std::isfinite(losses[b])) {
        throw NumericError("non-finite loss while attacking " + inputs[first + b].source_id);
      }
      traces[b].push_back(losses[b]);
      const std::vector<double>& w = inputs[first + b].samples;
      std::vector<double>& xb = x[b];
      const std::vector<double>& g = grads[b];
      for (std::size_t i = 0; i < xb.size(); ++i) {
        const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        const double d = std::clamp(xb[i] + direction * cfg.alpha * s - w[i], -cfg.epsilon,
                                    cfg.epsilon);
        xb[i] = std::clamp(w[i] + d, 0.0, 1.0);
      }
      if (hook) hook(it + 1, first + b, xb);
    }
  }
  const std::vector<std::array<double, 2>> logits = ref.Logits(x);
  for (std::size_t b = 0; b < count; ++b) {
    const Waveform& w = inputs[first + b];
    PerturbationResult r;
    traces[b].push_back(CrossEntropy(logits[b], labels[b]));
    r.loss_trace = std::move(traces[b]);
    double linf = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      const double d = x[b][i] - w.samples[i];
      linf = std::max(linf, std::abs(d));
      l2 += d * d;
    }
    r.delta_linf = linf;
    r.delta_l2 = std::sqrt(l2);
    r.reference_model_id = ref.Id();
    r.adversarial = w;
    r.adversarial.samples = std::move(x[b]);
    r.adversarial.degenerate_range = false;
    r.adversarial.tags.insert(kPerturbedTag);
    r.adversarial.tags.insert(ReferenceTag(ref.Id()));
    out.push_back(std::move(r));
  }
}

}  // namespace

std::string ReferenceTag(const std::string& model_id) { return "ref=" + model_id; }

void PgdConfig::Validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("pgd: alpha must be > 0");
  if (iterations < 0) throw ConfigError("pgd: iterations must be >= 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("pgd: epsilon must be > 0");
  if (!(segment_s > 0.0) || !std::isfinite(segment_s)) {
    throw ConfigError("pgd: segment_s must be > 0");
  }
  if (batch_size < 1) throw ConfigError("pgd: batch_size must be >= 1");
}

std::string PgdConfig::Hash() const {
  const std::string canon = "alpha=" + text::FormatDouble(alpha) +
                            ";iterations=" + std::to_string(iterations) +
                            ";epsilon=" + text::FormatDouble(epsilon) +
                            ";segment_s=" + text::FormatDouble(segment_s) +
                            ";targeted=" + (targeted ? "1" : "0");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<PerturbationResult> PgdPerturbBatch(const DifferentiableClassifier& ref,
                                                const std::vector<Waveform>& inputs,
                                                const PgdConfig& cfg, const PgdStepHook& hook) {
  cfg.Validate();
  for (const Waveform& w : inputs) {
    const std::string why = Unattackable(ref, w, cfg);
    if (w.gender) {
      if (!why.empty()) throw ShapeError(w.source_id + ": " + why);
    } else {
      throw DataError(w.source_id + ": " + why);
    }
  }
  std::vector<PerturbationResult> out;
  out.reserve(inputs.size());
  const auto bsz = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t first = 0; first < inputs.size(); first += bsz) {
    RunBatch(ref, inputs, first, std::min(bsz, inputs.size() - first), cfg, hook, out);
  }
  return out;
}

PerturbationResult PgdPerturb(const DifferentiableClassifier& ref, const Waveform& w,
                              const PgdConfig& cfg) {
  return std::move(PgdPerturbBatch(ref, {w}, cfg).front());
}

std::vector<Waveform> PerturbedCorpus::Waveforms() const {
  std::vector<Waveform> out;
  out.reserve(results.size());
  for (const PerturbationResult& r : results) out.push_back(r.adversarial);
  return out;
}

PerturbedCorpus PerturbCorpus(const DifferentiableClassifier& ref,
                              const std::vector<Waveform>& corpus, const PgdConfig& cfg) {
  cfg.Validate();
  PerturbedCorpus pc;
  pc.reference_model_id = ref.Id();
  pc.config = cfg;
  std::vector<Waveform> ready;
  for (const Waveform& w : corpus) {
    Waveform fixed = FixLength(w, cfg.segment_s);
    const std::string why = Unattackable(ref, fixed, cfg);
    if (!why.empty()) {
      pc.skipped.push_back({w.source_id, why});
      continue;
    }
    ready.push_back(std::move(fixed));
  }
  const auto bsz = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t first = 0; first < ready.size(); first += bsz) {
    const std::size_t count = std::min(bsz, ready.size() - first);
    try {
      RunBatch(ref, ready, first, count, cfg, {}, pc.results);
    } catch (const Error&) {
      // Isolate the failing utterance(s).
      for (std::size_t k = first; k < first + count; ++k) {
        try {
          RunBatch(ref, ready, k, 1, cfg, {}, pc.results);
        } catch (const Error& e) {
          pc.skipped.push_back({ready[k].source_id, e.what()});
        }
      }
    }
  }
  return pc;
}

void WritePerturbedCorpus(const std::string& dir, const PerturbedCorpus& pc) {
  WriteCorpus(dir, pc.Waveforms());
  nlohmann::ordered_json j;
  j["format"] = "voxprotect-perturbation";
  j["version"] = 1;
  j["reference_model_id"] = pc.reference_model_id;
  j["config"] = {{"alpha", pc.config.alpha},         {"iterations", pc.config.iterations},
                 {"epsilon", pc.config.epsilon},     {"segment_s", pc.config.segment_s},
                 {"targeted", pc.config.targeted}};
  j["config_hash"] = pc.config.Hash();
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const PerturbationResult& r : pc.results) {
    items.push_back({{"source_id", r.adversarial.source_id},
                     {"delta_linf", r.delta_linf},
                     {"delta_l2", r.delta_l2},
                     {"loss_initial", r.loss_trace.front()},
                     {"loss_final", r.loss_trace.back()}});
  }
  j["utterances"] = std::move(items);
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (const SkippedInput& s : pc.skipped) {
    skipped.push_back({{"source_id", s.source_id}, {"reason", s.reason}});
  }
  j["skipped"] = std::move(skipped);
  text::WriteTextFile((std::filesystem::path(dir) / "provenance.json").string(), j.dump(2) + "\n");
}

}  // namespace voxprotect
