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

#include "voxprotect/config.h"

#include <yaml-cpp/yaml.h>

#include <functional>
#include <type_traits>

#include "text_util.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

struct Entry {
  ConfigKey key;
  std::function<void(RunConfig&, const YAML::Node&)> set;
  std::function<YAML::Node(const RunConfig&)> get;
};

template <typename T>
YAML::Node ToNode(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return YAML::Node(text::FormatDouble(v));
  } else {
    return YAML::Node(v);
  }
}

template <typename T>
T FromNode(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError("config key '" + key + "' expects a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value '" + n.Scalar() + "'");
  }
}

template <typename T, typename Access>
Entry Field(std::string name, std::string help, Access access) {
  Entry e;
  e.key = {name, std::move(help)};
  e.set = [access, name](RunConfig& c, const YAML::Node& n) { access(c) = FromNode<T>(n, name); };
  e.get = [access](const RunConfig& c) { return ToNode<T>(access(const_cast<RunConfig&>(c))); };
  return e;
}

template <typename T, std::size_t N, typename Access>
Entry ArrayField(std::string name, std::string help, Access access) {
  Entry e;
  e.key = {name, std::move(help)};
  e.set = [access, name](RunConfig& c, const YAML::Node& n) {
    if (!n.IsSequence() || n.size() != N) {
      throw ConfigError("config key '" + name + "' expects a list of " + std::to_string(N));
    }
    auto& dst = access(c);
    for (std::size_t i = 0; i < N; ++i) dst[i] = FromNode<T>(n[i], name);
  };
  e.get = [access](const RunConfig& c) {
    YAML::Node n(YAML::NodeType::Sequence);
    n.SetStyle(YAML::EmitterStyle::Flow);
    for (const T& v : access(const_cast<RunConfig&>(c))) n.push_back(ToNode<T>(v));
    return n;
  };
  return e;
}

template <typename Access>
Entry RangeField(std::string name, std::string help, Access access) {
  Entry e;
  e.key = {name, std::move(help)};
  e.set = [access, name](RunConfig& c, const YAML::Node& n) {
    if (!n.IsSequence() || n.size() != 2) {
      throw ConfigError("config key '" + name + "' expects [lo, hi]");
    }
    access(c) = {FromNode<double>(n[0], name), FromNode<double>(n[1], name)};
  };
  e.get = [access](const RunConfig& c) {
    const Range& r = access(const_cast<RunConfig&>(c));
    YAML::Node n(YAML::NodeType::Sequence);
    n.SetStyle(YAML::EmitterStyle::Flow);
    n.push_back(text::FormatDouble(r.lo));
    n.push_back(text::FormatDouble(r.hi));
    return n;
  };
  return e;
}

template <typename Access>
Entry StringList(std::string name, std::string help, Access access) {
  Entry e;
  e.key = {name, std::move(help)};
  e.set = [access, name](RunConfig& c, const YAML::Node& n) {
    std::vector<std::string>& dst = access(c);
    dst.clear();
    if (n.IsScalar()) {
      dst.push_back(n.Scalar());
      return;
    }
    if (!n.IsSequence()) throw ConfigError("config key '" + name + "' expects a list");
    for (const YAML::Node& v : n) dst.push_back(FromNode<std::string>(v, name));
  };
  e.get = [access](const RunConfig& c) {
    YAML::Node n(YAML::NodeType::Sequence);
    n.SetStyle(YAML::EmitterStyle::Flow);
    for (const std::string& v : access(const_cast<RunConfig&>(c))) n.push_back(v);
    return n;
  };
  return e;
}

Entry BlocksField() {
  Entry e;
  e.key = {"model.blocks",
           "conv blocks as [out_channels, kernel, stride] triples (before desk scaling)"};
  e.set = [](RunConfig& c, const YAML::Node& n) {
    if (!n.IsSequence() || n.size() == 0) {
      throw ConfigError("config key 'model.blocks' expects a non-empty list of triples");
    }
    c.model.blocks.clear();
    for (const YAML::Node& b : n) {
      if (!b.IsSequence() || b.size() != 3) {
        throw ConfigError("config key 'model.blocks' expects [out_channels, kernel, stride]");
      }
      c.model.blocks.push_back({FromNode<int>(b[0], "model.blocks"),
                                FromNode<int>(b[1], "model.blocks"),
                                FromNode<int>(b[2], "model.blocks")});
    }
  };
  e.get = [](const RunConfig& c) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (const ConvBlockSpec& b : c.model.blocks) {
      YAML::Node t(YAML::NodeType::Sequence);
      t.SetStyle(YAML::EmitterStyle::Flow);
      t.push_back(b.out_channels);
      t.push_back(b.kernel);
      t.push_back(b.stride);
      n.push_back(t);
    }
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
  };
  return e;
}

Entry PulseShapeField() {
  Entry e;
  e.key = {"synth.pulse_shape", "glottal source: rosenberg or impulse"};
  e.set = [](RunConfig& c, const YAML::Node& n) {
    const std::string v = FromNode<std::string>(n, "synth.pulse_shape");
    if (v == "rosenberg") {
      c.synth.pulse_shape = PulseShape::kRosenberg;
    } else if (v == "impulse") {
      c.synth.pulse_shape = PulseShape::kImpulse;
    } else {
      throw ConfigError("config key 'synth.pulse_shape' must be rosenberg or impulse");
    }
  };
  e.get = [](const RunConfig& c) {
    return YAML::Node(c.synth.pulse_shape == PulseShape::kRosenberg ? "rosenberg" : "impulse");
  };
  return e;
}

std::vector<Entry> BuildEntries() {
  using R = RunConfig;
  std::vector<Entry> v;
  v.push_back(Field<std::uint64_t>("seed", "master seed for synthesis, training and SVM shuffling",
                                   [](R& c) -> auto& { return c.seed; }));

  v.push_back(Field<double>("pitch.floor_hz", "lowest pitch candidate (Hz)",
                            [](R& c) -> auto& { return c.pitch.floor_hz; }));
  v.push_back(Field<double>("pitch.ceiling_hz", "highest pitch candidate (Hz)",
                            [](R& c) -> auto& { return c.pitch.ceiling_hz; }));
  v.push_back(Field<double>("pitch.frame_s", "analysis frame length (s)",
                            [](R& c) -> auto& { return c.pitch.frame_s; }));
  v.push_back(Field<double>("pitch.hop_s", "analysis hop (s)",
                            [](R& c) -> auto& { return c.pitch.hop_s; }));
  v.push_back(Field<double>("pitch.voicing_threshold", "minimum normalized autocorrelation peak",
                            [](R& c) -> auto& { return c.pitch.voicing_threshold; }));
  v.push_back(Field<double>("pitch.silence_threshold_db",
                            "frames this far below the loudest frame are unvoiced (dB)",
                            [](R& c) -> auto& { return c.pitch.silence_threshold_db; }));
  v.push_back(Field<double>("pitch.octave_cost", "penalty per octave of lag",
                            [](R& c) -> auto& { return c.pitch.octave_cost; }));

  v.push_back(Field<int>("synth.n_per_gender", "utterances per gender",
                         [](R& c) -> auto& { return c.synth.n_per_gender; }));
  v.push_back(Field<double>("synth.f0_f_mean", "female f0 mean (Hz)",
                            [](R& c) -> auto& { return c.synth.f0_f.mean; }));
  v.push_back(Field<double>("synth.f0_f_std", "female f0 spread (Hz)",
                            [](R& c) -> auto& { return c.synth.f0_f.std; }));
  v.push_back(Field<double>("synth.f0_m_mean", "male f0 mean (Hz)",
                            [](R& c) -> auto& { return c.synth.f0_m.mean; }));
  v.push_back(Field<double>("synth.f0_m_std", "male f0 spread (Hz)",
                            [](R& c) -> auto& { return c.synth.f0_m.std; }));
  v.push_back(RangeField("synth.jitter", "period jitter fraction range [lo, hi]",
                         [](R& c) -> auto& { return c.synth.jitter; }));
  v.push_back(RangeField("synth.shimmer", "amplitude shimmer fraction range [lo, hi]",
                         [](R& c) -> auto& { return c.synth.shimmer; }));
  v.push_back(RangeField("synth.noise", "noise RMS fraction range [lo, hi]",
                         [](R& c) -> auto& { return c.synth.noise; }));
  v.push_back(ArrayField<double, 3>("synth.formants_f", "female F1-F3 targets (Hz)",
                                    [](R& c) -> auto& { return c.synth.formants_f_hz; }));
  v.push_back(ArrayField<double, 3>("synth.formants_m", "male F1-F3 targets (Hz)",
                                    [](R& c) -> auto& { return c.synth.formants_m_hz; }));
  v.push_back(ArrayField<double, 3>("synth.formant_bw", "formant bandwidths (Hz)",
                                    [](R& c) -> auto& { return c.synth.formant_bw_hz; }));
  v.push_back(Field<double>("synth.formant_spread", "per-utterance formant spread (fraction)",
                            [](R& c) -> auto& { return c.synth.formant_spread; }));
  v.push_back(Field<double>("synth.duration_s", "utterance length (s)",
                            [](R& c) -> auto& { return c.synth.duration_s; }));
  v.push_back(PulseShapeField());
  v.push_back(Field<std::string>("synth.adaptation",
                                 "voice-adaptation proxy: default, overlyhappy, lowrobot, highrobot",
                                 [](R& c) -> auto& { return c.synth.adaptation; }));
  v.push_back(Field<std::string>("synth.id_prefix", "prefix of generated source ids",
                                 [](R& c) -> auto& { return c.synth.id_prefix; }));

  v.push_back(BlocksField());
  v.push_back(Field<bool>("model.desk_scale", "divide channel counts by 8",
                          [](R& c) -> auto& { return c.model.desk_scale; }));
  v.push_back(Field<int>("model.pool", "max-pool width",
                         [](R& c) -> auto& { return c.model.pool; }));
  v.push_back(Field<double>("model.bn_momentum", "batch-norm running-stat momentum",
                            [](R& c) -> auto& { return c.model.bn_momentum; }));
  v.push_back(Field<double>("model.bn_eps", "batch-norm epsilon",
                            [](R& c) -> auto& { return c.model.bn_eps; }));

  v.push_back(Field<double>("train.max_lr", "peak learning rate",
                            [](R& c) -> auto& { return c.train.max_lr; }));
  v.push_back(Field<double>("train.min_lr", "base learning rate",
                            [](R& c) -> auto& { return c.train.min_lr; }));
  v.push_back(Field<int>("train.cycle_steps", "steps per triangular LR cycle",
                         [](R& c) -> auto& { return c.train.cycle_steps; }));
  v.push_back(Field<int>("train.total_steps", "optimizer steps",
                         [](R& c) -> auto& { return c.train.total_steps; }));
  v.push_back(Field<int>("train.batch_size", "utterances per step",
                         [](R& c) -> auto& { return c.train.batch_size; }));
  v.push_back(Field<double>("train.chunk_s", "random training chunk (s)",
                            [](R& c) -> auto& { return c.train.chunk_s; }));
  v.push_back(Field<double>("train.eval_s", "evaluation segment (s)",
                            [](R& c) -> auto& { return c.train.eval_s; }));
  v.push_back(Field<double>("train.beta1", "Adam beta1",
                            [](R& c) -> auto& { return c.train.beta1; }));
  v.push_back(Field<double>("train.beta2", "Adam beta2",
                            [](R& c) -> auto& { return c.train.beta2; }));
  v.push_back(Field<double>("train.adam_eps", "Adam epsilon",
                            [](R& c) -> auto& { return c.train.adam_eps; }));

  v.push_back(Field<double>("pgd.alpha", "step size per iteration",
                            [](R& c) -> auto& { return c.pgd.alpha; }));
  v.push_back(Field<int>("pgd.iterations", "PGD iterations",
                         [](R& c) -> auto& { return c.pgd.iterations; }));
  v.push_back(Field<double>("pgd.epsilon", "L-infinity bound on the cumulative perturbation",
                            [](R& c) -> auto& { return c.pgd.epsilon; }));
  v.push_back(Field<double>("pgd.segment_s", "attacked segment (s)",
                            [](R& c) -> auto& { return c.pgd.segment_s; }));
  v.push_back(Field<bool>("pgd.targeted", "push towards the opposite gender instead",
                          [](R& c) -> auto& { return c.pgd.targeted; }));
  v.push_back(Field<int>("pgd.batch_size", "utterances attacked together",
                         [](R& c) -> auto& { return c.pgd.batch_size; }));

  v.push_back(Field<double>("svm.c", "soft-margin constant",
                            [](R& c) -> auto& { return c.svm.options.c; }));
  v.push_back(Field<double>("svm.tolerance", "relative duality-gap stopping tolerance",
                            [](R& c) -> auto& { return c.svm.options.tolerance; }));
  v.push_back(Field<int>("svm.max_epochs", "coordinate-descent epoch cap",
                         [](R& c) -> auto& { return c.svm.options.max_epochs; }));
  v.push_back(Field<std::string>("svm.features", "train-svm feature set: all or rfe",
                                 [](R& c) -> auto& { return c.svm.features; }));
  v.push_back(Field<int>("svm.rfe_top_n", "features kept by RFE",
                         [](R& c) -> auto& { return c.svm.rfe_top_n; }));
  v.push_back(Field<double>("svm.ridge_lambda", "ridge penalty",
                            [](R& c) -> auto& { return c.svm.ridge_lambda; }));
  v.push_back(Field<std::string>("svm.ridge_feature", "feature used by train-ridge",
                                 [](R& c) -> auto& { return c.svm.ridge_feature; }));

  v.push_back(Field<double>("eval.segment_s", "evaluated prefix of each utterance (s)",
                            [](R& c) -> auto& { return c.eval.segment_s; }));
  v.push_back(Field<std::string>("eval.cache_dir", "perturbed-corpus cache (empty disables)",
                                 [](R& c) -> auto& { return c.eval.cache_dir; }));

  v.push_back(Field<std::string>("paths.manifest", "input corpus manifest",
                                 [](R& c) -> auto& { return c.paths.manifest; }));
  v.push_back(Field<std::string>("paths.perturbed", "perturbed corpus manifest",
                                 [](R& c) -> auto& { return c.paths.perturbed; }));
  v.push_back(Field<std::string>("paths.features", "training feature table",
                                 [](R& c) -> auto& { return c.paths.features; }));
  v.push_back(Field<std::string>("paths.out", "output directory",
                                 [](R& c) -> auto& { return c.paths.out; }));
  v.push_back(StringList("paths.models", "model files (.ckpt CNN or .json linear)",
                         [](R& c) -> auto& { return c.paths.models; }));
  v.push_back(StringList("paths.ref_models", "reference CNN checkpoints for attacks",
                         [](R& c) -> auto& { return c.paths.ref_models; }));
  v.push_back(StringList("paths.adaptation_manifests",
                         "extra corpora pooled into the adaptations report",
                         [](R& c) -> auto& { return c.paths.adaptation_manifests; }));
  return v;
}

const std::vector<Entry>& Entries() {
  static const std::vector<Entry> entries = BuildEntries();
  return entries;
}

const Entry& Find(const std::string& key) {
  for (const Entry& e : Entries()) {
    if (e.key.name == key) return e;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void Walk(RunConfig& cfg, const YAML::Node& node, const std::string& prefix) {
  for (const auto& kv : node) {
    const std::string name = kv.first.as<std::string>();
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (kv.second.IsMap()) {
      Walk(cfg, kv.second, key);
    } else if (kv.second.IsNull()) {
      throw ConfigError("config key '" + key + "' has no value");
    } else {
      Find(key).set(cfg, kv.second);
    }
  }
}

}  // namespace

RunConfig RunConfig::Defaults() {
  RunConfig c;
  c.train.total_steps = 400;
  c.train.cycle_steps = 400;
  return c;
}

void RunConfig::Validate() const {
  pitch.Validate();
  synth.Validate();
  model.Validate();
  train.Validate();
  pgd.Validate();
  if (!(svm.options.c > 0.0)) throw ConfigError("svm: c must be positive");
  if (!(svm.options.tolerance > 0.0)) throw ConfigError("svm: tolerance must be positive");
  if (svm.options.max_epochs < 1) throw ConfigError("svm: max_epochs must be >= 1");
  if (svm.features != "all" && svm.features != "rfe") {
    throw ConfigError("svm: features must be 'all' or 'rfe'");
  }
  if (svm.rfe_top_n < 1 || svm.rfe_top_n > kNumFeatures) {
    throw ConfigError("svm: rfe_top_n must be in [1, " + std::to_string(kNumFeatures) + "]");
  }
  if (!(svm.ridge_lambda >= 0.0)) throw ConfigError("svm: ridge_lambda must be >= 0");
  try {
    FeatureIndex(svm.ridge_feature);
  } catch (const DataError&) {
    throw ConfigError("svm: unknown ridge_feature '" + svm.ridge_feature + "'");
  }
  if (!(eval.segment_s > 0.0)) throw ConfigError("eval: segment_s must be positive");
}

void RunConfig::ApplySeed() {
  synth.seed = seed;
  train.seed = seed;
  svm.options.seed = seed;
}

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const Entry& e : Entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

RunConfig ParseRunConfig(std::string_view yaml, RunConfig base) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (root.IsNull()) return base;
  if (!root.IsMap()) throw ConfigError("config must be a mapping of sections");
  Walk(base, root, "");
  return base;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::string text;
  try {
    text = text::ReadTextFile(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  try {
    return ParseRunConfig(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void SetConfigValue(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Entry& e = Find(key);
  YAML::Node n;
  try {
    n = YAML::Load(value);
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has an unparsable value '" + value + "'");
  }
  if (n.IsNull()) n = YAML::Node(value);
  e.set(cfg, n);
}

std::string DumpRunConfig(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  std::string section;
  for (const Entry& e : Entries()) {
    const std::string& name = e.key.name;
    const auto dot = name.find('.');
    const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << YAML::EndMap;
      if (!sec.empty()) out << YAML::Key << sec << YAML::Value << YAML::BeginMap;
      section = sec;
    }
    out << YAML::Key << (dot == std::string::npos ? name : name.substr(dot + 1)) << YAML::Value
        << e.get(cfg);
  }
  if (!section.empty()) out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace voxprotect
