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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "json.hpp"

#include "text_util.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

constexpr std::string_view kModelFormat = "voxprotect-linear-model";
constexpr int kModelVersion = 1;
// Columns whose spread is below this are treated as constant.
constexpr double kFrozenStd = 1e-12;

void CheckLabels(const FeatureMatrix& x, const std::vector<int>& y) {
  if (x.empty()) throw DataError("empty feature matrix");
  if (x.size() != y.size()) {
    throw DataError("feature matrix has " + std::to_string(x.size()) + " rows but " +
                    std::to_string(y.size()) + " labels");
  }
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      throw DataError("labels must be +1 or -1");
    }
  }
  if (!(pos && neg)) throw DataError("training data contains a single class");
}

std::vector<int> ResolveSubset(const FeatureMatrix& x, std::vector<int> subset) {
  const int width = static_cast<int>(x.front().size());
  for (const auto& row : x) {
    if (static_cast<int>(row.size()) != width) throw ShapeError("ragged feature matrix");
  }
  if (subset.empty()) {
    subset.resize(static_cast<std::size_t>(width));
    std::iota(subset.begin(), subset.end(), 0);
  }
  for (int c : subset) {
    if (c < 0 || c >= width) {
      throw DataError("feature column " + std::to_string(c) + " outside row width " +
                      std::to_string(width));
    }
  }
  return subset;
}

FeatureMatrix Columns(const FeatureMatrix& x, const std::vector<int>& subset) {
  FeatureMatrix out(x.size(), std::vector<double>(subset.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      out[i][j] = x[i][static_cast<std::size_t>(subset[j])];
    }
  }
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

FeatureMatrix ToMatrix(const std::vector<FeatureVector>& rows) {
  FeatureMatrix x;
  x.reserve(rows.size());
  for (const FeatureVector& v : rows) x.emplace_back(v.values.begin(), v.values.end());
  return x;
}

std::vector<int> GenderLabels(const std::vector<Waveform>& corpus) {
  std::vector<int> y;
  y.reserve(corpus.size());
  for (const Waveform& w : corpus) {
    if (!w.gender) throw DataError("unlabeled utterance " + w.source_id);
    y.push_back(GenderSign(*w.gender));
  }
  return y;
}

std::vector<int> GenderLabels(const std::vector<FeatureRow>& rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (const FeatureRow& r : rows) {
    if (!r.gender) throw DataError("unlabeled utterance " + r.source_id);
    y.push_back(GenderSign(*r.gender));
  }
  return y;
}

Standardizer Standardizer::Fit(const FeatureMatrix& x) {
  if (x.size() < 2) throw DataError("standardizer needs at least two rows");
  const std::size_t d = x.front().size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 1.0);
  s.frozen.assign(d, false);
  const double n = static_cast<double>(x.size());
  for (const auto& row : x) {
    if (row.size() != d) throw ShapeError("ragged feature matrix");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  }
  for (double& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& row : x) {
    for (std::size_t j = 0; j < d; ++j) var[j] += (row[j] - s.mean[j]) * (row[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    if (sd <= kFrozenStd * std::max(1.0, std::abs(s.mean[j]))) {
      s.frozen[j] = true;
      s.std[j] = 1.0;
    } else {
      s.std[j] = sd;
    }
  }
  return s;
}

std::vector<double> Standardizer::Apply(std::span<const double> row) const {
  if (row.size() != mean.size()) {
    throw ShapeError("standardizer expects " + std::to_string(mean.size()) + " columns, got " +
                     std::to_string(row.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = frozen[j] ? 0.0 : (row[j] - mean[j]) / std[j];
  }
  return out;
}

FeatureMatrix Standardizer::Apply(const FeatureMatrix& x) const {
  FeatureMatrix out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(Apply(row));
  return out;
}

double SvmPrimalObjective(const FeatureMatrix& xs, const std::vector<int>& y,
                          std::span<const double> w, double b, double c) {
  double obj = 0.5 * (Dot(w, w) + b * b);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double margin = y[i] * (Dot(w, xs[i]) + b);
    obj += c * std::max(0.0, 1.0 - margin);
  }
  return obj;
}

LinearModel TrainLinearSvm(const FeatureMatrix& x, const std::vector<int>& y,
                           const SvmOptions& opt, std::vector<int> subset) {
  CheckLabels(x, y);
  if (!(opt.c > 0.0)) throw ConfigError("svm: C must be positive");
  if (opt.max_epochs < 1) throw ConfigError("svm: max_epochs must be >= 1");
  LinearModel m;
  m.kind = ModelKind::kSvmHinge;
  m.c = opt.c;
  m.seed = opt.seed;
  m.feature_subset = ResolveSubset(x, std::move(subset));
  const FeatureMatrix cols = Columns(x, m.feature_subset);
  m.standardizer = Standardizer::Fit(cols);
  const FeatureMatrix xs = m.standardizer.Apply(cols);

  // Dual coordinate descent on the hinge loss with the bias folded in as a
  // constant unit feature (index d of w below).
  const std::size_t n = xs.size(), d = m.feature_subset.size();
  std::vector<double> w(d + 1, 0.0), alpha(n, 0.0), qii(n);
  for (std::size_t i = 0; i < n; ++i) qii[i] = Dot(xs[i], xs[i]) + 1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opt.seed);

  auto decision = [&](std::size_t i) {
    return Dot(std::span<const double>(w.data(), d), xs[i]) + w[d];
  };
  double gap = 0.0;
  int epoch = 0;
  while (epoch < opt.max_epochs) {
    ++epoch;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const double g = y[i] * decision(i) - 1.0;
      const double next = std::clamp(alpha[i] - g / qii[i], 0.0, opt.c);
      const double step = (next - alpha[i]) * y[i];
      if (step == 0.0) continue;
      alpha[i] = next;
      for (std::size_t j = 0; j < d; ++j) w[j] += step * xs[i][j];
      w[d] += step;
    }
    const double wn = Dot(w, w);
    double hinge = 0.0;
    for (std::size_t i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - y[i] * decision(i));
    const double primal = 0.5 * wn + opt.c * hinge;
    const double dual = std::accumulate(alpha.begin(), alpha.end(), 0.0) - 0.5 * wn;
    gap = primal - dual;
    if (gap <= opt.tolerance * std::max(1.0, std::abs(primal))) break;
  }
  m.weights.assign(w.begin(), w.begin() + static_cast<long>(d));
  m.bias = w[d];
  m.epochs = epoch;
  m.duality_gap = gap;
  m.model_id = LinearModelId(m);
  return m;
}

Prediction Predict(const LinearModel& m, std::span<const double> row) {
  std::vector<double> sub(m.feature_subset.size());
  for (std::size_t j = 0; j < sub.size(); ++j) {
    const int c = m.feature_subset[j];
    if (c < 0 || static_cast<std::size_t>(c) >= row.size()) {
      throw DataError("feature row lacks column " + std::to_string(c));
    }
    sub[j] = row[static_cast<std::size_t>(c)];
  }
  const std::vector<double> z = m.standardizer.Apply(sub);
  Prediction p;
  p.score = Dot(m.weights, z) + m.bias;
  p.label = p.score >= 0.0 ? Gender::kFemale : Gender::kMale;
  return p;
}

Prediction Predict(const LinearModel& m, const FeatureVector& v) {
  return Predict(m, std::span<const double>(v.values.data(), v.values.size()));
}

RfeRanking SvmRfe(const FeatureMatrix& x, const std::vector<int>& y, std::size_t n,
                  const SvmOptions& opt, std::vector<int> candidates) {
  CheckLabels(x, y);
  std::vector<int> alive = ResolveSubset(x, std::move(candidates));
  if (n < 1 || n > alive.size()) {
    throw ConfigError("rfe: target size must be in [1, " + std::to_string(alive.size()) + "]");
  }
  std::sort(alive.begin(), alive.end());
  RfeRanking r;
  LinearModel model = TrainLinearSvm(x, y, opt, alive);
  while (alive.size() > n) {
    std::size_t worst = 0;
    for (std::size_t j = 1; j < alive.size(); ++j) {
      // alive is sorted, so strict < keeps the lowest index on ties.
      if (model.weights[j] * model.weights[j] < model.weights[worst] * model.weights[worst]) {
        worst = j;
      }
    }
    r.elimination_order.push_back(alive[worst]);
    alive.erase(alive.begin() + static_cast<long>(worst));
    model = TrainLinearSvm(x, y, opt, alive);
  }
  r.num_eliminated = r.elimination_order.size();
  std::vector<std::size_t> idx(alive.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(model.weights[a]) > std::abs(model.weights[b]);
  });
  for (std::size_t i : idx) r.top_n.push_back(alive[i]);
  for (auto it = r.top_n.rbegin(); it != r.top_n.rend(); ++it) r.elimination_order.push_back(*it);
  return r;
}

LinearModel TrainRidgeSingle(const FeatureMatrix& x, const std::vector<int>& y, int column,
                             double lambda) {
  CheckLabels(x, y);
  if (!(lambda >= 0.0)) throw ConfigError("ridge: lambda must be >= 0");
  LinearModel m;
  m.kind = ModelKind::kRidge;
  m.lambda = lambda;
  m.feature_subset = ResolveSubset(x, {column});
  const FeatureMatrix cols = Columns(x, m.feature_subset);
  m.standardizer = Standardizer::Fit(cols);
  if (m.standardizer.frozen[0]) {
    throw DataError("ridge: column " + std::to_string(column) + " has zero variance");
  }
  double sxy = 0.0, sxx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const double z = (cols[i][0] - m.standardizer.mean[0]) / m.standardizer.std[0];
    sxy += z * y[i];
    sxx += z * z;
    sy += y[i];
  }
  if (!(sxx + lambda > 0.0)) throw NumericError("ridge: degenerate normal equation");
  m.weights = {sxy / (sxx + lambda)};
  m.bias = sy / static_cast<double>(cols.size());
  m.model_id = LinearModelId(m);
  return m;
}

std::string LinearModelId(const LinearModel& m) {
  LinearModel anon = m;
  anon.model_id.clear();
  anon.epochs = 0;
  anon.duality_gap = 0.0;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : SerializeModel(anon)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return (m.kind == ModelKind::kSvmHinge ? "svm-" : "ridge-") + std::string(buf);
}

std::string ModelKindName(ModelKind k) {
  return k == ModelKind::kSvmHinge ? "svm_hinge" : "ridge";
}

std::string SerializeModel(const LinearModel& m) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = ModelKindName(m.kind);
  j["model_id"] = m.model_id;
  j["feature_registry"] = kFeatureRegistryVersion;
  j["feature_subset"] = m.feature_subset;
  std::vector<std::string> names;
  for (int c : m.feature_subset) {
    names.push_back(c >= 0 && c < kNumFeatures ? std::string(FeatureName(c)) : std::string());
  }
  j["feature_names"] = names;
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["standardizer"] = {{"mean", m.standardizer.mean},
                       {"std", m.standardizer.std},
                       {"frozen", m.standardizer.frozen}};
  j["hyperparams"] = {{"C", m.c}, {"lambda", m.lambda}, {"seed", m.seed}};
  j["solver"] = {{"epochs", m.epochs}, {"duality_gap", m.duality_gap}};
  return j.dump(2) + "\n";
}

LinearModel DeserializeModel(const std::string& content) {
  LinearModel m;
  try {
    const nlohmann::json j = nlohmann::json::parse(content);
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw DataError("not a linear model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw DataError("unsupported linear model version " +
                      std::to_string(j.at("version").get<int>()));
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "svm_hinge") {
      m.kind = ModelKind::kSvmHinge;
    } else if (kind == "ridge") {
      m.kind = ModelKind::kRidge;
    } else {
      throw DataError("unknown model kind " + kind);
    }
    m.model_id = j.at("model_id").get<std::string>();
    m.feature_subset = j.at("feature_subset").get<std::vector<int>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const auto& s = j.at("standardizer");
    m.standardizer.mean = s.at("mean").get<std::vector<double>>();
    m.standardizer.std = s.at("std").get<std::vector<double>>();
    m.standardizer.frozen = s.at("frozen").get<std::vector<bool>>();
    const auto& h = j.at("hyperparams");
    m.c = h.at("C").get<double>();
    m.lambda = h.at("lambda").get<double>();
    m.seed = h.at("seed").get<std::uint64_t>();
    if (j.contains("solver")) {
      m.epochs = j["solver"].at("epochs").get<int>();
      m.duality_gap = j["solver"].at("duality_gap").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed linear model: ") + e.what());
  }
  const std::size_t d = m.feature_subset.size();
  if (m.weights.size() != d || m.standardizer.mean.size() != d ||
      m.standardizer.std.size() != d || m.standardizer.frozen.size() != d) {
    throw DataError("linear model: weights, subset and standardizer sizes differ");
  }
  return m;
}

void SaveModel(const std::string& path, const LinearModel& m) {
  text::WriteTextFile(path, SerializeModel(m));
}

LinearModel LoadModel(const std::string& path) {
  try {
    return DeserializeModel(text::ReadTextFile(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace voxprotect
