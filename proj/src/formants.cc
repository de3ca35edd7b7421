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

// Formant tracking: pre-emphasis, decimation to 10 kHz, Burg LPC per voiced
// frame and root solving.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "dsp.h"
#include "voxprotect/features.h"

namespace voxprotect {
namespace {

constexpr double kAnalysisRateHz = 10000.0;
constexpr int kLpcOrder = 10;
constexpr double kPreEmphasisFromHz = 50.0;
constexpr double kWindowS = 0.050;
constexpr double kMinFormantHz = 90.0;
constexpr double kMaxFormantHz = 4800.0;
constexpr double kMaxBandwidthHz = 400.0;

// Roots of z^p - c0 z^(p-1) - ... - c(p-1) via the companion matrix.
std::vector<std::complex<double>> PredictorRoots(const std::vector<double>& coefs) {
  const int p = static_cast<int>(coefs.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < p; ++k) companion(0, k) = coefs[static_cast<std::size_t>(k)];
  for (int k = 1; k < p; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots;
  if (solver.info() != Eigen::Success) return roots;
  for (int k = 0; k < p; ++k) roots.push_back(solver.eigenvalues()[k]);
  return roots;
}

}  // namespace

std::vector<double> BurgLpc(std::span<const double> x, int order) {
  // Burg recursion in the layout of the classic memcof routine, 1-based.
  const std::size_t n = x.size();
  std::vector<double> coefs(static_cast<std::size_t>(order), 0.0);
  if (order <= 0 || n <= static_cast<std::size_t>(order) + 1) return coefs;
  std::vector<double> d(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<double> wkm(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<double> wk1(n + 1, 0.0), wk2(n + 1, 0.0);
  wk1[1] = x[0];
  wk2[n - 1] = x[n - 1];
  for (std::size_t j = 2; j <= n - 1; ++j) {
    wk1[j] = x[j - 1];
    wk2[j - 1] = x[j - 1];
  }
  for (std::size_t k = 1; k <= static_cast<std::size_t>(order); ++k) {
    double num = 0.0, denom = 0.0;
    for (std::size_t j = 1; j <= n - k; ++j) {
      num += wk1[j] * wk2[j];
      denom += wk1[j] * wk1[j] + wk2[j] * wk2[j];
    }
    if (!(denom > 0.0)) break;
    d[k] = 2.0 * num / denom;
    for (std::size_t i = 1; i < k; ++i) d[i] = wkm[i] - d[k] * wkm[k - i];
    if (k == static_cast<std::size_t>(order)) break;
    for (std::size_t i = 1; i <= k; ++i) wkm[i] = d[i];
    for (std::size_t j = 1; j + k + 1 <= n; ++j) {
      wk1[j] -= wkm[k] * wk2[j];
      wk2[j] = wk2[j + 1] - wkm[k] * wk1[j + 1];
    }
  }
  for (int k = 0; k < order; ++k) coefs[static_cast<std::size_t>(k)] = d[static_cast<std::size_t>(k) + 1];
  return coefs;
}

FormantMeans ComputeFormants(const Waveform& w, const PitchTrack& track) {
  FormantMeans out;
  const double rate = w.sample_rate_hz;
  if (w.samples.size() < 2 || track.VoicedCount() == 0) {
    out.flags |= kFlagNoFormants;
    return out;
  }
  const double mean = dsp::Mean(w.samples);
  const double alpha = std::exp(-2.0 * std::numbers::pi * kPreEmphasisFromHz / rate);
  std::vector<double> emphasized(w.samples.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double v = w.samples[i] - mean;
    emphasized[i] = v - alpha * prev;
    prev = v;
  }
  const std::vector<double> x = dsp::Resample(emphasized, rate, kAnalysisRateHz);

  const auto len = static_cast<std::size_t>(std::llround(kWindowS * kAnalysisRateHz));
  const std::vector<double> window = MakeWindow(WindowType::kGaussian, len);
  std::vector<double> f1, f2, f3;
  std::vector<double> frame(len);
  for (const PitchFrame& pf : track.frames) {
    if (!pf.voiced) continue;
    const long start = std::lround(pf.time_s * kAnalysisRateHz) - static_cast<long>(len / 2);
    if (start < 0 || start + static_cast<long>(len) > static_cast<long>(x.size())) continue;
    for (std::size_t i = 0; i < len; ++i) {
      frame[i] = x[static_cast<std::size_t>(start) + i] * window[i];
    }
    const std::vector<double> coefs = BurgLpc(frame, kLpcOrder);
    std::vector<double> freqs;
    for (const std::complex<double>& z : PredictorRoots(coefs)) {
      if (z.imag() <= 0.0) continue;
      const double f = std::arg(z) * kAnalysisRateHz / (2.0 * std::numbers::pi);
      const double bw = -std::log(std::abs(z)) * kAnalysisRateHz / std::numbers::pi;
      if (f > kMinFormantHz && f < kMaxFormantHz && bw < kMaxBandwidthHz) {
        freqs.push_back(f);
      }
    }
    if (freqs.size() < 3) continue;
    std::sort(freqs.begin(), freqs.end());
    f1.push_back(freqs[0]);
    f2.push_back(freqs[1]);
    f3.push_back(freqs[2]);
  }
  if (f1.empty()) {
    out.flags |= kFlagNoFormants;
    return out;
  }
  out.frames_used = f1.size();
  out.f1_hz = dsp::Median(f1);
  out.f2_hz = dsp::Median(f2);
  out.f3_hz = dsp::Median(f3);
  return out;
}

}  // namespace voxprotect
