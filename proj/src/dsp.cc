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

#include "dsp.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

namespace voxprotect::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

double Sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

double SincKernel(double d, int depth) {
  if (std::abs(d) >= depth) return 0.0;
  return Sinc(d) * (0.5 + 0.5 * std::cos(kPi * d / depth));
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  real_ = fftw_alloc_real(n_);
  auto* c = fftw_alloc_complex(n_ / 2 + 1);
  complex_ = c;
  forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, c, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), c, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  fftw_free(real_);
  fftw_free(static_cast<fftw_complex*>(complex_));
}

std::vector<std::complex<double>> RealFft::Forward(std::span<const double> in) {
  const std::size_t m = std::min(in.size(), n_);
  std::copy_n(in.begin(), m, real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_));
  auto* c = static_cast<fftw_complex*>(complex_);
  std::vector<std::complex<double>> out(n_ / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {c[k][0], c[k][1]};
  return out;
}

std::vector<double> RealFft::InversePower(std::span<const double> half_power) {
  auto* c = static_cast<fftw_complex*>(complex_);
  for (std::size_t k = 0; k < n_ / 2 + 1; ++k) {
    c[k][0] = k < half_power.size() ? half_power[k] : 0.0;
    c[k][1] = 0.0;
  }
  fftw_execute(static_cast<fftw_plan>(inverse_));
  return std::vector<double>(real_, real_ + n_);
}

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> Autocorrelation(RealFft& fft, std::span<const double> x,
                                    std::size_t max_lag) {
  const auto spec = fft.Forward(x);
  std::vector<double> power(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);
  std::vector<double> r = fft.InversePower(power);
  const double scale = 1.0 / static_cast<double>(fft.size());
  r.resize(std::min(max_lag + 1, r.size()));
  for (double& v : r) v *= scale;
  return r;
}

double SincInterpolateEven(std::span<const double> r, double t, int depth) {
  const long lo = static_cast<long>(std::floor(t)) - depth + 1;
  const long hi = static_cast<long>(std::floor(t)) + depth;
  double acc = 0.0;
  for (long k = lo; k <= hi; ++k) {
    const std::size_t idx = static_cast<std::size_t>(std::labs(k));
    if (idx >= r.size()) continue;
    acc += r[idx] * SincKernel(t - static_cast<double>(k), depth);
  }
  return acc;
}

double SincInterpolate(std::span<const double> x, double t, int depth) {
  const long lo = std::max(0L, static_cast<long>(std::floor(t)) - depth + 1);
  const long hi = std::min(static_cast<long>(x.size()) - 1,
                           static_cast<long>(std::floor(t)) + depth);
  double acc = 0.0;
  for (long k = lo; k <= hi; ++k) {
    acc += x[static_cast<std::size_t>(k)] * SincKernel(t - static_cast<double>(k), depth);
  }
  return acc;
}

double GoldenMaximize(const std::function<double(double)>& f, double lo,
                      double hi, int iterations) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

double Mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double SampleStd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = Mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

double Median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

std::vector<double> Resample(std::span<const double> x, double from_rate,
                             double to_rate, double cutoff_frac, int depth) {
  const double ratio = to_rate / from_rate;
  const auto n_out = static_cast<std::size_t>(
      std::floor(static_cast<double>(x.size()) * ratio));
  // Cutoff relative to the input Nyquist.
  const double cutoff = cutoff_frac * std::min(1.0, ratio);
  const double half_width = depth / cutoff;
  auto tap = [&](double d) {
    const double win = 0.5 + 0.5 * std::cos(kPi * d / half_width);
    return cutoff * Sinc(cutoff * d) * win;
  };

  // Integral rates repeat the same fractional offsets every `phases`
  // outputs, so the kernel can be tabulated once per phase.
  const auto from_i = static_cast<long>(std::llround(from_rate));
  const auto to_i = static_cast<long>(std::llround(to_rate));
  const bool integral = std::abs(from_rate - static_cast<double>(from_i)) < 1e-9 &&
                        std::abs(to_rate - static_cast<double>(to_i)) < 1e-9;
  const long g = integral ? std::gcd(from_i, to_i) : 0;
  const long phases = integral ? to_i / g : 0;
  const long step = integral ? from_i / g : 0;
  const long reach = static_cast<long>(std::ceil(half_width)) + 1;

  std::vector<double> out(n_out);
  if (integral && phases <= 4096) {
    std::vector<std::vector<double>> table(static_cast<std::size_t>(phases));
    for (long ph = 0; ph < phases; ++ph) {
      const double t = static_cast<double>(ph * step) / static_cast<double>(phases);
      const long base = (ph * step) / phases;
      auto& row = table[static_cast<std::size_t>(ph)];
      row.resize(static_cast<std::size_t>(2 * reach + 1));
      for (long k = -reach; k <= reach; ++k) {
        const double d = t - static_cast<double>(base + k);
        row[static_cast<std::size_t>(k + reach)] = std::abs(d) < half_width ? tap(d) : 0.0;
      }
    }
    const long n_in = static_cast<long>(x.size());
    for (std::size_t j = 0; j < n_out; ++j) {
      const long jj = static_cast<long>(j);
      const long ph = jj % phases;
      const long base = (jj / phases) * step + (ph * step) / phases;
      const auto& row = table[static_cast<std::size_t>(ph)];
      const long lo = std::max(-reach, -base);
      const long hi = std::min(reach, n_in - 1 - base);
      double acc = 0.0;
      for (long k = lo; k <= hi; ++k) {
        acc += x[static_cast<std::size_t>(base + k)] * row[static_cast<std::size_t>(k + reach)];
      }
      out[j] = acc;
    }
    return out;
  }

  for (std::size_t j = 0; j < n_out; ++j) {
    const double t = static_cast<double>(j) / ratio;
    const long lo = std::max(0L, static_cast<long>(std::ceil(t - half_width)));
    const long hi = std::min(static_cast<long>(x.size()) - 1,
                             static_cast<long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long k = lo; k <= hi; ++k) acc += x[static_cast<std::size_t>(k)] * tap(t - static_cast<double>(k));
    out[j] = acc;
  }
  return out;
}

}  // namespace voxprotect::dsp
