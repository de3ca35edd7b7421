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

// Internal DSP helpers shared by the feature extractors.

#ifndef VOXPROTECT_SRC_DSP_H_
#define VOXPROTECT_SRC_DSP_H_

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace voxprotect::dsp {

// Real-to-complex FFT of a fixed size backed by FFTW. Plan creation is
// serialized internally; Execute calls on distinct objects are independent.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  // Zero-pads (or truncates) `in` to size() and returns n/2 + 1 bins.
  std::vector<std::complex<double>> Forward(std::span<const double> in);
  // |X|^2 round trip: real inverse of a non-negative half spectrum,
  // unnormalized (multiply by 1/n for the usual scaling).
  std::vector<double> InversePower(std::span<const double> half_power);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

std::size_t NextPowerOfTwo(std::size_t n);

// Autocorrelation r[k] = sum_i x[i] x[i + k] for k in [0, max_lag].
std::vector<double> Autocorrelation(RealFft& fft, std::span<const double> x,
                                    std::size_t max_lag);

// Band-limited interpolation of an even sequence (r[-k] = r[k]) at a
// fractional index, with a Hann-windowed sinc of the given half width.
double SincInterpolateEven(std::span<const double> r, double t, int depth);
// Same for a general sequence; indices outside the data contribute zero.
double SincInterpolate(std::span<const double> x, double t, int depth);

// Golden-section search for the maximum of a unimodal function on
// [lo, hi]. Returns the argmax.
double GoldenMaximize(const std::function<double(double)>& f, double lo,
                      double hi, int iterations = 40);

double Mean(std::span<const double> x);
// Sample standard deviation (n - 1); zero for fewer than two values.
double SampleStd(std::span<const double> x);
double Median(std::vector<double> x);

// Resamples with a Hann-windowed sinc low-pass whose cutoff is the lower of
// the two Nyquist frequencies (times `cutoff_frac`).
std::vector<double> Resample(std::span<const double> x, double from_rate,
                             double to_rate, double cutoff_frac = 0.95,
                             int depth = 32);

}  // namespace voxprotect::dsp

#endif  // VOXPROTECT_SRC_DSP_H_
