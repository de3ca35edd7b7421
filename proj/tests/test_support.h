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

// Hand-rolled property-test generators and small fixtures shared by the
// unit tests.

#ifndef VOXPROTECT_TESTS_TEST_SUPPORT_H_
#define VOXPROTECT_TESTS_TEST_SUPPORT_H_

#include <gtest/gtest.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "voxprotect/audio_io.h"
#include "voxprotect/neuralnet.h"

namespace voxprotect::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : seed_(seed), rng_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& rng() { return rng_; }

  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::size_t Size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double Normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng_);
  }
  bool Coin() { return Int(0, 1) == 1; }
  std::vector<double> Vector(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = Uniform(lo, hi);
    return v;
  }
  // Waveform in [0, 1] with a random label.
  Waveform Wave(std::size_t n) {
    Waveform w;
    w.samples = Vector(n, 0.0, 1.0);
    w.gender = Coin() ? Gender::kFemale : Gender::kMale;
    w.source_id = "g" + std::to_string(Int(0, 1 << 30));
    return w;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

// Runs `body` on `trials` generators seeded base, base + 1, ...; the first
// failing seed is reported and stops the loop.
template <typename F>
void ForAll(int trials, std::uint64_t base_seed, F body) {
  for (int t = 0; t < trials; ++t) {
    Gen g(base_seed + static_cast<std::uint64_t>(t));
    SCOPED_TRACE("property trial seed " + std::to_string(g.seed()));
    body(g);
    if (::testing::Test::HasFailure()) return;
  }
}

// A small network that keeps gradient checks and training tests fast.
inline M5Config TinyConfig() {
  M5Config c;
  c.blocks = {{6, 16, 4}, {6, 3, 1}, {8, 3, 1}};
  c.desk_scale = false;
  c.pool = 4;
  return c;
}

// Fresh directory under the GoogleTest temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  std::string leaf = name + "_" + (info ? info->name() : "x") + "_" +
                     std::to_string(counter.fetch_add(1));
  std::filesystem::path p = std::filesystem::path(::testing::TempDir()) / "voxprotect" / leaf;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace voxprotect::testing

#endif  // VOXPROTECT_TESTS_TEST_SUPPORT_H_
