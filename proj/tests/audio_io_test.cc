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

#include "voxprotect/audio_io.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "test_support.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

using testing::ForAll;
using testing::Gen;

std::vector<double> Sine(double hz, std::size_t n, double amp = 0.8) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRateHz);
  }
  return v;
}

TEST(Gender, CodesRoundTrip) {
  EXPECT_EQ(ParseGender("F"), Gender::kFemale);
  EXPECT_EQ(ParseGender("m"), Gender::kMale);
  EXPECT_EQ(GenderCode(Gender::kMale), 'M');
  EXPECT_THROW(ParseGender("x"), DataError);
  EXPECT_EQ(GenderSign(Gender::kFemale), 1);
  EXPECT_EQ(GenderSign(Gender::kMale), -1);
}

TEST(Wav, Pcm16DecodesToUnitRange) {
  const auto bytes = EncodePcm16(Sine(440.0, 1600), 1, kSampleRateHz);
  const Waveform w = DecodeWav(bytes);
  ASSERT_EQ(w.samples.size(), 1600u);
  const auto [lo, hi] = std::minmax_element(w.samples.begin(), w.samples.end());
  EXPECT_DOUBLE_EQ(*lo, 0.0);
  EXPECT_DOUBLE_EQ(*hi, 1.0);
  EXPECT_FALSE(w.degenerate_range);
}

TEST(Wav, StereoIsAveragedBeforeNormalization) {
  const auto mono = Sine(300.0, 800);
  std::vector<double> inter;
  for (double v : mono) {
    inter.push_back(v);
    inter.push_back(-v * 0.5);  // average = 0.25 v
  }
  const Waveform a = DecodeWav(EncodePcm16(inter, 2, kSampleRateHz));
  std::vector<double> quarter(mono.size());
  std::transform(mono.begin(), mono.end(), quarter.begin(), [](double v) { return 0.25 * v; });
  const Waveform b = DecodeWav(EncodePcm16(quarter, 1, kSampleRateHz));
  ASSERT_EQ(a.samples.size(), b.samples.size());
  // PCM16 quantization of the two paths differs by at most a couple of LSBs
  // relative to the 0.4 peak-to-peak range.
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_NEAR(a.samples[i], b.samples[i], 3.0 / 32768.0 / 0.4);
  }
}

TEST(Wav, FloatRoundTripWithAffineScalingIsExactToFloatPrecision) {
  ForAll(20, 100, [](Gen& g) {
    Waveform w = g.Wave(g.Size(1, 3000));
    const Waveform back = DecodeWav(EncodeWav(w), WavScaling::kAffine);
    ASSERT_EQ(back.samples.size(), w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      EXPECT_NEAR(back.samples[i], w.samples[i], 6e-8);
    }
  });
}

TEST(Wav, RejectsMalformedInput) {
  auto bytes = EncodePcm16(Sine(200.0, 400), 1, kSampleRateHz);
  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + 30);
  EXPECT_THROW(DecodeWav(truncated), FormatError);
  std::vector<std::uint8_t> garbage(64, 7);
  EXPECT_THROW(DecodeWav(garbage), FormatError);
  EXPECT_THROW(DecodeWav(EncodePcm16(Sine(200.0, 400), 1, 8000)), RateError);
  EXPECT_THROW(DecodeWav(EncodePcm16({}, 1, kSampleRateHz)), EmptyInputError);
}

TEST(Wav, MissingFileNamesThePath) {
  try {
    LoadWav("/nonexistent/dir/a.wav");
    FAIL() << "expected an exception";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/a.wav"), std::string::npos);
  }
}

TEST(NormalizeMinMax, DegenerateRangeZeroesAndReportsFalse) {
  std::vector<double> v(10, 0.3);
  EXPECT_FALSE(NormalizeMinMax(v));
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(NormalizeMinMax, PropertyUnitRangeAndOrderPreserved) {
  ForAll(50, 200, [](Gen& g) {
    const std::size_t n = g.Size(2, 500);
    std::vector<double> v = g.Vector(n, -g.Uniform(0.1, 5.0), g.Uniform(0.1, 5.0));
    const std::vector<double> orig = v;
    ASSERT_TRUE(NormalizeMinMax(v));
    EXPECT_DOUBLE_EQ(*std::min_element(v.begin(), v.end()), 0.0);
    EXPECT_DOUBLE_EQ(*std::max_element(v.begin(), v.end()), 1.0);
    for (std::size_t i = 1; i < n; ++i) {
      if (orig[i] > orig[i - 1]) EXPECT_GE(v[i], v[i - 1]);
      if (orig[i] < orig[i - 1]) EXPECT_LE(v[i], v[i - 1]);
    }
  });
}

TEST(FixLength, PadsWithSilenceAndTruncates) {
  Waveform w;
  w.samples = {0.1, 0.9, 0.2};
  const Waveform padded = FixLength(w, 5.0 / kSampleRateHz);
  EXPECT_EQ(padded.samples, (std::vector<double>{0.1, 0.9, 0.2, kSilenceValue, kSilenceValue}));
  const Waveform cut = FixLength(w, 2.0 / kSampleRateHz);
  EXPECT_EQ(cut.samples, (std::vector<double>{0.1, 0.9}));
}

TEST(FixLength, PropertyLengthAndPrefix) {
  ForAll(40, 300, [](Gen& g) {
    const Waveform w = g.Wave(g.Size(1, 4000));
    const double s = g.Uniform(0.0001, 0.4);
    const Waveform f = FixLength(w, s);
    const auto want = static_cast<std::size_t>(std::llround(s * kSampleRateHz));
    ASSERT_EQ(f.samples.size(), want);
    const std::size_t common = std::min(want, w.samples.size());
    for (std::size_t i = 0; i < common; ++i) EXPECT_EQ(f.samples[i], w.samples[i]);
    for (std::size_t i = common; i < want; ++i) EXPECT_EQ(f.samples[i], kSilenceValue);
    EXPECT_EQ(f.source_id, w.source_id);
    EXPECT_EQ(f.gender, w.gender);
  });
}

TEST(RandomChunk, PropertyIsAContiguousSlice) {
  ForAll(40, 400, [](Gen& g) {
    const Waveform w = g.Wave(g.Size(100, 3000));
    const double s = g.Uniform(0.001, 0.15);
    const Waveform c = RandomChunk(w, s, g.rng());
    const auto want = static_cast<std::size_t>(std::llround(s * kSampleRateHz));
    ASSERT_EQ(c.samples.size(), want);
    if (want <= w.samples.size()) {
      const auto it = std::search(w.samples.begin(), w.samples.end(), c.samples.begin(),
                                  c.samples.end());
      EXPECT_NE(it, w.samples.end());
    } else {
      EXPECT_TRUE(std::equal(w.samples.begin(), w.samples.end(), c.samples.begin()));
    }
  });
}

TEST(Windows, ShapesAndSymmetry) {
  const auto hann = MakeWindow(WindowType::kHann, 101);
  EXPECT_NEAR(hann.front(), 0.0, 1e-15);
  EXPECT_NEAR(hann[50], 1.0, 1e-15);
  const auto gauss = MakeWindow(WindowType::kGaussian, 64);
  EXPECT_NEAR(gauss.front(), 0.0, 1e-12);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(gauss[i], gauss[63 - i], 1e-12);
  for (double v : MakeWindow(WindowType::kRectangular, 7)) EXPECT_EQ(v, 1.0);
}

TEST(Framing, PropertyCountAndDcRemoval) {
  ForAll(30, 500, [](Gen& g) {
    Waveform w = g.Wave(g.Size(800, 6000));
    const double frame_s = g.Uniform(0.01, 0.05);
    const double hop_s = g.Uniform(0.005, frame_s);
    const auto len = static_cast<std::size_t>(std::llround(frame_s * kSampleRateHz));
    const auto hop = static_cast<std::size_t>(std::llround(hop_s * kSampleRateHz));
    const std::size_t n = w.samples.size();
    const std::size_t expect = n < len ? 0 : (n - len) / hop + 1;
    EXPECT_EQ(FrameCount(n, len, hop), expect);
    if (expect == 0) return;
    const FrameSequence fs = FrameSignal(w, frame_s, hop_s, WindowType::kRectangular);
    ASSERT_EQ(fs.frames.size(), expect);
    for (const auto& f : fs.frames) {
      double mean = 0.0;
      for (double v : f) mean += v;
      EXPECT_NEAR(mean / static_cast<double>(f.size()), 0.0, 1e-12);
    }
  });
}

TEST(Framing, TooShortThrows) {
  Waveform w;
  w.samples.assign(10, 0.5);
  EXPECT_THROW(FrameSignal(w, 0.04, 0.01, WindowType::kHann), EmptyInputError);
}

TEST(Manifest, FormatParseRoundTrip) {
  Manifest m;
  m.entries.push_back({"wavs/a.wav", "spk1", Gender::kFemale, {"adaptation=default"}});
  m.entries.push_back({"wavs/b.wav", "spk2", std::nullopt, {}});
  m.entries.push_back({"wavs/c.wav", "spk2", Gender::kMale, {"perturbed", "ref=m5-x"}});
  const Manifest back = ParseManifest(FormatManifest(m));
  ASSERT_EQ(back.entries.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.entries[i].path, m.entries[i].path);
    EXPECT_EQ(back.entries[i].speaker_id, m.entries[i].speaker_id);
    EXPECT_EQ(back.entries[i].gender, m.entries[i].gender);
    EXPECT_EQ(back.entries[i].tags, m.entries[i].tags);
  }
}

TEST(Manifest, RejectsDuplicatesAndBadRows) {
  EXPECT_THROW(ParseManifest("path,speaker_id,gender,tags\na.wav,s,F,\na.wav,s,F,\n"),
               DataError);
  EXPECT_THROW(ParseManifest("path,speaker_id,gender,tags\na.wav,s,Q,\n"), DataError);
  EXPECT_THROW(ParseManifest("path,speaker_id,gender,tags\na.wav,s\n"), DataError);
}

TEST(Corpus, WriteLoadRoundTripKeepsPerturbedSamplesExact) {
  const auto dir = testing::ScratchDir("corpus");
  Gen g(7);
  std::vector<Waveform> corpus;
  for (int i = 0; i < 3; ++i) {
    Waveform w = g.Wave(1000);
    w.source_id = "u" + std::to_string(i);
    // Never touches 0 or 1, so min-max loading would rescale it.
    for (double& v : w.samples) v = 0.3 + 0.2 * v;
    if (i == 1) w.tags.insert("perturbed");
    corpus.push_back(w);
  }
  WriteCorpus(dir.string(), corpus);
  const auto back = LoadCorpus((dir / "manifest.csv").string());
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].source_id, corpus[i].source_id);
    EXPECT_EQ(back[i].gender, corpus[i].gender);
    EXPECT_EQ(back[i].tags, corpus[i].tags);
  }
  for (std::size_t k = 0; k < 1000; ++k) {
    EXPECT_NEAR(back[1].samples[k], corpus[1].samples[k], 6e-8);
  }
  // Untagged rows go through min-max and span the full range again.
  EXPECT_DOUBLE_EQ(*std::max_element(back[0].samples.begin(), back[0].samples.end()), 1.0);
}

}  // namespace
}  // namespace voxprotect
