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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "text_util.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

using text::SplitRow;
using text::Trim;

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool Has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void Seek(std::size_t pos) { pos_ = pos; }

  std::uint32_t U32() {
    Require(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::uint16_t U16() {
    Require(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] |
                                                 (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::string Tag() {
    Require(4);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }

 private:
  void Require(std::size_t n) const {
    if (!Has(n)) throw FormatError("truncated WAV data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}
void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back((v >> 8) & 0xFF);
}
void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::vector<std::uint8_t> RiffHeader(std::uint16_t format, int channels,
                                     int rate, int bits,
                                     std::size_t data_bytes) {
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  const std::uint32_t block = static_cast<std::uint32_t>(channels * bits / 8);
  PutTag(out, "RIFF");
  PutU32(out, static_cast<std::uint32_t>(36 + data_bytes));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, format);
  PutU16(out, static_cast<std::uint16_t>(channels));
  PutU32(out, static_cast<std::uint32_t>(rate));
  PutU32(out, static_cast<std::uint32_t>(rate) * block);
  PutU16(out, static_cast<std::uint16_t>(block));
  PutU16(out, static_cast<std::uint16_t>(bits));
  PutTag(out, "data");
  PutU32(out, static_cast<std::uint32_t>(data_bytes));
  return out;
}

std::vector<std::uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

char GenderCode(Gender g) { return g == Gender::kFemale ? 'F' : 'M'; }

Gender ParseGender(std::string_view code) {
  std::string c = Trim(code);
  if (c == "F" || c == "f") return Gender::kFemale;
  if (c == "M" || c == "m") return Gender::kMale;
  throw DataError("invalid gender label '" + c + "' (expected F or M)");
}

bool NormalizeMinMax(std::vector<double>& samples) {
  if (samples.empty()) return true;
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(samples.begin(), samples.end(), 0.0);
    return false;
  }
  const double scale = 1.0 / (hi - lo);
  for (double& s : samples) s = std::clamp((s - lo) * scale, 0.0, 1.0);
  return true;
}

Waveform DecodeWav(std::span<const std::uint8_t> bytes, WavScaling scaling) {
  ByteReader r(bytes);
  if (!r.Has(12) || r.Tag() != "RIFF") throw FormatError("missing RIFF tag");
  r.U32();
  if (r.Tag() != "WAVE") throw FormatError("missing WAVE tag");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  while (r.Has(8) && !have_data) {
    const std::string id = r.Tag();
    const std::uint32_t size = r.U32();
    const std::size_t body = r.pos();
    if (id == "fmt ") {
      if (size < 16) throw FormatError("fmt chunk too small");
      format = r.U16();
      channels = r.U16();
      rate = r.U32();
      r.U32();
      r.U16();
      bits = r.U16();
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("extensible fmt chunk too small");
        r.U16();  // cbSize
        r.U16();  // valid bits
        r.U32();  // channel mask
        format = r.U16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      const std::size_t avail = bytes.size() - body;
      data = bytes.subspan(body, std::min<std::size_t>(size, avail));
      have_data = true;
    }
    r.Seek(body + size + (size & 1));
  }
  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (!have_data) throw FormatError("missing data chunk");
  if (channels == 0) throw FormatError("zero channels");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw FormatError("unsupported WAV encoding (format " +
                      std::to_string(format) + ", " + std::to_string(bits) +
                      " bits); only PCM16 and float32 are accepted");
  }
  if (rate != static_cast<std::uint32_t>(kSampleRateHz)) {
    throw RateError("sample rate " + std::to_string(rate) +
                    " Hz is not 16000 Hz (no resampling is performed)");
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bits / 8;
  const std::size_t n = data.size() / frame_bytes;
  if (n == 0) throw EmptyInputError("WAV contains no samples");

  Waveform w;
  w.sample_rate_hz = static_cast<int>(rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data.data() + i * frame_bytes + c * bits / 8;
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        acc += v / 32768.0;
      } else {
        std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (p[1] << 8) |
                          (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
        acc += static_cast<double>(std::bit_cast<float>(u));
      }
    }
    w.samples[i] = acc / channels;
  }
  if (scaling == WavScaling::kMinMax) {
    w.degenerate_range = !NormalizeMinMax(w.samples);
  } else {
    for (double& s : w.samples) s = std::clamp((s + 1.0) * 0.5, 0.0, 1.0);
  }
  return w;
}

Waveform LoadWav(const std::string& path, WavScaling scaling) {
  std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  try {
    Waveform w = DecodeWav(bytes, scaling);
    w.source_id = std::filesystem::path(path).stem().string();
    return w;
  } catch (const DataError& e) {
    // Re-throw the same type with the file name attached.
    const std::string msg = path + ": " + e.what();
    if (dynamic_cast<const RateError*>(&e)) throw RateError(msg);
    if (dynamic_cast<const EmptyInputError*>(&e)) throw EmptyInputError(msg);
    throw FormatError(msg);
  }
}

std::vector<std::uint8_t> EncodeWav(const Waveform& w) {
  std::vector<std::uint8_t> out =
      RiffHeader(kFormatFloat, 1, w.sample_rate_hz, 32, w.samples.size() * 4);
  for (double s : w.samples) {
    const float v = static_cast<float>(2.0 * s - 1.0);
    PutU32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<std::uint8_t> EncodePcm16(std::span<const double> interleaved,
                                      int channels, int sample_rate_hz) {
  std::vector<std::uint8_t> out = RiffHeader(
      kFormatPcm, channels, sample_rate_hz, 16, interleaved.size() * 2);
  for (double s : interleaved) {
    const long v = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

void WriteWav(const std::string& path, const Waveform& w) {
  const std::vector<std::uint8_t> bytes = EncodeWav(w);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Waveform FixLength(const Waveform& w, double seconds) {
  if (!(seconds > 0.0)) throw ConfigError("FixLength: seconds must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(seconds * w.sample_rate_hz));
  Waveform out = w;
  out.samples.resize(n, kSilenceValue);
  return out;
}

Waveform RandomChunk(const Waveform& w, double seconds, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * w.sample_rate_hz));
  if (w.samples.size() <= n) return FixLength(w, seconds);
  std::uniform_int_distribution<std::size_t> offset_dist(0, w.samples.size() - n);
  const std::size_t offset = offset_dist(rng);
  Waveform out = w;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(offset + n));
  return out;
}

std::vector<double> MakeWindow(WindowType type, std::size_t length) {
  std::vector<double> win(length, 1.0);
  if (length < 2) return win;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const double x = static_cast<double>(i) / denom;
    switch (type) {
      case WindowType::kRectangular:
        break;
      case WindowType::kHann:
        win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * x);
        break;
      case WindowType::kGaussian: {
        // Zero at the edges, as in the usual speech-analysis variant.
        const double edge = std::exp(-12.0 * 0.25);
        const double g = std::exp(-12.0 * (x - 0.5) * (x - 0.5));
        win[i] = (g - edge) / (1.0 - edge);
        break;
      }
    }
  }
  return win;
}

std::size_t FrameCount(std::size_t n, std::size_t frame_len, std::size_t hop) {
  if (frame_len == 0 || hop == 0 || n < frame_len) return 0;
  return (n - frame_len) / hop + 1;
}

FrameSequence FrameSignal(const Waveform& w, double frame_s, double hop_s,
                          WindowType window) {
  if (!(hop_s > 0.0) || frame_s < hop_s) {
    throw ConfigError("FrameSignal: requires frame_s >= hop_s > 0");
  }
  const auto len = static_cast<std::size_t>(std::llround(frame_s * w.sample_rate_hz));
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * w.sample_rate_hz));
  const std::size_t count = FrameCount(w.samples.size(), len, hop);
  if (count == 0) {
    throw EmptyInputError("signal of " + std::to_string(w.samples.size()) +
                          " samples is shorter than one frame (" +
                          std::to_string(len) + ")");
  }
  const std::vector<double> win = MakeWindow(window, len);
  FrameSequence seq;
  seq.frame_s = frame_s;
  seq.hop_s = hop_s;
  seq.window = window;
  seq.frames.reserve(count);
  seq.start_times.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    const double* src = w.samples.data() + f * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += src[i];
    mean /= static_cast<double>(len);
    std::vector<double> frame(len);
    for (std::size_t i = 0; i < len; ++i) frame[i] = (src[i] - mean) * win[i];
    seq.frames.push_back(std::move(frame));
    seq.start_times.push_back(static_cast<double>(f * hop) / w.sample_rate_hz);
  }
  return seq;
}

Manifest ParseManifest(std::string_view text) {
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header_seen = false;
  std::unordered_set<std::string> seen_paths;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> cols = SplitRow(line, ',');
    if (!header_seen) {
      if (cols.size() != 4 || Trim(cols[0]) != "path" ||
          Trim(cols[1]) != "speaker_id" || Trim(cols[2]) != "gender" ||
          Trim(cols[3]) != "tags") {
        throw DataError("manifest header must be 'path,speaker_id,gender,tags'");
      }
      header_seen = true;
      continue;
    }
    if (cols.size() != 4) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": expected 4 columns, got " + std::to_string(cols.size()));
    }
    ManifestEntry e;
    e.path = Trim(cols[0]);
    e.speaker_id = Trim(cols[1]);
    if (e.path.empty()) {
      throw DataError("manifest line " + std::to_string(line_no) + ": empty path");
    }
    if (!seen_paths.insert(e.path).second) {
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": duplicate path " + e.path);
    }
    const std::string g = Trim(cols[2]);
    if (!g.empty()) e.gender = ParseGender(g);
    e.tags = text::ParseTags(cols[3]);
    m.entries.push_back(std::move(e));
  }
  if (!header_seen) throw DataError("manifest is missing its header row");
  return m;
}

Manifest ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseManifest(ss.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string FormatManifest(const Manifest& m) {
  std::ostringstream out;
  out << "path,speaker_id,gender,tags\n";
  for (const ManifestEntry& e : m.entries) {
    out << e.path << ',' << e.speaker_id << ',';
    if (e.gender) out << GenderCode(*e.gender);
    out << ',';
    out << text::JoinTags(e.tags) << '\n';
  }
  return out.str();
}

void WriteManifest(const std::string& path, const Manifest& m) {
  text::WriteTextFile(path, FormatManifest(m));
}

std::vector<Waveform> LoadCorpus(const Manifest& m, const std::string& base_dir) {
  std::vector<Waveform> corpus;
  corpus.reserve(m.entries.size());
  for (const ManifestEntry& e : m.entries) {
    std::filesystem::path p(e.path);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    const WavScaling scaling =
        e.tags.count("perturbed") ? WavScaling::kAffine : WavScaling::kMinMax;
    Waveform w = LoadWav(p.string(), scaling);
    w.speaker_id = e.speaker_id;
    w.gender = e.gender;
    w.tags = e.tags;
    corpus.push_back(std::move(w));
  }
  return corpus;
}

std::vector<Waveform> LoadCorpus(const std::string& manifest_path) {
  const Manifest m = ReadManifest(manifest_path);
  return LoadCorpus(m, std::filesystem::path(manifest_path).parent_path().string());
}

Manifest WriteCorpus(const std::string& dir, const std::vector<Waveform>& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "wavs");
  Manifest m;
  std::unordered_set<std::string> ids;
  for (const Waveform& w : corpus) {
    if (w.source_id.empty()) throw DataError("waveform without source_id");
    if (!ids.insert(w.source_id).second) {
      throw DataError("duplicate source_id " + w.source_id);
    }
    const std::string rel = "wavs/" + w.source_id + ".wav";
    WriteWav((fs::path(dir) / rel).string(), w);
    ManifestEntry e;
    e.path = rel;
    e.speaker_id = w.speaker_id.empty() ? w.source_id : w.speaker_id;
    e.gender = w.gender;
    e.tags = w.tags;
    m.entries.push_back(std::move(e));
  }
  WriteManifest((fs::path(dir) / "manifest.csv").string(), m);
  return m;
}

}  // namespace voxprotect
