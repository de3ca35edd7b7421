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

// Binary M5 checkpoints (little-endian; see docs/checkpoint_format.md).

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "voxprotect/error.h"
#include "voxprotect/neuralnet.h"

namespace voxprotect {
namespace {

constexpr char kMagic[4] = {'V', 'X', 'M', '5'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename V>
  void Put(V v) {
    static_assert(std::is_arithmetic_v<V>);
    std::uint8_t buf[sizeof(V)];
    std::memcpy(buf, &v, sizeof(V));
    Bytes(buf, sizeof(V));
  }
  void String(const std::string& s) {
    Put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void Bytes(void* p, std::size_t n) {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint is truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <typename V>
  V Get() {
    V v;
    Bytes(&v, sizeof(V));
    return v;
  }
  std::string String() {
    const auto n = Get<std::uint32_t>();
    if (n > 4096) throw FormatError("checkpoint string too long");
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

void PutTensors(Writer& w, const std::vector<ParamSlice>& layout, const std::vector<float>& v) {
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(layout.size()));
  for (const ParamSlice& s : layout) {
    w.String(s.name);
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(s.shape.size()));
    for (std::size_t d : s.shape) w.Put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < s.size; ++i) w.Put<float>(v[s.offset + i]);
  }
}

void GetTensors(Reader& r, const std::vector<ParamSlice>& layout, std::vector<float>& v) {
  const auto count = r.Get<std::uint32_t>();
  if (count != layout.size()) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " tensors, config implies " +
                      std::to_string(layout.size()));
  }
  for (const ParamSlice& s : layout) {
    const std::string name = r.String();
    if (name != s.name) throw FormatError("checkpoint tensor " + name + ", expected " + s.name);
    const auto ndim = r.Get<std::uint32_t>();
    if (ndim != s.shape.size()) throw FormatError("rank mismatch for " + s.name);
    for (std::size_t d : s.shape) {
      if (r.Get<std::uint32_t>() != d) throw FormatError("shape mismatch for " + s.name);
    }
    for (std::size_t i = 0; i < s.size; ++i) v[s.offset + i] = r.Get<float>();
  }
}

}  // namespace

std::vector<std::uint8_t> EncodeCheckpoint(const M5<float>& m) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  Writer w;
  w.Bytes(kMagic, 4);
  w.Put<std::uint32_t>(kVersion);
  const M5Config& c = m.config();
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(c.blocks.size()));
  for (const ConvBlockSpec& b : c.blocks) {
    w.Put<std::int32_t>(b.out_channels);
    w.Put<std::int32_t>(b.kernel);
    w.Put<std::int32_t>(b.stride);
  }
  w.Put<std::uint8_t>(c.desk_scale ? 1 : 0);
  w.Put<std::int32_t>(c.pool);
  w.Put<double>(c.bn_momentum);
  w.Put<double>(c.bn_eps);
  w.String(m.model_id);
  PutTensors(w, m.parameter_layout(), m.parameters());
  PutTensors(w, m.running_layout(), m.running_stats());
  return w.Take();
}

M5<float> DecodeCheckpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.Bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not an M5 checkpoint");
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  M5Config c;
  const auto nblocks = r.Get<std::uint32_t>();
  if (nblocks == 0 || nblocks > 64) throw FormatError("implausible block count");
  c.blocks.clear();
  for (std::uint32_t i = 0; i < nblocks; ++i) {
    ConvBlockSpec b;
    b.out_channels = r.Get<std::int32_t>();
    b.kernel = r.Get<std::int32_t>();
    b.stride = r.Get<std::int32_t>();
    c.blocks.push_back(b);
  }
  c.desk_scale = r.Get<std::uint8_t>() != 0;
  c.pool = r.Get<std::int32_t>();
  c.bn_momentum = r.Get<double>();
  c.bn_eps = r.Get<double>();
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config invalid: ") + e.what());
  }
  M5<float> m(c, 0);
  m.model_id = r.String();
  GetTensors(r, m.parameter_layout(), m.parameters());
  GetTensors(r, m.running_layout(), m.running_stats());
  if (!r.AtEnd()) throw FormatError("trailing bytes after checkpoint");
  m.SetMode(Mode::kEval);
  return m;
}

void SaveCheckpoint(const std::string& path, const M5<float>& m) {
  const std::vector<std::uint8_t> bytes = EncodeCheckpoint(m);
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

M5<float> LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  try {
    return DecodeCheckpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace voxprotect
