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

// M5-style raw-waveform CNN: conv blocks (convolution, batch norm, ReLU,
// max-pool) followed by global average pooling and a two-way linear head.
// Class index 0 is F, 1 is M. Forward and backward passes are hand-written;
// the model is templated on the scalar type so gradient checks can run in
// double precision while training uses float.

#ifndef VOXPROTECT_NEURALNET_H_
#define VOXPROTECT_NEURALNET_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "voxprotect/audio_io.h"

namespace voxprotect {

inline int ClassIndex(Gender g) { return g == Gender::kFemale ? 0 : 1; }
inline Gender ClassGender(int index) { return index == 0 ? Gender::kFemale : Gender::kMale; }

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  std::size_t size() const { return values.size(); }
  T& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
  T at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }
};

struct ConvBlockSpec {
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
};

struct M5Config {
  std::vector<ConvBlockSpec> blocks = {{128, 80, 4}, {128, 3, 1}, {256, 3, 1}, {512, 3, 1}};
  bool desk_scale = true;  // divide channel counts by 8
  int pool = 4;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  void Validate() const;
  // Blocks after applying desk_scale.
  std::vector<ConvBlockSpec> EffectiveBlocks() const;
  // Shortest input that leaves at least one time step after the last pool.
  std::size_t MinInputLength() const;
};

struct TrainConfig {
  double max_lr = 1e-4;
  double min_lr = 1e-8;
  int cycle_steps = 12500;
  int total_steps = 50000;
  int batch_size = 32;
  double chunk_s = 3.0;
  double eval_s = 6.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Triangular cyclic schedule: min_lr at the start of each cycle, max_lr at
// its midpoint.
double CyclicLr(long step, const TrainConfig& cfg);

enum class Mode { kTrain, kEval };

// Names and shapes of the flat parameter vector, in checkpoint order.
struct ParamSlice {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

template <typename T>
class M5 {
 public:
  M5(const M5Config& cfg, std::uint64_t init_seed);

  const M5Config& config() const { return cfg_; }
  Mode mode() const { return mode_; }
  void SetMode(Mode m) { mode_ = m; }

  // Logits [B x 2] for a batch [B x T]. In train mode this uses batch
  // statistics and updates the running statistics.
  Tensor<T> Forward(const Tensor<T>& batch);
  // Eval-mode forward; throws ModeError in train mode.
  Tensor<T> Infer(const Tensor<T>& batch) const;

  struct InputGrad {
    std::vector<T> losses;  // per-sample cross-entropy
    Tensor<T> grad;         // d loss_b / d x_b, same shape as the batch
  };
  // Exact input gradients through the frozen network. Eval mode only.
  InputGrad LossAndInputGrad(const Tensor<T>& batch, const std::vector<int>& labels) const;

  // One train-mode pass: returns the batch-mean cross-entropy and writes
  // its gradient w.r.t. parameters() into param_grad.
  T TrainForwardBackward(const Tensor<T>& batch, const std::vector<int>& labels,
                         std::vector<T>* param_grad);

  std::vector<T>& parameters() { return params_; }
  const std::vector<T>& parameters() const { return params_; }
  std::vector<T>& running_stats() { return running_; }
  const std::vector<T>& running_stats() const { return running_; }
  const std::vector<ParamSlice>& parameter_layout() const { return param_layout_; }
  const std::vector<ParamSlice>& running_layout() const { return running_layout_; }

  std::string model_id;

 private:
  M5Config cfg_;
  Mode mode_ = Mode::kTrain;
  std::vector<T> params_;
  std::vector<T> running_;
  std::vector<ParamSlice> param_layout_;
  std::vector<ParamSlice> running_layout_;
};

extern template class M5<float>;
extern template class M5<double>;

// Deterministic content hash of parameters and running statistics, used
// as the default model id ("m5-" + 16 hex digits).
template <typename T>
std::string ContentId(const M5<T>& m);

template <typename To, typename From>
M5<To> CastModel(const M5<From>& m);

struct TrainLog {
  std::vector<double> loss;  // one entry per step
  std::vector<double> lr;
};

// Trains on labeled waveforms. Each step draws batch_size utterances (a
// seeded reshuffle per pass) and a random chunk_s chunk of each. Returns an
// eval-mode model whose id is its content hash.
M5<float> TrainM5(const M5Config& cfg, const TrainConfig& tcfg,
                  const std::vector<Waveform>& corpus, TrainLog* log = nullptr,
                  const std::function<void(long, double)>& progress = {});

// Binary checkpoint; layout documented in docs/checkpoint_format.md.
void SaveCheckpoint(const std::string& path, const M5<float>& m);
M5<float> LoadCheckpoint(const std::string& path);
std::vector<std::uint8_t> EncodeCheckpoint(const M5<float>& m);
M5<float> DecodeCheckpoint(const std::vector<std::uint8_t>& bytes);

// A classifier whose cross-entropy can be differentiated w.r.t. its input;
// the attack module depends only on this interface.
class DifferentiableClassifier {
 public:
  virtual ~DifferentiableClassifier() = default;
  virtual std::string Id() const = 0;
  virtual std::size_t MinInputLength() const = 0;
  // Logits for each row.
  virtual std::vector<std::array<double, 2>> Logits(
      const std::vector<std::vector<double>>& batch) const = 0;
  // Per-sample losses and gradients for each row and its class index.
  virtual void LossAndInputGrad(const std::vector<std::vector<double>>& batch,
                                const std::vector<int>& labels, std::vector<double>* losses,
                                std::vector<std::vector<double>>* grads) const = 0;
};

template <typename T>
class M5Differentiable : public DifferentiableClassifier {
 public:
  explicit M5Differentiable(std::shared_ptr<const M5<T>> model);
  std::string Id() const override { return model_->model_id; }
  std::size_t MinInputLength() const override { return model_->config().MinInputLength(); }
  std::vector<std::array<double, 2>> Logits(
      const std::vector<std::vector<double>>& batch) const override;
  void LossAndInputGrad(const std::vector<std::vector<double>>& batch,
                        const std::vector<int>& labels, std::vector<double>* losses,
                        std::vector<std::vector<double>>* grads) const override;
  const M5<T>& model() const { return *model_; }

 private:
  std::shared_ptr<const M5<T>> model_;
};

extern template class M5Differentiable<float>;
extern template class M5Differentiable<double>;

}  // namespace voxprotect

#endif  // VOXPROTECT_NEURALNET_H_
