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

// Activations are stored time-major: a C x L column-major matrix per
// sample, samples concatenated along the columns. With that layout the
// im2col matrix of a convolution is a strided view of its input (column t
// starts at t * stride * C and spans kernel * C values), so every
// convolution is a single GEMM without copies.

#include "voxprotect/neuralnet.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <random>

#include "voxprotect/error.h"

namespace voxprotect {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using ColsView = Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>>;

struct BlockShape {
  int in_channels, out_channels, kernel, stride;
  std::size_t in_len, conv_len, pool_len;
  // Offsets into the flat parameter / running-stat vectors.
  std::size_t w, b, gamma, beta, rmean, rvar;
};

struct NetShape {
  std::vector<BlockShape> blocks;
  int feat_channels = 0;
  std::size_t fc_w = 0, fc_b = 0;
};

NetShape Shapes(const M5Config& cfg, std::size_t input_len) {
  NetShape s;
  std::size_t len = input_len;
  int in_ch = 1;
  std::size_t p = 0, r = 0;
  for (const ConvBlockSpec& b : cfg.EffectiveBlocks()) {
    BlockShape bs{};
    bs.in_channels = in_ch;
    bs.out_channels = b.out_channels;
    bs.kernel = b.kernel;
    bs.stride = b.stride;
    bs.in_len = len;
    if (len >= static_cast<std::size_t>(b.kernel)) {
      bs.conv_len = (len - static_cast<std::size_t>(b.kernel)) / static_cast<std::size_t>(b.stride) + 1;
    }
    bs.pool_len = bs.conv_len / static_cast<std::size_t>(cfg.pool);
    bs.w = p;
    p += static_cast<std::size_t>(b.out_channels) * static_cast<std::size_t>(b.kernel) *
         static_cast<std::size_t>(in_ch);
    bs.b = p;
    p += static_cast<std::size_t>(b.out_channels);
    bs.gamma = p;
    p += static_cast<std::size_t>(b.out_channels);
    bs.beta = p;
    p += static_cast<std::size_t>(b.out_channels);
    bs.rmean = r;
    r += static_cast<std::size_t>(b.out_channels);
    bs.rvar = r;
    r += static_cast<std::size_t>(b.out_channels);
    s.blocks.push_back(bs);
    len = bs.pool_len;
    in_ch = b.out_channels;
  }
  s.feat_channels = in_ch;
  s.fc_w = p;
  s.fc_b = p + 2 * static_cast<std::size_t>(in_ch);
  return s;
}

// Per-block intermediate values kept for the backward pass.
template <typename T>
struct BlockCache {
  Mat<T> xhat;            // normalized pre-activation, C x (B * conv_len)
  Vec<T> inv_std;         // per channel
  Mat<T> out;             // pooled, C x (B * pool_len)
  std::vector<std::uint8_t> argmax;  // pool winner offset per output
};

template <typename T>
struct Pass {
  NetShape shape;
  std::vector<BlockCache<T>> blocks;
  Mat<T> features;  // C x B after global average pooling
  Mat<T> logits;    // 2 x B
};

template <typename T>
void CheckBatch(const Tensor<T>& batch, const M5Config& cfg) {
  if (batch.shape.size() != 2 || batch.shape[0] == 0) {
    throw ShapeError("expected a non-empty [B x T] batch");
  }
  const std::size_t need = cfg.MinInputLength();
  if (batch.shape[1] < need) {
    throw ShapeError("input of " + std::to_string(batch.shape[1]) +
                     " samples is too short; the network needs at least " +
                     std::to_string(need));
  }
}

// Forward pass. `train` selects batch statistics; running stats are
// updated when `running` is non-null.
template <typename T>
Pass<T> RunForward(const M5Config& cfg, const std::vector<T>& params, std::vector<T>* running,
                   const std::vector<T>& frozen_running, const Tensor<T>& batch, bool train) {
  Pass<T> pass;
  const std::size_t nb = batch.shape[0];
  pass.shape = Shapes(cfg, batch.shape[1]);
  const auto pool = static_cast<std::size_t>(cfg.pool);

  pass.blocks.reserve(pass.shape.blocks.size());
  // The input is a 1 x (B * T) matrix in the same layout.
  const T* in = batch.values.data();
  for (const BlockShape& bs : pass.shape.blocks) {
    BlockCache<T> c;
    const auto co = static_cast<Eigen::Index>(bs.out_channels);
    const auto kc = static_cast<Eigen::Index>(bs.kernel * bs.in_channels);
    const auto lc = static_cast<Eigen::Index>(bs.conv_len);
    Eigen::Map<const RowMat<T>> w(params.data() + bs.w, co, kc);
    Eigen::Map<const Vec<T>> bias(params.data() + bs.b, co);
    Eigen::Map<const Vec<T>> gamma(params.data() + bs.gamma, co);
    Eigen::Map<const Vec<T>> beta(params.data() + bs.beta, co);

    Mat<T> conv(co, lc * static_cast<Eigen::Index>(nb));
    for (std::size_t b = 0; b < nb; ++b) {
      const T* src = in + b * bs.in_len * static_cast<std::size_t>(bs.in_channels);
      ColsView<T> cols(src, kc, lc, Eigen::OuterStride<>(bs.stride * bs.in_channels));
      conv.middleCols(static_cast<Eigen::Index>(b) * lc, lc).noalias() = w * cols;
    }

    const T count = static_cast<T>(conv.cols());
    Vec<T> mean, var;
    if (train) {
      // conv holds the pre-bias products; statistics refer to the biased output.
      const Vec<T> raw_mean = conv.rowwise().mean();
      var = (conv.colwise() - raw_mean).array().square().rowwise().sum() / count;
      mean = raw_mean + bias;
      if (running) {
        const T m = static_cast<T>(cfg.bn_momentum);
        Eigen::Map<Vec<T>> rm(running->data() + bs.rmean, co);
        Eigen::Map<Vec<T>> rv(running->data() + bs.rvar, co);
        const T unbias = count > 1 ? count / (count - 1) : T(1);
        rm = (T(1) - m) * rm + m * mean;
        rv = (T(1) - m) * rv + m * unbias * var;
      }
    } else {
      mean = Eigen::Map<const Vec<T>>(frozen_running.data() + bs.rmean, co);
      var = Eigen::Map<const Vec<T>>(frozen_running.data() + bs.rvar, co);
    }
    c.inv_std = (var.array() + static_cast<T>(cfg.bn_eps)).rsqrt().matrix();
    // The conv bias cancels against the mean except in its running stats.
    const Vec<T> shift = mean - bias;
    // Normalize in place; the affine + ReLU output is only materialized
    // inside the pooling windows.
    for (Eigen::Index j = 0; j < conv.cols(); ++j) {
      T* col = conv.data() + j * co;
      for (Eigen::Index ch = 0; ch < co; ++ch) col[ch] = (col[ch] - shift[ch]) * c.inv_std[ch];
    }
    c.xhat = std::move(conv);

    const auto lp = static_cast<Eigen::Index>(bs.pool_len);
    c.out.resize(co, lp * static_cast<Eigen::Index>(nb));
    c.argmax.resize(static_cast<std::size_t>(co * lp) * nb);
    std::vector<T> act(pool * static_cast<std::size_t>(co));
    for (std::size_t b = 0; b < nb; ++b) {
      for (Eigen::Index t = 0; t < lp; ++t) {
        const Eigen::Index src = static_cast<Eigen::Index>(b) * lc + t * static_cast<Eigen::Index>(pool);
        const Eigen::Index dst = static_cast<Eigen::Index>(b) * lp + t;
        const T* xh = c.xhat.data() + src * co;
        for (std::size_t k = 0; k < pool; ++k) {
          T* a = act.data() + k * static_cast<std::size_t>(co);
          const T* x = xh + k * static_cast<std::size_t>(co);
          for (Eigen::Index ch = 0; ch < co; ++ch) a[ch] = std::max(T(0), gamma[ch] * x[ch] + beta[ch]);
        }
        T* out = c.out.data() + dst * co;
        std::uint8_t* arg = c.argmax.data() + dst * co;
        for (Eigen::Index ch = 0; ch < co; ++ch) {
          T best = act[static_cast<std::size_t>(ch)];
          std::uint8_t a = 0;
          for (std::size_t k = 1; k < pool; ++k) {
            const T v = act[k * static_cast<std::size_t>(co) + static_cast<std::size_t>(ch)];
            if (v > best) {
              best = v;
              a = static_cast<std::uint8_t>(k);
            }
          }
          out[ch] = best;
          arg[ch] = a;
        }
      }
    }
    pass.blocks.push_back(std::move(c));
    in = pass.blocks.back().out.data();
  }

  const NetShape& s = pass.shape;
  const auto fc = static_cast<Eigen::Index>(s.feat_channels);
  const auto lp = static_cast<Eigen::Index>(s.blocks.back().pool_len);
  const Mat<T>& last = pass.blocks.back().out;
  pass.features.resize(fc, static_cast<Eigen::Index>(nb));
  for (std::size_t b = 0; b < nb; ++b) {
    pass.features.col(static_cast<Eigen::Index>(b)) =
        last.middleCols(static_cast<Eigen::Index>(b) * lp, lp).rowwise().mean();
  }
  Eigen::Map<const RowMat<T>> wfc(params.data() + s.fc_w, 2, fc);
  Eigen::Map<const Vec<T>> bfc(params.data() + s.fc_b, 2);
  pass.logits = (wfc * pass.features).colwise() + Vec<T>(bfc);
  return pass;
}

// Cross-entropy per column and its gradient w.r.t. the logits.
template <typename T>
std::vector<T> SoftmaxCrossEntropy(const Mat<T>& logits, const std::vector<int>& labels,
                                   Mat<T>* dlogits) {
  const Eigen::Index nb = logits.cols();
  std::vector<T> losses(static_cast<std::size_t>(nb));
  dlogits->resize(2, nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    const T m = std::max(logits(0, b), logits(1, b));
    const T e0 = std::exp(logits(0, b) - m), e1 = std::exp(logits(1, b) - m);
    const T z = e0 + e1;
    losses[static_cast<std::size_t>(b)] = std::log(z) + m - logits(y, b);
    (*dlogits)(0, b) = e0 / z - (y == 0 ? T(1) : T(0));
    (*dlogits)(1, b) = e1 / z - (y == 1 ? T(1) : T(0));
  }
  return losses;
}

// Backward pass. Writes parameter gradients when `pgrad` is non-null and
// returns the input gradient when `want_input` is set.
template <typename T>
Mat<T> RunBackward(const M5Config& cfg, const std::vector<T>& params, const Pass<T>& pass,
                   const Tensor<T>& batch, const Mat<T>& dlogits, bool train,
                   std::vector<T>* pgrad, bool want_input) {
  const NetShape& s = pass.shape;
  const std::size_t nb = batch.shape[0];
  const auto pool = static_cast<std::size_t>(cfg.pool);
  const auto fc = static_cast<Eigen::Index>(s.feat_channels);
  Eigen::Map<const RowMat<T>> wfc(params.data() + s.fc_w, 2, fc);
  if (pgrad) {
    Eigen::Map<RowMat<T>>(pgrad->data() + s.fc_w, 2, fc).noalias() =
        dlogits * pass.features.transpose();
    Eigen::Map<Vec<T>>(pgrad->data() + s.fc_b, 2) = dlogits.rowwise().sum();
  }
  const Mat<T> dfeat = wfc.transpose() * dlogits;  // C x B

  // Gradient w.r.t. the output of the current block.
  const auto last_lp = static_cast<Eigen::Index>(s.blocks.back().pool_len);
  Mat<T> dout(fc, last_lp * static_cast<Eigen::Index>(nb));
  for (std::size_t b = 0; b < nb; ++b) {
    dout.middleCols(static_cast<Eigen::Index>(b) * last_lp, last_lp) =
        (dfeat.col(static_cast<Eigen::Index>(b)) / static_cast<T>(last_lp)).replicate(1, last_lp);
  }

  Mat<T> dinput;
  for (std::size_t k = s.blocks.size(); k-- > 0;) {
    const BlockShape& bs = s.blocks[k];
    const BlockCache<T>& c = pass.blocks[k];
    const auto co = static_cast<Eigen::Index>(bs.out_channels);
    const auto kc = static_cast<Eigen::Index>(bs.kernel * bs.in_channels);
    const auto lc = static_cast<Eigen::Index>(bs.conv_len);
    const auto lp = static_cast<Eigen::Index>(bs.pool_len);

    // Unpool, ReLU and batch norm. The upstream gradient is non-zero only
    // at pool winners with a positive activation, so the sums over it are
    // sparse; one dense pass then writes the conv-output gradient.
    Eigen::Map<const Vec<T>> gamma(params.data() + bs.gamma, co);
    Eigen::Map<const Vec<T>> beta(params.data() + bs.beta, co);
    std::vector<std::pair<Eigen::Index, T>> hits;  // (flat index, gradient)
    hits.reserve(static_cast<std::size_t>(co * lp) * nb);
    Vec<T> sum_d = Vec<T>::Zero(co), sum_dx = Vec<T>::Zero(co);
    for (std::size_t b = 0; b < nb; ++b) {
      for (Eigen::Index t = 0; t < lp; ++t) {
        const Eigen::Index dst = static_cast<Eigen::Index>(b) * lp + t;
        const Eigen::Index src = static_cast<Eigen::Index>(b) * lc + t * static_cast<Eigen::Index>(pool);
        const std::uint8_t* arg = c.argmax.data() + dst * co;
        for (Eigen::Index ch = 0; ch < co; ++ch) {
          const Eigen::Index flat = (src + arg[ch]) * co + ch;
          const T xh = c.xhat.data()[flat];
          if (gamma[ch] * xh + beta[ch] <= T(0)) continue;
          const T g = dout(ch, dst);
          hits.emplace_back(flat, g);
          sum_d[ch] += g;
          sum_dx[ch] += g * xh;
        }
      }
    }
    if (pgrad) {
      Eigen::Map<Vec<T>>(pgrad->data() + bs.gamma, co) = sum_dx;
      Eigen::Map<Vec<T>>(pgrad->data() + bs.beta, co) = sum_d;
    }
    Mat<T> dconv(co, lc * static_cast<Eigen::Index>(nb));
    Vec<T> scale = (gamma.array() * c.inv_std.array()).matrix();
    if (train) {
      const T count = static_cast<T>(dconv.cols());
      scale /= count;
      for (Eigen::Index j = 0; j < dconv.cols(); ++j) {
        T* d = dconv.data() + j * co;
        const T* xh = c.xhat.data() + j * co;
        for (Eigen::Index ch = 0; ch < co; ++ch) {
          d[ch] = -scale[ch] * (sum_d[ch] + sum_dx[ch] * xh[ch]);
        }
      }
      for (const auto& [flat, g] : hits) dconv.data()[flat] += scale[flat % co] * count * g;
    } else {
      dconv.setZero();
      for (const auto& [flat, g] : hits) dconv.data()[flat] = scale[flat % co] * g;
    }

    // Convolution.
    const T* in = k == 0 ? batch.values.data() : pass.blocks[k - 1].out.data();
    if (pgrad) {
      Eigen::Map<RowMat<T>> dw(pgrad->data() + bs.w, co, kc);
      dw.setZero();
      for (std::size_t b = 0; b < nb; ++b) {
        const T* src = in + b * bs.in_len * static_cast<std::size_t>(bs.in_channels);
        ColsView<T> cols(src, kc, lc, Eigen::OuterStride<>(bs.stride * bs.in_channels));
        dw.noalias() += dconv.middleCols(static_cast<Eigen::Index>(b) * lc, lc) * cols.transpose();
      }
      Eigen::Map<Vec<T>>(pgrad->data() + bs.b, co) = dconv.rowwise().sum();
    }
    if (k == 0 && !want_input) break;

    Eigen::Map<const RowMat<T>> w(params.data() + bs.w, co, kc);
    const auto ci = static_cast<Eigen::Index>(bs.in_channels);
    const auto li = static_cast<Eigen::Index>(bs.in_len);
    Mat<T> din = Mat<T>::Zero(ci, li * static_cast<Eigen::Index>(nb));
    Mat<T> dcols(kc, lc);
    for (std::size_t b = 0; b < nb; ++b) {
      dcols.noalias() = w.transpose() * dconv.middleCols(static_cast<Eigen::Index>(b) * lc, lc);
      T* dst = din.data() + static_cast<std::size_t>(b) * static_cast<std::size_t>(li * ci);
      const Eigen::Index step = bs.stride * ci;
      for (Eigen::Index t = 0; t < lc; ++t) {
        Eigen::Map<Vec<T>>(dst + t * step, kc) += dcols.col(t);
      }
    }
    if (k == 0) {
      dinput = std::move(din);
    } else {
      dout = std::move(din);
    }
  }
  return dinput;
}

template <typename T>
Tensor<T> LogitsTensor(const Mat<T>& logits) {
  Tensor<T> out({static_cast<std::size_t>(logits.cols()), 2});
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    out.at(static_cast<std::size_t>(b), 0) = logits(0, b);
    out.at(static_cast<std::size_t>(b), 1) = logits(1, b);
  }
  return out;
}

void CheckLabels(const std::vector<int>& labels, std::size_t nb) {
  if (labels.size() != nb) throw ShapeError("label count does not match the batch");
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("class index must be 0 (F) or 1 (M)");
  }
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  values.assign(n, T(0));
}

template struct Tensor<float>;
template struct Tensor<double>;

void M5Config::Validate() const {
  if (blocks.empty()) throw ConfigError("m5: at least one conv block is required");
  for (const ConvBlockSpec& b : blocks) {
    if (b.out_channels < 1 || b.kernel < 1 || b.stride < 1) {
      throw ConfigError("m5: channels, kernel and stride must be positive");
    }
    if (desk_scale && b.out_channels < 8) {
      throw ConfigError("m5: desk_scale needs at least 8 channels per block");
    }
  }
  if (pool < 1 || pool > 255) throw ConfigError("m5: pool must be in [1, 255]");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) {
    throw ConfigError("m5: bn_momentum must be in (0, 1]");
  }
  if (!(bn_eps > 0.0)) throw ConfigError("m5: bn_eps must be positive");
}

std::vector<ConvBlockSpec> M5Config::EffectiveBlocks() const {
  std::vector<ConvBlockSpec> out = blocks;
  if (desk_scale) {
    for (ConvBlockSpec& b : out) b.out_channels /= 8;
  }
  return out;
}

std::size_t M5Config::MinInputLength() const {
  // Walk backwards from one output step.
  std::size_t len = 1;
  const std::vector<ConvBlockSpec> eff = EffectiveBlocks();
  for (auto it = eff.rbegin(); it != eff.rend(); ++it) {
    const std::size_t conv_len = len * static_cast<std::size_t>(pool);
    len = (conv_len - 1) * static_cast<std::size_t>(it->stride) +
          static_cast<std::size_t>(it->kernel);
  }
  return len;
}

void TrainConfig::Validate() const {
  if (!(min_lr >= 0.0 && min_lr < max_lr)) throw ConfigError("train: require 0 <= min_lr < max_lr");
  if (cycle_steps < 2) throw ConfigError("train: cycle_steps must be >= 2");
  if (total_steps < 1) throw ConfigError("train: total_steps must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(chunk_s > 0.0) || !(eval_s > 0.0)) throw ConfigError("train: chunk_s and eval_s must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train: Adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("train: adam_eps must be positive");
}

double CyclicLr(long step, const TrainConfig& cfg) {
  const double half = cfg.cycle_steps / 2.0;
  const double pos = static_cast<double>(step % cfg.cycle_steps);
  const double x = pos <= half ? pos / half : 2.0 - pos / half;
  return cfg.min_lr + (cfg.max_lr - cfg.min_lr) * x;
}

template <typename T>
M5<T>::M5(const M5Config& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.Validate();
  const NetShape s = Shapes(cfg_, cfg_.MinInputLength());
  std::mt19937_64 rng(init_seed);
  auto add = [](std::vector<ParamSlice>& layout, std::string name,
                std::vector<std::size_t> shape, std::size_t offset) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    layout.push_back({std::move(name), std::move(shape), offset, n});
  };
  for (std::size_t k = 0; k < s.blocks.size(); ++k) {
    const BlockShape& b = s.blocks[k];
    const std::string p = "block" + std::to_string(k);
    const auto co = static_cast<std::size_t>(b.out_channels);
    add(param_layout_, p + ".conv.weight",
        {co, static_cast<std::size_t>(b.kernel), static_cast<std::size_t>(b.in_channels)}, b.w);
    add(param_layout_, p + ".conv.bias", {co}, b.b);
    add(param_layout_, p + ".bn.weight", {co}, b.gamma);
    add(param_layout_, p + ".bn.bias", {co}, b.beta);
    add(running_layout_, p + ".bn.running_mean", {co}, b.rmean);
    add(running_layout_, p + ".bn.running_var", {co}, b.rvar);
  }
  const auto fc = static_cast<std::size_t>(s.feat_channels);
  add(param_layout_, "fc.weight", {2, fc}, s.fc_w);
  add(param_layout_, "fc.bias", {2}, s.fc_b);
  params_.assign(s.fc_b + 2, T(0));
  running_.assign(running_layout_.back().offset + running_layout_.back().size, T(0));

  auto uniform = [&](std::size_t offset, std::size_t n, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < n; ++i) params_[offset + i] = static_cast<T>(dist(rng));
  };
  for (const BlockShape& b : s.blocks) {
    const std::size_t fan_in = static_cast<std::size_t>(b.kernel * b.in_channels);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const auto co = static_cast<std::size_t>(b.out_channels);
    uniform(b.w, co * fan_in, bound);
    uniform(b.b, co, bound);
    std::fill_n(params_.begin() + static_cast<long>(b.gamma), co, T(1));
    std::fill_n(running_.begin() + static_cast<long>(b.rvar), co, T(1));
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fc));
  uniform(s.fc_w, 2 * fc, bound);
  uniform(s.fc_b, 2, bound);
}

template <typename T>
Tensor<T> M5<T>::Forward(const Tensor<T>& batch) {
  if (mode_ == Mode::kEval) return Infer(batch);
  CheckBatch(batch, cfg_);
  return LogitsTensor(RunForward(cfg_, params_, &running_, running_, batch, true).logits);
}

template <typename T>
Tensor<T> M5<T>::Infer(const Tensor<T>& batch) const {
  if (mode_ != Mode::kEval) throw ModeError("Infer requires eval mode");
  CheckBatch(batch, cfg_);
  return LogitsTensor(RunForward<T>(cfg_, params_, nullptr, running_, batch, false).logits);
}

template <typename T>
typename M5<T>::InputGrad M5<T>::LossAndInputGrad(const Tensor<T>& batch,
                                                 const std::vector<int>& labels) const {
  if (mode_ != Mode::kEval) {
    throw ModeError("input gradients require eval mode (frozen batch norm)");
  }
  CheckBatch(batch, cfg_);
  CheckLabels(labels, batch.shape[0]);
  const Pass<T> pass = RunForward<T>(cfg_, params_, nullptr, running_, batch, false);
  Mat<T> dlogits;
  InputGrad out;
  out.losses = SoftmaxCrossEntropy(pass.logits, labels, &dlogits);
  const Mat<T> dx = RunBackward<T>(cfg_, params_, pass, batch, dlogits, false, static_cast<std::vector<T>*>(nullptr), true);
  out.grad = Tensor<T>(batch.shape);
  std::copy(dx.data(), dx.data() + dx.size(), out.grad.values.begin());
  return out;
}

template <typename T>
T M5<T>::TrainForwardBackward(const Tensor<T>& batch, const std::vector<int>& labels,
                              std::vector<T>* param_grad) {
  if (mode_ != Mode::kTrain) throw ModeError("training requires train mode");
  CheckBatch(batch, cfg_);
  CheckLabels(labels, batch.shape[0]);
  const Pass<T> pass = RunForward(cfg_, params_, &running_, running_, batch, true);
  Mat<T> dlogits;
  const std::vector<T> losses = SoftmaxCrossEntropy(pass.logits, labels, &dlogits);
  const T inv_b = T(1) / static_cast<T>(labels.size());
  dlogits *= inv_b;
  param_grad->assign(params_.size(), T(0));
  RunBackward<T>(cfg_, params_, pass, batch, dlogits, true, param_grad, false);
  return std::accumulate(losses.begin(), losses.end(), T(0)) * inv_b;
}

template class M5<float>;
template class M5<double>;

template <typename T>
std::string ContentId(const M5<T>& m) {
  // FNV-1a over the float32 images of all values.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::vector<T>& v) {
    for (T x : v) {
      const float f = static_cast<float>(x);
      std::uint32_t bits = 0;
      static_assert(sizeof(bits) == sizeof(f));
      std::memcpy(&bits, &f, sizeof(bits));
      for (int k = 0; k < 4; ++k) {
        h ^= (bits >> (8 * k)) & 0xffu;
        h *= 1099511628211ULL;
      }
    }
  };
  mix(m.parameters());
  mix(m.running_stats());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("m5-") + buf;
}

template std::string ContentId(const M5<float>&);
template std::string ContentId(const M5<double>&);

template <typename To, typename From>
M5<To> CastModel(const M5<From>& m) {
  M5<To> out(m.config(), 0);
  std::transform(m.parameters().begin(), m.parameters().end(), out.parameters().begin(),
                 [](From v) { return static_cast<To>(v); });
  std::transform(m.running_stats().begin(), m.running_stats().end(),
                 out.running_stats().begin(), [](From v) { return static_cast<To>(v); });
  out.SetMode(m.mode());
  out.model_id = m.model_id;
  return out;
}

template M5<double> CastModel(const M5<float>&);
template M5<float> CastModel(const M5<double>&);
template M5<float> CastModel(const M5<float>&);
template M5<double> CastModel(const M5<double>&);

M5<float> TrainM5(const M5Config& cfg, const TrainConfig& tcfg,
                  const std::vector<Waveform>& corpus, TrainLog* log,
                  const std::function<void(long, double)>& progress) {
  tcfg.Validate();
  if (corpus.empty()) throw DataError("training corpus is empty");
  bool has_f = false, has_m = false;
  for (const Waveform& w : corpus) {
    if (!w.gender) throw DataError("unlabeled utterance " + w.source_id);
    (*w.gender == Gender::kFemale ? has_f : has_m) = true;
  }
  if (!(has_f && has_m)) throw DataError("training corpus needs both genders");

  std::mt19937_64 rng(tcfg.seed);
  M5<float> model(cfg, rng());
  model.SetMode(Mode::kTrain);
  const std::size_t chunk =
      static_cast<std::size_t>(std::llround(tcfg.chunk_s * kSampleRateHz));
  if (chunk < cfg.MinInputLength()) {
    throw ConfigError("train: chunk_s is shorter than the network's minimum input");
  }
  const auto bsz = static_cast<std::size_t>(tcfg.batch_size);

  std::vector<float> m1(model.parameters().size(), 0.0f), m2(m1.size(), 0.0f), grad;
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  Tensor<float> batch({bsz, chunk});
  std::vector<int> labels(bsz);
  for (long step = 0; step < tcfg.total_steps; ++step) {
    for (std::size_t b = 0; b < bsz; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const Waveform& w = corpus[order[cursor++]];
      const Waveform piece = RandomChunk(w, tcfg.chunk_s, rng);
      std::transform(piece.samples.begin(), piece.samples.end(),
                     batch.values.begin() + static_cast<long>(b * chunk),
                     [](double v) { return static_cast<float>(v); });
      labels[b] = ClassIndex(*w.gender);
    }
    const float loss = model.TrainForwardBackward(batch, labels, &grad);
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite training loss at step " + std::to_string(step));
    }
    const double lr = CyclicLr(step, tcfg);
    const double c1 = 1.0 - std::pow(tcfg.beta1, static_cast<double>(step + 1));
    const double c2 = 1.0 - std::pow(tcfg.beta2, static_cast<double>(step + 1));
    const auto b1 = static_cast<float>(tcfg.beta1), b2 = static_cast<float>(tcfg.beta2);
    std::vector<float>& p = model.parameters();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m1[i] = b1 * m1[i] + (1.0f - b1) * grad[i];
      m2[i] = b2 * m2[i] + (1.0f - b2) * grad[i] * grad[i];
      const double mhat = m1[i] / c1, vhat = m2[i] / c2;
      p[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + tcfg.adam_eps));
    }
    if (log) {
      log->loss.push_back(loss);
      log->lr.push_back(lr);
    }
    if (progress) progress(step, loss);
  }
  model.SetMode(Mode::kEval);
  model.model_id = ContentId(model);
  return model;
}

template <typename T>
M5Differentiable<T>::M5Differentiable(std::shared_ptr<const M5<T>> model)
    : model_(std::move(model)) {
  if (!model_) throw DataError("null model");
  if (model_->mode() != Mode::kEval) throw ModeError("reference model must be in eval mode");
}

namespace {

template <typename T>
Tensor<T> ToBatch(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("empty batch");
  const std::size_t len = rows.front().size();
  Tensor<T> t({rows.size(), len});
  for (std::size_t b = 0; b < rows.size(); ++b) {
    if (rows[b].size() != len) throw ShapeError("batch rows differ in length");
    std::transform(rows[b].begin(), rows[b].end(), t.values.begin() + static_cast<long>(b * len),
                   [](double v) { return static_cast<T>(v); });
  }
  return t;
}

}  // namespace

template <typename T>
std::vector<std::array<double, 2>> M5Differentiable<T>::Logits(
    const std::vector<std::vector<double>>& batch) const {
  const Tensor<T> out = model_->Infer(ToBatch<T>(batch));
  std::vector<std::array<double, 2>> logits(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    logits[b] = {static_cast<double>(out.at(b, 0)), static_cast<double>(out.at(b, 1))};
  }
  return logits;
}

template <typename T>
void M5Differentiable<T>::LossAndInputGrad(const std::vector<std::vector<double>>& batch,
                                           const std::vector<int>& labels,
                                           std::vector<double>* losses,
                                           std::vector<std::vector<double>>* grads) const {
  const Tensor<T> x = ToBatch<T>(batch);
  const typename M5<T>::InputGrad g = model_->LossAndInputGrad(x, labels);
  const std::size_t len = x.shape[1];
  losses->assign(g.losses.begin(), g.losses.end());
  grads->resize(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    (*grads)[b].assign(g.grad.values.begin() + static_cast<long>(b * len),
                       g.grad.values.begin() + static_cast<long>((b + 1) * len));
  }
}

template class M5Differentiable<float>;
template class M5Differentiable<double>;

}  // namespace voxprotect
