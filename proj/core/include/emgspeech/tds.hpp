// Copyright 2026 The emgspeech Authors. All Rights Reserved.
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

#pragma once

#include "emgspeech/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace emgspeech {

/// Architecture of the sequence model:
///
///   x_t -> mean_{s in -1,0,+1} ReLU(W_r shift_s(x_t) + b_r)          (h)
///       -> blocks x [ LN(u + ReLU(depthwise_causal_conv(u)))
///                     LN(v + W2 ReLU(W1 v + b1) + b2) ]               (h)
///       -> log_softmax(W_o w + b_o)                                    (classes)
///
/// Class 0 is the CTC blank. The depthwise convolution is left-padded with
/// kernel - 1 zeros, so the receptive field is 1 + blocks * (kernel - 1).
struct TdsArch {
  std::size_t d_in = 0;
  std::size_t hidden = 256;
  std::size_t blocks = 4;
  std::size_t kernel = 13;
  std::size_t classes = 0;  // vocabulary size + 1
  FeatureKind kind = FeatureKind::kDiagE;
  std::uint32_t electrodes = 0;
  std::uint32_t bands = 0;

  static constexpr std::size_t kMaxReceptiveField = 50;

  std::size_t ReceptiveField() const { return 1 + blocks * (kernel - 1); }
  std::size_t ParameterCount() const;
  void Validate() const;
};

/// Maps flat feature indices to (electrode, sub-feature) so that electrode
/// shifts become index permutations. Shifts are circular.
class ChannelLayout {
 public:
  /// DIAG_E shifts the V-vector, VEC_B shifts the channel axis of the V x B
  /// grid, VEC_E permutes rows and columns of the V x V matrix. Other kinds
  /// have no electrode layout and throw kInvalidArgument.
  static ChannelLayout For(FeatureKind kind, std::uint32_t electrodes, std::uint32_t bands = 0);

  /// source[i]: index in the unshifted vector that lands at position i after
  /// shifting every electrode by `shift` positions (electrode e -> e + shift).
  std::vector<std::size_t> Permutation(int shift) const;

  std::size_t dim() const { return dim_; }

 private:
  FeatureKind kind_ = FeatureKind::kDiagE;
  std::size_t electrodes_ = 0;
  std::size_t sub_ = 1;
  std::size_t dim_ = 0;
};

/// Offsets of every tensor inside the flat parameter vector, in checkpoint
/// order: rot.W, rot.b, then per block conv.k, conv.b, ln1.g, ln1.b, mlp.W1,
/// mlp.b1, mlp.W2, mlp.b2, ln2.g, ln2.b, then out.W, out.b.
struct ParamLayout {
  struct Block {
    std::size_t conv_k, conv_b, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
  };
  std::size_t rot_w = 0, rot_b = 0;
  std::vector<Block> blocks;
  std::size_t out_w = 0, out_b = 0;
  std::size_t total = 0;

  explicit ParamLayout(const TdsArch& arch);
};

template <typename Scalar>
class TdsModel {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit TdsModel(const TdsArch& arch);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, unit
  /// layer-norm gains.
  void InitializeRandom(std::uint64_t seed);

  const TdsArch& arch() const { return arch_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<Scalar>& params() { return params_; }
  const std::vector<Scalar>& params() const { return params_; }

  /// Rotation-invariant front end: T x d_in -> T x hidden.
  Matrix Encode(const Matrix& x) const;

  /// Single shift branch ReLU(W_r shift_s(x) + b_r), for inspection.
  Matrix EncodeBranch(const Matrix& x, int shift) const;

  /// T x d_in -> T x classes log-probabilities.
  Matrix Forward(const Matrix& x) const;

  /// CTC loss for one utterance, normalized by target length, and its
  /// gradient accumulated as grad += scale * d(loss)/d(params). `target`
  /// holds classes in [1, classes). Infeasible targets return +inf and leave
  /// grad untouched.
  Scalar LossAndGradient(const Matrix& x, const std::vector<std::int32_t>& target,
                         std::vector<Scalar>& grad, Scalar scale = Scalar(1)) const;

  /// Loss only (same normalization as LossAndGradient).
  Scalar Loss(const Matrix& x, const std::vector<std::int32_t>& target) const;

  template <typename Other>
  TdsModel<Other> Cast() const {
    TdsModel<Other> out(arch_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<Other>(params_[i]);
    return out;
  }

 private:
  struct Cache;
  Matrix ForwardImpl(const Matrix& x, Cache* cache) const;

  TdsArch arch_;
  ParamLayout layout_;
  ChannelLayout channels_;
  std::vector<std::vector<std::size_t>> shifts_;
  std::vector<Scalar> params_;
};

extern template class TdsModel<float>;
extern template class TdsModel<double>;

struct ReceptiveFieldProbe {
  std::size_t receptive_field = 0;  // max over probes of (last changed - t + 1)
  bool causal = true;               // no output before the perturbed frame moved
};

/// Perturbs single frames of a random input and records which outputs change.
ReceptiveFieldProbe ProbeReceptiveField(const TdsModel<double>& model, std::size_t frames,
                                        std::uint64_t seed);

struct Checkpoint {
  TdsModel<float> model;
  std::uint64_t vocab_hash = 0;
  std::uint64_t seed = 0;
};

/// 64-byte header ("EMGS", version, type 5, feature kind, d_in, hidden,
/// blocks, kernel, classes, electrodes, bands, vocab hash, seed, payload size)
/// followed by float32 parameters in ParamLayout order.
void SaveCheckpoint(const TdsModel<float>& model, std::uint64_t vocab_hash, std::uint64_t seed,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace emgspeech
