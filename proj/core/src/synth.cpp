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

#include "emgspeech/synth.hpp"

#include "emgspeech/error.hpp"
#include "emgspeech/rng.hpp"
#include "emgspeech/spd.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace emgspeech {

void SynthSpec::Validate() const {
  if (electrodes < 1) throw Error(ErrorCode::kInvalidArgument, "electrodes must be >= 1");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (n_per_class < 1) throw Error(ErrorCode::kInvalidArgument, "n_per_class must be >= 1");
  if (!(sep > 0.0) || !std::isfinite(sep)) throw Error(ErrorCode::kInvalidArgument, "sep must be > 0");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(ErrorCode::kInvalidArgument, "noise must be >= 0");
  if (min_len < 1 || max_len < min_len) throw Error(ErrorCode::kInvalidArgument, "need 1 <= min_len <= max_len");
}

GestureSet GenGestureSet(const SynthSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  const Eigen::Index v = spec.electrodes;
  const Eigen::Index lower = v * (v - 1) / 2;
  const Eigen::Index dims = lower + v;
  std::vector<Eigen::VectorXd> centres;
  for (std::size_t c = 0; c < spec.k; ++c) {
    Eigen::VectorXd x(dims);
    for (Eigen::Index i = 0; i < lower; ++i) x(i) = rng.Normal();
    for (Eigen::Index i = 0; i < v; ++i) x(lower + i) = std::log(rng.Uniform(0.5, 2.0));
    centres.push_back(x * spec.sep);
  }
  GestureSet set;
  set.k = static_cast<std::int32_t>(spec.k);
  for (std::size_t c = 0; c < spec.k; ++c) {
    for (std::size_t n = 0; n < spec.n_per_class; ++n) {
      Eigen::VectorXd x = centres[c];
      for (Eigen::Index i = 0; i < dims; ++i) x(i) += spec.noise * rng.Normal();
      set.items.push_back({Reconstruct(FromLogCholeskyCoords(x, v)), static_cast<std::int32_t>(c)});
    }
  }
  return set;
}

MatrixXfR SampleSignal(const CovFrame& cov, std::size_t samples, std::uint64_t seed) {
  const CholFrame chol = Cholesky(cov);
  Rng rng(seed);
  Eigen::MatrixXd z(cov.dim(), static_cast<Eigen::Index>(samples));
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.Normal();
  return (chol.lower * z).cast<float>();
}

LinearPair GenLinearPair(std::uint64_t seed, std::size_t n, std::size_t d_in, std::size_t d_out, double snr,
                         bool zero_map) {
  if (n == 0 || d_in == 0 || d_out == 0) throw Error(ErrorCode::kInvalidArgument, "sizes must be positive");
  if (!(snr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "snr must be > 0");
  Rng rng(seed);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto in = static_cast<Eigen::Index>(d_in);
  const auto out = static_cast<Eigen::Index>(d_out);
  LinearPair pair;
  pair.weights = Eigen::MatrixXd::Zero(out, in);
  pair.bias = Eigen::VectorXd::Zero(out);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(d_in));
  if (!zero_map) {
    for (Eigen::Index i = 0; i < pair.weights.size(); ++i) pair.weights.data()[i] = w_scale * rng.Normal();
    for (Eigen::Index j = 0; j < out; ++j) pair.bias(j) = rng.Normal();
  }
  pair.x.resize(rows, in);
  for (Eigen::Index i = 0; i < pair.x.size(); ++i) pair.x.data()[i] = rng.Normal();
  pair.y = (pair.x * pair.weights.transpose()).rowwise() + pair.bias.transpose();
  for (Eigen::Index j = 0; j < out; ++j) {
    // Signal variance of output j is ||W*_j||^2 under standard normal inputs.
    double var = pair.weights.row(j).squaredNorm();
    if (zero_map) var = 1.0;
    const double sd = std::isinf(snr) ? 0.0 : std::sqrt(var / snr);
    for (Eigen::Index t = 0; t < rows; ++t) pair.y(t, j) += sd * rng.Normal();
  }
  return pair;
}

double SnrForCorrelation(double r) {
  if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::kInvalidArgument, "r must lie in [0, 1)");
  return r * r / (1.0 - r * r);
}

double CorrelationForSnr(double snr) {
  if (std::isinf(snr)) return 1.0;
  return std::sqrt(snr / (1.0 + snr));
}

namespace {

SequenceExample MakeUtterance(const SynthSpec& spec, const Eigen::MatrixXd& templates, Rng& rng) {
  const auto vocab = static_cast<std::uint64_t>(templates.rows());
  const std::size_t len = spec.min_len + rng.Index(spec.max_len - spec.min_len + 1);
  SequenceExample ex;
  std::vector<std::size_t> durations;
  std::size_t frames = 0;
  for (std::size_t i = 0; i < len; ++i) {
    auto id = static_cast<std::int32_t>(rng.Index(vocab));
    if (!ex.target.empty() && vocab > 1) {
      while (id == ex.target.back()) id = static_cast<std::int32_t>(rng.Index(vocab));
    }
    ex.target.push_back(id);
    durations.push_back(3 + rng.Index(4));
    frames += durations.back();
  }
  ex.features.resize(static_cast<Eigen::Index>(frames), templates.cols());
  Eigen::Index t = 0;
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t f = 0; f < durations[i]; ++f, ++t) {
      for (Eigen::Index c = 0; c < templates.cols(); ++c) {
        ex.features(t, c) = static_cast<float>(templates(ex.target[i], c) + spec.noise * rng.Normal());
      }
    }
  }
  return ex;
}

}  // namespace

SeqTask GenSeqTask(const SynthSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  SeqTask task;
  task.templates.resize(static_cast<Eigen::Index>(spec.k), spec.electrodes);
  for (Eigen::Index i = 0; i < task.templates.size(); ++i) task.templates.data()[i] = spec.sep * rng.Normal();
  Rng utter_rng(Rng::Derive(spec.seed, 1));
  for (std::size_t u = 0; u < spec.utterances; ++u) task.examples.push_back(MakeUtterance(spec, task.templates, utter_rng));
  return task;
}

std::vector<SequenceExample> GenSeqExamples(const SynthSpec& spec, const Eigen::MatrixXd& templates,
                                            std::uint64_t seed, std::size_t count) {
  spec.Validate();
  if (templates.cols() != static_cast<Eigen::Index>(spec.electrodes) || templates.rows() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "templates do not match the vocabulary size or electrode count");
  }
  Rng rng(seed);
  std::vector<SequenceExample> out;
  for (std::size_t u = 0; u < count; ++u) out.push_back(MakeUtterance(spec, templates, rng));
  return out;
}

std::vector<SequenceExample> ShuffleTargets(const std::vector<SequenceExample>& examples, std::uint64_t seed) {
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<SequenceExample> out = examples;
  for (std::size_t i = 0; i < examples.size(); ++i) out[i].target = examples[order[i]].target;
  return out;
}

}  // namespace emgspeech
