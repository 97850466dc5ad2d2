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

#include "emgspeech/clustering.hpp"
#include "emgspeech/signal_io.hpp"
#include "emgspeech/trainer.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <vector>

namespace emgspeech {

struct SynthSpec {
  std::uint64_t seed = 0;
  std::uint32_t electrodes = 22;
  std::size_t k = 13;           // classes (gestures) or vocabulary size
  std::size_t n_per_class = 10;
  double sep = 1.0;             // centre separation scale
  double noise = 0.1;           // perturbation scale
  std::size_t min_len = 4;      // labels per utterance
  std::size_t max_len = 8;
  std::size_t utterances = 20;

  void Validate() const;
};

/// k random SPD centres drawn in log-Cholesky coordinates and scaled by `sep`
/// (strictly-lower entries ~ N(0, 1), diagonal ~ U[0.5, 2] before scaling);
/// every item is its centre plus N(0, noise^2) on every coordinate. Items are
/// ordered class by class.
GestureSet GenGestureSet(const SynthSpec& spec);

/// Multichannel signal of `samples` columns whose second-moment matrix
/// converges to `cov` (L Z with Z standard normal).
MatrixXfR SampleSignal(const CovFrame& cov, std::size_t samples, std::uint64_t seed);

struct LinearPair {
  Eigen::MatrixXd x;       // N x d_in, standard normal
  Eigen::MatrixXd y;       // N x d_out
  Eigen::MatrixXd weights; // d_out x d_in
  Eigen::VectorXd bias;
};

/// Y = W* X + b* + noise, with per-output noise variance var(W*_j x) / snr.
/// snr = +inf gives noiseless targets. `zero_map` forces W* = 0.
LinearPair GenLinearPair(std::uint64_t seed, std::size_t n, std::size_t d_in, std::size_t d_out,
                         double snr, bool zero_map = false);

/// snr at which a perfectly recovered map has Pearson r: r^2 / (1 - r^2).
double SnrForCorrelation(double r);
/// Inverse of SnrForCorrelation: sqrt(snr / (1 + snr)).
double CorrelationForSnr(double snr);

struct SeqTask {
  std::vector<SequenceExample> examples;
  Eigen::MatrixXd templates;  // vocabulary x d
};

/// Utterances of random label sequences (no immediate repeats) in which every
/// label emits 3-6 frames of its template plus N(0, noise^2) noise. Features
/// are DIAG_E-shaped with d = electrodes; alignments are discarded.
SeqTask GenSeqTask(const SynthSpec& spec);

/// Same templates as `task`, fresh utterances drawn from `seed`.
std::vector<SequenceExample> GenSeqExamples(const SynthSpec& spec, const Eigen::MatrixXd& templates,
                                            std::uint64_t seed, std::size_t count);

/// Null control: label sequences permuted across utterances so features carry
/// no information about their targets.
std::vector<SequenceExample> ShuffleTargets(const std::vector<SequenceExample>& examples,
                                            std::uint64_t seed);

}  // namespace emgspeech
