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

#include "emgspeech/tds.hpp"
#include "emgspeech/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace emgspeech {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;     // <= 0 disables clipping
  std::size_t patience = 0;   // epochs without val improvement; 0 disables
  std::size_t workers = 1;

  void Validate() const;
};

/// One utterance: features (T x d_in) and vocabulary ids (no blank).
struct SequenceExample {
  MatrixXfR features;
  std::vector<std::int32_t> target;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;      // mean per-utterance loss / target length
  double val_error_rate = 0.0;  // aggregate edits / target length
  std::size_t skipped = 0;      // infeasible utterances
};

struct TrainResult {
  TdsModel<float> best;
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  bool diverged = false;
};

/// Adam on the CTC loss with global-norm clipping. Batches are drawn from a
/// seeded shuffle, bucketed by length; per-utterance gradients are reduced in
/// a fixed order, so results do not depend on the worker count. The returned
/// model is the one with the lowest validation error rate (training error
/// rate when no validation set is given). A NaN loss stops training and
/// returns the last good model with `diverged` set.
TrainResult Train(TdsModel<float> model, const std::vector<SequenceExample>& train,
                  const std::vector<SequenceExample>& val, const TrainConfig& config);

/// Greedy decode of every example, returned as vocabulary ids.
std::vector<std::vector<std::int32_t>> DecodeAll(const TdsModel<float>& model,
                                                 const std::vector<SequenceExample>& examples,
                                                 std::size_t workers = 1);

/// Aggregate error rate of greedy decodes against the targets.
double ErrorRate(const TdsModel<float>& model, const std::vector<SequenceExample>& examples,
                 std::size_t workers = 1);

/// "epoch,train_loss,val_error_rate,skipped" rows.
std::string TrainingMetricsCsv(const std::vector<EpochMetrics>& history);

}  // namespace emgspeech
