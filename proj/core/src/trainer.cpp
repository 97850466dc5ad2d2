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

#include "emgspeech/trainer.hpp"

#include "emgspeech/ctc.hpp"
#include "emgspeech/error.hpp"
#include "emgspeech/metrics.hpp"
#include "emgspeech/parallel.hpp"
#include "emgspeech/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace emgspeech {

namespace {

std::vector<std::int32_t> ToClasses(const std::vector<std::int32_t>& target) {
  std::vector<std::int32_t> classes(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) classes[i] = target[i] + 1;
  return classes;
}

// Shuffle, then sort windows of 4 batches by length so batches hold
// utterances of similar duration.
std::vector<std::vector<std::size_t>> MakeBatches(const std::vector<SequenceExample>& data,
                                                  std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  const std::size_t window = batch_size * 4;
  for (std::size_t start = 0; start < order.size(); start += window) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + window));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return data[a].features.rows() < data[b].features.rows();
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch_size)));
  }
  Rng batch_rng(Rng::Derive(rng.Index(std::numeric_limits<std::uint32_t>::max()), 1));
  batch_rng.Shuffle(batches);
  return batches;
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(ErrorCode::kConfig, "lr must be finite and >= 0");
  if (batch_size == 0) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::kConfig, "Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw Error(ErrorCode::kConfig, "adam_eps must be > 0");
}

std::vector<std::vector<std::int32_t>> DecodeAll(const TdsModel<float>& model,
                                                 const std::vector<SequenceExample>& examples,
                                                 std::size_t workers) {
  std::vector<std::vector<std::int32_t>> out(examples.size());
  ParallelFor(examples.size(), workers, [&](std::size_t i) {
    auto path = GreedyDecode<float>(model.Forward(examples[i].features));
    for (auto& c : path) c -= 1;
    out[i] = std::move(path);
  });
  return out;
}

double ErrorRate(const TdsModel<float>& model, const std::vector<SequenceExample>& examples,
                 std::size_t workers) {
  std::vector<std::vector<std::int32_t>> targets;
  targets.reserve(examples.size());
  for (const auto& e : examples) targets.push_back(e.target);
  return ComputeErrorRate(targets, DecodeAll(model, examples, workers)).aggregate;
}

TrainResult Train(TdsModel<float> model, const std::vector<SequenceExample>& train,
                  const std::vector<SequenceExample>& val, const TrainConfig& config) {
  config.Validate();
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "training set is empty");
  const auto vocab = static_cast<std::int32_t>(model.arch().classes) - 1;
  for (const auto* set : {&train, &val}) {
    for (const auto& e : *set) {
      if (static_cast<std::size_t>(e.features.cols()) != model.arch().d_in) {
        throw Error(ErrorCode::kDimensionMismatch, "example feature dim does not match the model");
      }
      for (auto id : e.target) {
        if (id < 0 || id >= vocab) throw Error(ErrorCode::kInvalidArgument, "target id outside the vocabulary");
      }
    }
  }

  const std::size_t n_params = model.params().size();
  std::vector<double> m(n_params, 0.0);
  std::vector<double> v(n_params, 0.0);
  std::vector<std::vector<std::int32_t>> classes;
  classes.reserve(train.size());
  for (const auto& e : train) classes.push_back(ToClasses(e.target));

  Rng rng(config.seed);
  TrainResult result{model, {}, 0, false};
  const auto& select_set = val.empty() ? train : val;
  double best_error = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochMetrics metrics;
    metrics.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    bool diverged = false;

    for (const auto& batch : MakeBatches(train, config.batch_size, rng)) {
      std::vector<std::vector<float>> grads(batch.size());
      std::vector<float> losses(batch.size());
      ParallelFor(batch.size(), config.workers, [&](std::size_t i) {
        const std::size_t idx = batch[i];
        grads[i].assign(n_params, 0.0f);
        losses[i] = model.LossAndGradient(train[idx].features, classes[idx], grads[i], 1.0f);
      });
      std::vector<double> grad(n_params, 0.0);
      std::size_t used = 0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (std::isinf(losses[i])) {
          ++metrics.skipped;
          continue;
        }
        if (std::isnan(losses[i])) {
          diverged = true;
          break;
        }
        ++used;
        loss_sum += losses[i];
        ++loss_count;
        for (std::size_t p = 0; p < n_params; ++p) grad[p] += grads[i][p];
      }
      if (diverged) break;
      if (used == 0) continue;

      double norm2 = 0.0;
      for (double& g : grad) {
        g /= static_cast<double>(used);
        norm2 += g * g;
      }
      if (!std::isfinite(norm2)) {
        diverged = true;
        break;
      }
      const double norm = std::sqrt(norm2);
      const double clip = (config.clip_norm > 0.0 && norm > config.clip_norm) ? config.clip_norm / norm : 1.0;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto& params = model.params();
      for (std::size_t p = 0; p < n_params; ++p) {
        const double g = grad[p] * clip;
        m[p] = config.beta1 * m[p] + (1.0 - config.beta1) * g;
        v[p] = config.beta2 * v[p] + (1.0 - config.beta2) * g * g;
        const double update = config.lr * (m[p] / c1) / (std::sqrt(v[p] / c2) + config.adam_eps);
        params[p] = static_cast<float>(params[p] - update);
      }
    }

    if (diverged) {
      result.diverged = true;
      break;
    }
    metrics.train_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count)
                                        : std::numeric_limits<double>::infinity();
    metrics.val_error_rate = ErrorRate(model, select_set, config.workers);
    result.history.push_back(metrics);
    if (metrics.val_error_rate < best_error) {
      best_error = metrics.val_error_rate;
      result.best = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

std::string TrainingMetricsCsv(const std::vector<EpochMetrics>& history) {
  std::ostringstream out;
  out.precision(9);
  out << "epoch,train_loss,val_error_rate,skipped\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << h.train_loss << ',' << h.val_error_rate << ',' << h.skipped << '\n';
  }
  return out.str();
}

}  // namespace emgspeech
