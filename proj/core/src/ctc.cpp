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

#include "emgspeech/ctc.hpp"

#include "emgspeech/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace emgspeech {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

std::size_t CtcMinFrames(const std::vector<std::int32_t>& target) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  return target.size() + repeats;
}

template <typename Scalar>
CtcResult<Scalar> CtcLoss(const LogProbMatrix<Scalar>& log_probs, const std::vector<std::int32_t>& target) {
  const auto frames = static_cast<std::size_t>(log_probs.rows());
  const auto classes = static_cast<std::int32_t>(log_probs.cols());
  if (frames == 0) throw Error(ErrorCode::kInvalidArgument, "CTC input has no frames");
  for (auto c : target) {
    if (c <= kBlank || c >= classes) {
      throw Error(ErrorCode::kInvalidArgument, "CTC target class " + std::to_string(c) + " outside [1, " +
                                                   std::to_string(classes) + ")");
    }
  }

  CtcResult<Scalar> result;
  result.grad = LogProbMatrix<Scalar>::Zero(log_probs.rows(), log_probs.cols());
  if (frames < CtcMinFrames(target)) {
    result.feasible = false;
    result.loss = std::numeric_limits<Scalar>::infinity();
    return result;
  }

  // Blank-interleaved label sequence: blank, c1, blank, c2, ..., blank.
  const std::size_t states = 2 * target.size() + 1;
  std::vector<std::int32_t> lattice(states, kBlank);
  for (std::size_t u = 0; u < target.size(); ++u) lattice[2 * u + 1] = target[u];
  auto can_skip = [&](std::size_t s) {
    return s >= 2 && lattice[s] != kBlank && lattice[s] != lattice[s - 2];
  };
  auto lp = [&](std::size_t t, std::size_t s) {
    return static_cast<double>(log_probs(static_cast<Eigen::Index>(t), lattice[s]));
  };

  // alpha includes the emission at t; beta covers frames after t only.
  std::vector<double> alpha(frames * states, kNegInf);
  std::vector<double> beta(frames * states, kNegInf);
  auto A = [&](std::size_t t, std::size_t s) -> double& { return alpha[t * states + s]; };
  auto B = [&](std::size_t t, std::size_t s) -> double& { return beta[t * states + s]; };

  A(0, 0) = lp(0, 0);
  if (states > 1) A(0, 1) = lp(0, 1);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double acc = A(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, A(t - 1, s - 1));
      if (can_skip(s)) acc = LogAdd(acc, A(t - 1, s - 2));
      if (acc != kNegInf) A(t, s) = acc + lp(t, s);
    }
  }

  B(frames - 1, states - 1) = 0.0;
  if (states > 1) B(frames - 1, states - 2) = 0.0;
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < states; ++s) {
      double acc = B(t + 1, s) + lp(t + 1, s);
      if (s + 1 < states) acc = LogAdd(acc, B(t + 1, s + 1) + lp(t + 1, s + 1));
      if (s + 2 < states && can_skip(s + 2)) acc = LogAdd(acc, B(t + 1, s + 2) + lp(t + 1, s + 2));
      B(t, s) = acc;
    }
  }

  double log_total = A(frames - 1, states - 1);
  if (states > 1) log_total = LogAdd(log_total, A(frames - 1, states - 2));
  if (!std::isfinite(log_total)) {
    result.feasible = false;
    result.loss = std::numeric_limits<Scalar>::infinity();
    return result;
  }
  result.loss = static_cast<Scalar>(-log_total);

  std::vector<double> occupancy(static_cast<std::size_t>(classes));
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kNegInf);
    for (std::size_t s = 0; s < states; ++s) {
      const auto c = static_cast<std::size_t>(lattice[s]);
      occupancy[c] = LogAdd(occupancy[c], A(t, s) + B(t, s));
    }
    for (std::int32_t c = 0; c < classes; ++c) {
      const double occ = occupancy[static_cast<std::size_t>(c)];
      if (occ != kNegInf) {
        result.grad(static_cast<Eigen::Index>(t), c) = static_cast<Scalar>(-std::exp(occ - log_total));
      }
    }
  }
  return result;
}

template <typename Scalar>
std::vector<std::int32_t> ArgmaxPath(const LogProbMatrix<Scalar>& log_probs) {
  std::vector<std::int32_t> path(static_cast<std::size_t>(log_probs.rows()));
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < log_probs.cols(); ++c) {
      if (log_probs(t, c) > log_probs(t, best)) best = c;
    }
    path[static_cast<std::size_t>(t)] = static_cast<std::int32_t>(best);
  }
  return path;
}

std::vector<std::int32_t> CollapsePath(const std::vector<std::int32_t>& path) {
  std::vector<std::int32_t> out;
  std::int32_t previous = -1;
  for (auto c : path) {
    if (c != previous && c != kBlank) out.push_back(c);
    previous = c;
  }
  return out;
}

template <typename Scalar>
std::vector<std::int32_t> GreedyDecode(const LogProbMatrix<Scalar>& log_probs) {
  return CollapsePath(ArgmaxPath(log_probs));
}

template CtcResult<float> CtcLoss(const LogProbMatrix<float>&, const std::vector<std::int32_t>&);
template CtcResult<double> CtcLoss(const LogProbMatrix<double>&, const std::vector<std::int32_t>&);
template std::vector<std::int32_t> ArgmaxPath(const LogProbMatrix<float>&);
template std::vector<std::int32_t> ArgmaxPath(const LogProbMatrix<double>&);
template std::vector<std::int32_t> GreedyDecode(const LogProbMatrix<float>&);
template std::vector<std::int32_t> GreedyDecode(const LogProbMatrix<double>&);

}  // namespace emgspeech
