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

// Independent reference computations shared by unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace emgspeech::oracle {

/// Squared magnitude of an order-N digital Butterworth bandpass obtained by
/// the bilinear transform with pre-warped edges: 1 / (1 + lambda^(2N)) with
/// lambda = (W^2 - W0^2) / (W * BW) on the warped axis W = 2 fs tan(pi f / fs).
/// This is also the magnitude of a forward-backward (two-pass) filter.
inline double ButterworthBandpassPower(double f, double f_lo, double f_hi, double fs, int order) {
  auto warp = [fs](double hz) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); };
  const double w = warp(f);
  const double lo = warp(f_lo);
  const double hi = warp(f_hi);
  const double lambda = (w * w - lo * hi) / (w * (hi - lo));
  return 1.0 / (1.0 + std::pow(lambda, 2 * order));
}

/// Frame count by enumerating window start positions.
inline std::size_t CountFrames(std::size_t n, std::size_t hop, std::size_t window) {
  std::size_t count = 0;
  for (std::size_t start = 0; start + window <= n; start += hop) ++count;
  return count;
}

/// -log P(target) by enumerating every length-T path over `classes` symbols
/// and keeping those that collapse (merge repeats, drop blank 0) to `target`.
inline double CtcBruteForce(const Eigen::MatrixXd& log_probs, const std::vector<std::int32_t>& target) {
  const auto frames = static_cast<std::size_t>(log_probs.rows());
  const auto classes = static_cast<std::size_t>(log_probs.cols());
  std::vector<std::size_t> path(frames, 0);
  double total = 0.0;
  while (true) {
    std::vector<std::int32_t> collapsed;
    std::int64_t previous = -1;
    for (auto c : path) {
      if (static_cast<std::int64_t>(c) != previous && c != 0) collapsed.push_back(static_cast<std::int32_t>(c));
      previous = static_cast<std::int64_t>(c);
    }
    if (collapsed == target) {
      double lp = 0.0;
      for (std::size_t t = 0; t < frames; ++t) lp += log_probs(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(path[t]));
      total += std::exp(lp);
    }
    std::size_t pos = 0;
    while (pos < frames && ++path[pos] == classes) path[pos++] = 0;
    if (pos == frames) break;
  }
  return total > 0.0 ? -std::log(total) : std::numeric_limits<double>::infinity();
}

/// Distance between two SPD matrices through their Cholesky factors, computed
/// with Eigen's LLT: Frobenius distance of strictly-lower parts combined with
/// the distance of log-diagonals.
inline double LogCholeskyDistance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd la = a.llt().matrixL();
  const Eigen::MatrixXd lb = b.llt().matrixL();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) sum += (la(i, j) - lb(i, j)) * (la(i, j) - lb(i, j));
    const double d = std::log(la(i, i)) - std::log(lb(i, i));
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Unit-cost edit distance by full dynamic-programming table.
inline std::size_t EditDistance(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    }
  }
  return d[a.size()][b.size()];
}

}  // namespace emgspeech::oracle
