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

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace emgspeech {

/// Class index reserved for the CTC blank. Vocabulary id v maps to class v + 1.
inline constexpr std::int32_t kBlank = 0;

template <typename Scalar>
using LogProbMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct CtcResult {
  Scalar loss = 0;                   // -log P(target | log_probs)
  bool feasible = true;              // false => loss is +inf and grad is zero
  LogProbMatrix<Scalar> grad;        // d loss / d log_probs, T x S
};

/// Minimum number of frames needed to emit `target` (length plus one blank per
/// adjacent repeat).
std::size_t CtcMinFrames(const std::vector<std::int32_t>& target);

/// Forward-backward over the blank-interleaved lattice, entirely in log space.
/// `log_probs` is T x S with class 0 the blank; `target` holds classes in
/// [1, S). Each log-prob entry is treated as an independent input, so the
/// gradient is exact for unnormalized inputs too.
template <typename Scalar>
CtcResult<Scalar> CtcLoss(const LogProbMatrix<Scalar>& log_probs,
                          const std::vector<std::int32_t>& target);

/// Per-frame argmax (ties -> lowest class), collapse repeats, drop blanks.
/// Returned values are classes (>= 1).
template <typename Scalar>
std::vector<std::int32_t> GreedyDecode(const LogProbMatrix<Scalar>& log_probs);

/// Path argmax only, for inspection.
template <typename Scalar>
std::vector<std::int32_t> ArgmaxPath(const LogProbMatrix<Scalar>& log_probs);

/// Collapse-then-strip applied to an explicit path.
std::vector<std::int32_t> CollapsePath(const std::vector<std::int32_t>& path);

}  // namespace emgspeech
