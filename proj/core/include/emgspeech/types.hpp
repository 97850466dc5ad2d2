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
#include <optional>
#include <string>
#include <string_view>

namespace emgspeech {

// Time-major frames (T x d) and channel-major signals (V x N) are both stored
// row-major so the in-memory layout matches the on-disk payload.
using MatrixXfR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixXdR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureKind : std::uint16_t {
  kVecE = 1,   // row-major flattened covariance, d = V^2
  kDiagE = 2,  // covariance diagonal, d = V
  kVecB = 3,   // channel-major band powers, d = V * B
  kMelA = 4,   // 80 mel bands
  kSsH = 5,    // externally computed self-supervised features, d in {768, 1024}
};

enum class VocabKind : std::uint16_t {
  kUnits100 = 1,
  kPhonemes = 2,
};

// CLI / manifest spelling: "vec-e", "diag-e", "vec-b", "mel-a", "ss-h".
std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);

std::string_view VocabKindName(VocabKind kind);
VocabKind ParseVocabKind(std::string_view name);

}  // namespace emgspeech
