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

#include "emgspeech/signal_io.hpp"
#include "emgspeech/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace emgspeech {

struct Codebook {
  MatrixXdR centers;  // k x d
  std::uint64_t seed = 0;

  std::size_t k() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centers.cols()); }
};

struct KMeansOptions {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  std::size_t workers = 1;
};

struct KMeansResult {
  Codebook codebook;
  std::vector<double> inertia_trace;  // after each Lloyd iteration
  std::size_t iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations; stops when the relative
/// inertia change drops below tol. Empty clusters are re-seeded with the frame
/// farthest from its current centre. Throws if frames < k or the frames have
/// fewer than k distinct rows.
KMeansResult FitCodebook(const Eigen::Ref<const MatrixXdR>& frames, const KMeansOptions& options);

/// Nearest centre per frame by squared Euclidean distance (ties -> lowest id).
std::vector<std::int32_t> AssignNearest(const Codebook& codebook,
                                        const Eigen::Ref<const MatrixXdR>& frames,
                                        std::size_t workers = 1);

/// Sum of squared distances to the assigned centres.
double Inertia(const Codebook& codebook, const Eigen::Ref<const MatrixXdR>& frames,
               const std::vector<std::int32_t>& assignment);

/// Unit ids for every frame. `collapse_repeats` merges consecutive duplicates.
LabelSequence Quantize(const Codebook& codebook, const Eigen::Ref<const MatrixXdR>& frames,
                       bool collapse_repeats = false, std::size_t workers = 1);

/// Container type 4: rows = k, cols = d, float32 payload, seed in header.
void SaveCodebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook LoadCodebook(const std::filesystem::path& path);

}  // namespace emgspeech
