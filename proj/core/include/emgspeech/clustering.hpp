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

#include "emgspeech/spd.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace emgspeech {

enum class ClusterMetric {
  kEuclideanDiagonal,  // Euclidean distance between covariance diagonals
  kGeodesic,           // log-Cholesky distance between full covariances
};

struct GestureItem {
  CovFrame cov;
  std::int32_t label = 0;
};

struct GestureSet {
  std::vector<GestureItem> items;
  std::int32_t k = 0;

  std::vector<std::int32_t> Labels() const;
  /// >= 2 items per class and equal dimensions.
  void Validate() const;
};

/// Symmetric n x n distance matrix for the chosen metric, computed in
/// parallel over rows. Throws kNonFinite if any distance is not finite.
Eigen::MatrixXd DistanceMatrix(const GestureSet& set, ClusterMetric metric,
                               std::size_t workers = 1);
Eigen::MatrixXd DistanceMatrix(const std::vector<Eigen::VectorXd>& points,
                               std::size_t workers = 1);

struct KMedoidsResult {
  std::vector<std::size_t> medoids;        // item indices, ascending
  std::vector<std::int32_t> assignment;    // cluster id = position in medoids
  double cost = 0.0;
  std::size_t swap_iterations = 0;
  std::vector<double> cost_trace;          // after BUILD, then after each swap
};

struct KMedoidsOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
};

/// PAM: greedy BUILD followed by best-improvement SWAP until no swap lowers
/// the total cost or max_iter swaps were made. Ties resolve to the lowest
/// index at every step, so results do not depend on the seed.
KMedoidsResult KMedoids(const Eigen::Ref<const Eigen::MatrixXd>& distances,
                        const KMedoidsOptions& options);

/// Sum over items of the distance to the nearest medoid.
double MedoidCost(const Eigen::Ref<const Eigen::MatrixXd>& distances,
                  const std::vector<std::size_t>& medoids);

/// Minimum-cost assignment for a square cost matrix (Hungarian / Kuhn-Munkres).
/// Returns column index per row.
std::vector<std::size_t> SolveAssignment(const Eigen::Ref<const Eigen::MatrixXd>& cost);

struct AccuracyReport {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;               // clusters x labels (padded square)
  std::vector<std::int32_t> cluster_to_label;
};

/// Fraction of items whose cluster maps to their label under the best
/// one-to-one cluster/label matching. Unequal counts are padded with zeros.
AccuracyReport ClusterAccuracy(const std::vector<std::int32_t>& assignment,
                               const std::vector<std::int32_t>& labels);

struct PcaEmbedding {
  Eigen::MatrixX2d coords;                // n x 2
  Eigen::Vector2d explained_variance;     // fraction of total per component
  bool rank_deficient = false;            // second coordinate zeroed
};

/// Projection onto the top two principal axes of the mean-centred rows. Each
/// axis is signed so its largest-magnitude loading is positive.
PcaEmbedding PcaEmbed2d(const Eigen::Ref<const Eigen::MatrixXd>& features);

}  // namespace emgspeech
