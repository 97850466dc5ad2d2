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

#include "emgspeech/clustering.hpp"

#include "emgspeech/error.hpp"
#include "emgspeech/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace emgspeech {

std::vector<std::int32_t> GestureSet::Labels() const {
  std::vector<std::int32_t> labels;
  labels.reserve(items.size());
  for (const auto& item : items) labels.push_back(item.label);
  return labels;
}

void GestureSet::Validate() const {
  if (items.empty()) throw Error(ErrorCode::kInvalidArgument, "gesture set is empty");
  std::map<std::int32_t, std::size_t> counts;
  const Eigen::Index dim = items.front().cov.dim();
  for (const auto& item : items) {
    if (item.cov.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "gesture items differ in V");
    if (item.label < 0 || item.label >= k) {
      throw Error(ErrorCode::kInvalidArgument, "gesture label outside [0, k)");
    }
    ++counts[item.label];
  }
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw Error(ErrorCode::kInvalidArgument, "class " + std::to_string(label) + " has fewer than 2 items");
    }
  }
}

namespace {

Eigen::MatrixXd FillSymmetric(std::size_t n, std::size_t workers,
                              const std::function<double(std::size_t, std::size_t)>& dist) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  ParallelFor(n, workers, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double value = dist(i, j);
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::kNonFinite, "non-finite distance between items " + std::to_string(i) +
                                               " and " + std::to_string(j));
      }
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
    }
  });
  return d;
}

}  // namespace

Eigen::MatrixXd DistanceMatrix(const GestureSet& set, ClusterMetric metric, std::size_t workers) {
  const std::size_t n = set.items.size();
  if (metric == ClusterMetric::kGeodesic) {
    std::vector<CholFrame> factors;
    factors.reserve(n);
    for (const auto& item : set.items) factors.push_back(Cholesky(item.cov));
    return FillSymmetric(n, workers, [&](std::size_t i, std::size_t j) {
      return GeodesicDistance(factors[i], factors[j]);
    });
  }
  std::vector<Eigen::VectorXd> diagonals;
  diagonals.reserve(n);
  for (const auto& item : set.items) diagonals.push_back(DiagPower(item.cov));
  return DistanceMatrix(diagonals, workers);
}

Eigen::MatrixXd DistanceMatrix(const std::vector<Eigen::VectorXd>& points, std::size_t workers) {
  return FillSymmetric(points.size(), workers, [&](std::size_t i, std::size_t j) {
    if (points[i].size() != points[j].size()) {
      throw Error(ErrorCode::kDimensionMismatch, "points differ in dimension");
    }
    return (points[i] - points[j]).norm();
  });
}

double MedoidCost(const Eigen::Ref<const Eigen::MatrixXd>& distances,
                  const std::vector<std::size_t>& medoids) {
  double cost = 0.0;
  for (Eigen::Index j = 0; j < distances.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m : medoids) best = std::min(best, distances(static_cast<Eigen::Index>(m), j));
    cost += best;
  }
  return cost;
}

KMedoidsResult KMedoids(const Eigen::Ref<const Eigen::MatrixXd>& distances,
                        const KMedoidsOptions& options) {
  const auto n = static_cast<std::size_t>(distances.rows());
  const std::size_t k = options.k;
  if (distances.cols() != distances.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "distance matrix must be square");
  }
  if (k == 0 || k > n) {
    throw Error(ErrorCode::kInvalidArgument, "k = " + std::to_string(k) + " but only " +
                                                 std::to_string(n) + " items");
  }
  if (!distances.allFinite()) throw Error(ErrorCode::kNonFinite, "distance matrix has non-finite entries");
  auto d = [&](std::size_t i, std::size_t j) {
    return distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  std::vector<std::size_t> medoids;
  std::vector<bool> is_medoid(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  // BUILD: first the 1-medoid optimum, then the largest cost reduction.
  {
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += d(i, j);
      if (sum < best_sum) {
        best_sum = sum;
        best = i;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = d(best, j);
  }
  while (medoids.size() < k) {
    std::size_t best = n;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double gain = 0.0;
      for (std::size_t j = 0; j < n; ++j) gain += std::max(0.0, nearest[j] - d(c, j));
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], d(best, j));
  }

  KMedoidsResult result;
  double cost = 0.0;
  for (double v : nearest) cost += v;
  result.cost_trace.push_back(cost);

  // SWAP: best improving (medoid, non-medoid) exchange per iteration.
  std::vector<double> second(n);
  std::vector<std::size_t> owner(n);
  while (result.swap_iterations < options.max_iter) {
    for (std::size_t j = 0; j < n; ++j) {
      double first = std::numeric_limits<double>::infinity();
      double next = std::numeric_limits<double>::infinity();
      std::size_t first_pos = 0;
      for (std::size_t p = 0; p < medoids.size(); ++p) {
        const double v = d(medoids[p], j);
        if (v < first) {
          next = first;
          first = v;
          first_pos = p;
        } else if (v < next) {
          next = v;
        }
      }
      nearest[j] = first;
      second[j] = next;
      owner[j] = first_pos;
    }

    double best_delta = 0.0;
    std::size_t best_pos = 0;
    std::size_t best_candidate = n;
    std::vector<std::size_t> order(medoids.size());
    for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return medoids[a] < medoids[b]; });
    for (std::size_t p : order) {
      for (std::size_t h = 0; h < n; ++h) {
        if (is_medoid[h]) continue;
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double via_h = d(h, j);
          const double replaced = owner[j] == p ? std::min(second[j], via_h) : std::min(nearest[j], via_h);
          delta += replaced - nearest[j];
        }
        if (delta < best_delta) {
          best_delta = delta;
          best_pos = p;
          best_candidate = h;
        }
      }
    }
    if (best_candidate == n || best_delta > -1e-12 * (1.0 + std::abs(cost))) break;
    is_medoid[medoids[best_pos]] = false;
    medoids[best_pos] = best_candidate;
    is_medoid[best_candidate] = true;
    cost = MedoidCost(distances, medoids);
    result.cost_trace.push_back(cost);
    ++result.swap_iterations;
  }

  std::sort(medoids.begin(), medoids.end());
  result.medoids = medoids;
  result.assignment.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < medoids.size(); ++p) {
      if (d(medoids[p], j) < d(medoids[best], j)) best = p;
    }
    result.assignment[j] = static_cast<std::int32_t>(best);
  }
  result.cost = MedoidCost(distances, medoids);
  return result;
}

std::vector<std::size_t> SolveAssignment(const Eigen::Ref<const Eigen::MatrixXd>& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw Error(ErrorCode::kDimensionMismatch, "cost matrix must be square");
  if (n == 0) return {};
  // Shortest augmenting path with row/column potentials; 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

AccuracyReport ClusterAccuracy(const std::vector<std::int32_t>& assignment,
                               const std::vector<std::int32_t>& labels) {
  if (assignment.size() != labels.size()) {
    throw Error(ErrorCode::kSizeMismatch, "assignment and labels differ in length");
  }
  if (assignment.empty()) throw Error(ErrorCode::kInvalidArgument, "no items to score");
  std::int32_t clusters = 0;
  std::int32_t classes = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (assignment[i] < 0 || labels[i] < 0) throw Error(ErrorCode::kInvalidArgument, "negative id");
    clusters = std::max(clusters, assignment[i] + 1);
    classes = std::max(classes, labels[i] + 1);
  }
  const std::int32_t n = std::max(clusters, classes);
  AccuracyReport report;
  report.confusion = Eigen::MatrixXi::Zero(n, n);
  for (std::size_t i = 0; i < labels.size(); ++i) ++report.confusion(assignment[i], labels[i]);
  const Eigen::MatrixXd cost = -report.confusion.cast<double>();
  const auto mapping = SolveAssignment(cost);
  long matched = 0;
  for (std::int32_t c = 0; c < n; ++c) matched += report.confusion(c, static_cast<Eigen::Index>(mapping[static_cast<std::size_t>(c)]));
  for (std::int32_t c = 0; c < clusters; ++c) {
    report.cluster_to_label.push_back(static_cast<std::int32_t>(mapping[static_cast<std::size_t>(c)]));
  }
  report.accuracy = static_cast<double>(matched) / static_cast<double>(labels.size());
  return report;
}

PcaEmbedding PcaEmbed2d(const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.rows() < 3) throw Error(ErrorCode::kInvalidArgument, "PCA embedding needs >= 3 items");
  const Eigen::MatrixXd centred = features.rowwise() - features.colwise().mean();
  const Eigen::MatrixXd scatter = centred.transpose() * centred;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::Index d = values.size();
  const double total = std::max(values.sum(), 0.0);

  PcaEmbedding out;
  out.coords = Eigen::MatrixX2d::Zero(features.rows(), 2);
  out.explained_variance.setZero();
  const double top = d >= 1 ? std::max(values(d - 1), 0.0) : 0.0;
  for (int c = 0; c < 2 && c < d; ++c) {
    const double lambda = std::max(values(d - 1 - c), 0.0);
    if (c == 1 && !(lambda > 1e-12 * top)) {
      out.rank_deficient = true;
      break;
    }
    if (c == 0 && !(lambda > 0.0)) {
      out.rank_deficient = true;
      break;
    }
    Eigen::VectorXd axis = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0) axis = -axis;
    out.coords.col(c) = centred * axis;
    out.explained_variance(c) = total > 0.0 ? lambda / total : 0.0;
  }
  if (d < 2) out.rank_deficient = true;
  return out;
}

}  // namespace emgspeech
