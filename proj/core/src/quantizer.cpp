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

#include "emgspeech/quantizer.hpp"

#include "emgspeech/error.hpp"
#include "emgspeech/parallel.hpp"
#include "emgspeech/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace emgspeech {

namespace {

double SquaredDistance(const Eigen::Ref<const MatrixXdR>& a, Eigen::Index i,
                       const Eigen::Ref<const MatrixXdR>& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

}  // namespace

std::vector<std::int32_t> AssignNearest(const Codebook& codebook, const Eigen::Ref<const MatrixXdR>& frames,
                                        std::size_t workers) {
  if (static_cast<std::size_t>(frames.cols()) != codebook.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "frames have d = " + std::to_string(frames.cols()) +
                                                   ", codebook has d = " + std::to_string(codebook.dim()));
  }
  std::vector<std::int32_t> ids(static_cast<std::size_t>(frames.rows()));
  ParallelFor(ids.size(), workers, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    std::int32_t arg = 0;
    for (Eigen::Index c = 0; c < codebook.centers.rows(); ++c) {
      const double dist = SquaredDistance(frames, static_cast<Eigen::Index>(i), codebook.centers, c);
      if (dist < best) {
        best = dist;
        arg = static_cast<std::int32_t>(c);
      }
    }
    ids[i] = arg;
  });
  return ids;
}

double Inertia(const Codebook& codebook, const Eigen::Ref<const MatrixXdR>& frames,
               const std::vector<std::int32_t>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    total += SquaredDistance(frames, static_cast<Eigen::Index>(i), codebook.centers, assignment[i]);
  }
  return total;
}

KMeansResult FitCodebook(const Eigen::Ref<const MatrixXdR>& frames, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(frames.rows());
  const std::size_t k = options.k;
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (n < k) {
    throw Error(ErrorCode::kInvalidArgument, "need at least k = " + std::to_string(k) + " frames, got " +
                                                 std::to_string(n));
  }
  if (!frames.allFinite()) throw Error(ErrorCode::kNonFinite, "frames contain non-finite values");

  Rng rng(options.seed);
  KMeansResult result;
  Codebook& book = result.codebook;
  book.seed = options.seed;
  book.centers.resize(static_cast<Eigen::Index>(k), frames.cols());

  // k-means++ seeding.
  std::vector<double> d2(n);
  const auto first = static_cast<Eigen::Index>(rng.Index(n));
  book.centers.row(0) = frames.row(first);
  for (std::size_t i = 0; i < n; ++i) d2[i] = SquaredDistance(frames, static_cast<Eigen::Index>(i), book.centers, 0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      throw Error(ErrorCode::kDegenerate, "frames have fewer than k = " + std::to_string(k) + " distinct rows");
    }
    const double target = rng.Uniform() * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > target) break;
    }
    book.centers.row(static_cast<Eigen::Index>(c)) = frames.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(frames, static_cast<Eigen::Index>(i), book.centers,
                                              static_cast<Eigen::Index>(c)));
    }
  }

  // Lloyd iterations.
  std::vector<std::int32_t> assignment = AssignNearest(book, frames, options.workers);
  double inertia = Inertia(book, frames, assignment);
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    MatrixXdR sums = MatrixXdR::Zero(static_cast<Eigen::Index>(k), frames.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(assignment[i]) += frames.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(assignment[i])];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      const auto row = static_cast<Eigen::Index>(c);
      if (counts[c] > 0) {
        book.centers.row(row) = sums.row(row) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the frame farthest from its centre.
      double worst = -1.0;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double dist = SquaredDistance(frames, static_cast<Eigen::Index>(i), book.centers, assignment[i]);
        if (dist > worst) {
          worst = dist;
          arg = i;
        }
      }
      taken[arg] = true;
      book.centers.row(row) = frames.row(static_cast<Eigen::Index>(arg));
    }
    assignment = AssignNearest(book, frames, options.workers);
    const double next = Inertia(book, frames, assignment);
    result.inertia_trace.push_back(next);
    ++result.iterations;
    const double change = std::abs(inertia - next) / std::max(inertia, std::numeric_limits<double>::min());
    inertia = next;
    if (inertia == 0.0 || change < options.tol) break;
  }
  return result;
}

LabelSequence Quantize(const Codebook& codebook, const Eigen::Ref<const MatrixXdR>& frames,
                       bool collapse_repeats, std::size_t workers) {
  const auto ids = AssignNearest(codebook, frames, workers);
  LabelSequence labels;
  labels.vocab = VocabKind::kUnits100;
  for (auto id : ids) {
    if (collapse_repeats && !labels.symbols.empty() && labels.symbols.back() == id) continue;
    labels.symbols.push_back(id);
  }
  return labels;
}

void SaveCodebook(const Codebook& codebook, const std::filesystem::path& path) {
  ContainerHeader h;
  h.type = ContainerType::kCodebook;
  h.rows = static_cast<std::uint32_t>(codebook.k());
  h.cols = static_cast<std::uint32_t>(codebook.dim());
  h.seed = codebook.seed;
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> centers =
      codebook.centers.cast<float>();
  WriteFloatContainer(path, h, centers.data());
}

Codebook LoadCodebook(const std::filesystem::path& path) {
  std::vector<float> payload;
  const ContainerHeader h = ReadFloatContainer(path, ContainerType::kCodebook, payload);
  if (h.rows == 0) throw Error(ErrorCode::kMalformedHeader, "codebook has no centres");
  Codebook book;
  book.seed = h.seed;
  book.centers = Eigen::Map<const MatrixXfR>(payload.data(), h.rows, h.cols).cast<double>();
  return book;
}

}  // namespace emgspeech
