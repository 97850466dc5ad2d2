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
#include "emgspeech/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>

using namespace emgspeech;

namespace {

std::vector<Eigen::VectorXd> Points(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<Eigen::VectorXd> out;
  for (auto [x, y] : xy) out.push_back(Eigen::Vector2d(x, y));
  return out;
}

double BruteForceAccuracy(const Eigen::MatrixXi& confusion) {
  std::vector<int> perm(static_cast<std::size_t>(confusion.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int matched = 0;
    for (std::size_t r = 0; r < perm.size(); ++r) matched += confusion(static_cast<Eigen::Index>(r), perm[r]);
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(confusion.sum());
}

}  // namespace

TEST_CASE("two separated pairs fall into their own clusters") {
  const auto pts = Points({{0, 0}, {0.1, 0}, {10, 10}, {10, 10.1}});
  const auto d = DistanceMatrix(pts);
  const auto r = KMedoids(d, {2, 0, 100});
  CHECK(r.assignment[0] == r.assignment[1]);
  CHECK(r.assignment[2] == r.assignment[3]);
  CHECK(r.assignment[0] != r.assignment[2]);
}

TEST_CASE("k = n makes every item its own medoid") {
  const auto pts = Points({{0, 0}, {1, 0}, {0, 3}, {5, 5}, {2, 2}});
  const auto r = KMedoids(DistanceMatrix(pts), {5, 0, 100});
  CHECK(r.cost == 0.0);
  CHECK(r.medoids == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("PAM finds the exhaustive optimum on a planted 8-point set") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 8; ++i) {
      const double cx = i < 4 ? 0.0 : 4.0;
      pts.push_back(Eigen::Vector2d(cx + rng.Normal(), rng.Normal()));
    }
    const Eigen::MatrixXd d = DistanceMatrix(pts);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_pair;
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t b = a + 1; b < 8; ++b) {
        const double cost = MedoidCost(d, {a, b});
        if (cost < best - 1e-12) {
          best = cost;
          best_pair = {a, b};
        }
      }
    }
    const auto r = KMedoids(d, {2, 0, 100});
    CHECK(r.cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.medoids == best_pair);
  }
}

TEST_CASE("SWAP never increases the cost") {
  Rng rng(4);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(Eigen::Vector3d(rng.Normal(), rng.Normal(), rng.Normal()));
  const auto r = KMedoids(DistanceMatrix(pts), {5, 0, 100});
  REQUIRE(!r.cost_trace.empty());
  for (std::size_t i = 1; i < r.cost_trace.size(); ++i) CHECK(r.cost_trace[i] <= r.cost_trace[i - 1]);
  CHECK(r.cost == doctest::Approx(r.cost_trace.back()));
  CHECK(r.cost == doctest::Approx(MedoidCost(DistanceMatrix(pts), r.medoids)));
}

TEST_CASE("k-medoids input errors") {
  const auto d = DistanceMatrix(Points({{0, 0}, {1, 1}}));
  CHECK_THROWS_AS(KMedoids(d, {3, 0, 100}), Error);
  Eigen::MatrixXd bad = d;
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(KMedoids(bad, {1, 0, 100}), Error);
}

TEST_CASE("cluster accuracy on the 3x3 confusion example") {
  // Clusters 0..2 against labels 0..2 with confusion [[5,0,0],[0,4,1],[0,1,4]].
  std::vector<std::int32_t> clusters;
  std::vector<std::int32_t> labels;
  const int confusion[3][3] = {{5, 0, 0}, {0, 4, 1}, {0, 1, 4}};
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l < 3; ++l) {
      for (int n = 0; n < confusion[c][l]; ++n) {
        clusters.push_back(c);
        labels.push_back(l);
      }
    }
  }
  const AccuracyReport r = ClusterAccuracy(clusters, labels);
  CHECK(r.accuracy == doctest::Approx(13.0 / 15.0));
  CHECK(r.accuracy == doctest::Approx(BruteForceAccuracy(r.confusion)));
  CHECK(r.confusion(1, 2) == 1);
}

TEST_CASE("cluster accuracy is invariant to relabelling") {
  Rng rng(5);
  std::vector<std::int32_t> labels(40);
  std::vector<std::int32_t> clusters(40);
  for (std::size_t i = 0; i < 40; ++i) {
    labels[i] = static_cast<std::int32_t>(rng.Index(4));
    clusters[i] = static_cast<std::int32_t>(rng.Index(4));
  }
  const double base = ClusterAccuracy(clusters, labels).accuracy;
  std::vector<std::int32_t> perm = {2, 0, 3, 1};
  std::vector<std::int32_t> renamed(40);
  for (std::size_t i = 0; i < 40; ++i) renamed[i] = perm[static_cast<std::size_t>(clusters[i])];
  CHECK(ClusterAccuracy(renamed, labels).accuracy == base);
  CHECK(ClusterAccuracy(labels, labels).accuracy == 1.0);
  CHECK(base == doctest::Approx(BruteForceAccuracy(ClusterAccuracy(clusters, labels).confusion)));
}

TEST_CASE("unequal cluster and label counts are padded") {
  const std::vector<std::int32_t> clusters = {0, 0, 1, 1, 2};
  const std::vector<std::int32_t> labels = {0, 0, 1, 1, 1};
  const AccuracyReport r = ClusterAccuracy(clusters, labels);
  CHECK(r.confusion.rows() == r.confusion.cols());
  CHECK(r.accuracy == doctest::Approx(0.8));
  CHECK_THROWS_AS(ClusterAccuracy({0, 1}, {0}), Error);
}

TEST_CASE("Hungarian solver matches brute force") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd cost(6, 6);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = rng.Uniform(0.0, 10.0);
    const auto assignment = SolveAssignment(cost);
    double got = 0.0;
    for (std::size_t r = 0; r < 6; ++r) got += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(assignment[r]));
    std::vector<int> perm = {0, 1, 2, 3, 4, 5};
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int r = 0; r < 6; ++r) total += cost(r, perm[static_cast<std::size_t>(r)]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("PCA on collinear points zeroes the second coordinate") {
  Eigen::MatrixXd x(5, 3);
  for (int i = 0; i < 5; ++i) x.row(i) = Eigen::RowVector3d(1, 2, -1) * static_cast<double>(i);
  const PcaEmbedding e = PcaEmbed2d(x);
  CHECK(e.rank_deficient);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(e.coords(i, 1)) < 1e-9);
  CHECK(e.explained_variance(0) == doctest::Approx(1.0));
}

TEST_CASE("PCA on an isotropic cloud splits variance evenly") {
  Rng rng(7);
  Eigen::MatrixXd x(4000, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  const PcaEmbedding e = PcaEmbed2d(x);
  CHECK(e.explained_variance(0) == doctest::Approx(0.5).epsilon(0.2));
  CHECK(e.explained_variance(0) + e.explained_variance(1) == doctest::Approx(1.0));
}

TEST_CASE("PCA maps duplicate points together and fixes signs") {
  Rng rng(8);
  Eigen::MatrixXd x(6, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  x.row(5) = x.row(2);
  const PcaEmbedding e = PcaEmbed2d(x);
  CHECK(e.coords.row(5) == e.coords.row(2));
  const PcaEmbedding flipped = PcaEmbed2d(-x);
  // Negating the data keeps the sign convention on the axes, so coordinates flip.
  CHECK((flipped.coords + e.coords).norm() < 1e-9);
  CHECK_THROWS_AS(PcaEmbed2d(x.topRows(2)), Error);
}
