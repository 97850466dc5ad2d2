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

#include "emgspeech/error.hpp"
#include "emgspeech/quantizer.hpp"
#include "emgspeech/rng.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace emgspeech;
using emgspeech::test::TempDir;

namespace {

MatrixXdR Blobs(std::uint64_t seed, std::size_t per_blob, const std::vector<Eigen::Vector2d>& centres, double spread) {
  Rng rng(seed);
  MatrixXdR x(static_cast<Eigen::Index>(per_blob * centres.size()), 2);
  Eigen::Index row = 0;
  for (const auto& c : centres) {
    for (std::size_t i = 0; i < per_blob; ++i, ++row) {
      x(row, 0) = c(0) + spread * rng.Normal();
      x(row, 1) = c(1) + spread * rng.Normal();
    }
  }
  return x;
}

}  // namespace

TEST_CASE("k-means separates well-spaced blobs") {
  const std::vector<Eigen::Vector2d> centres = {{0, 0}, {10, 0}, {0, 10}};
  const MatrixXdR x = Blobs(1, 50, centres, 0.3);
  KMeansOptions options;
  options.k = 3;
  options.seed = 4;
  const KMeansResult r = FitCodebook(x, options);
  const auto ids = AssignNearest(r.codebook, x);
  for (std::size_t b = 0; b < 3; ++b) {
    std::set<std::int32_t> seen(ids.begin() + static_cast<std::ptrdiff_t>(50 * b),
                                ids.begin() + static_cast<std::ptrdiff_t>(50 * (b + 1)));
    CHECK(seen.size() == 1);
  }
  CHECK(std::set<std::int32_t>(ids.begin(), ids.end()).size() == 3);
  for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
    CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] * (1.0 + 1e-12));
  }
  CHECK(Inertia(r.codebook, x, ids) == doctest::Approx(r.inertia_trace.back()));
}

TEST_CASE("k-means is deterministic for a seed") {
  const MatrixXdR x = Blobs(2, 40, {{0, 0}, {3, 3}, {6, 0}, {-3, 2}}, 1.0);
  KMeansOptions options;
  options.k = 4;
  options.seed = 9;
  const auto a = FitCodebook(x, options);
  options.workers = 3;
  const auto b = FitCodebook(x, options);
  CHECK(a.codebook.centers == b.codebook.centers);
}

TEST_CASE("nearest-centre ties go to the lowest id") {
  Codebook cb;
  cb.centers.resize(2, 1);
  cb.centers << -1.0, 1.0;
  MatrixXdR x(3, 1);
  x << 0.0, 0.9, -0.2;
  CHECK(AssignNearest(cb, x) == std::vector<std::int32_t>{0, 1, 0});
}

TEST_CASE("quantize collapses consecutive repeats on request") {
  Codebook cb;
  cb.centers.resize(2, 1);
  cb.centers << 0.0, 5.0;
  MatrixXdR x(5, 1);
  x << 0.1, 0.2, 4.9, 5.1, 0.0;
  CHECK(Quantize(cb, x).symbols == std::vector<std::int32_t>{0, 0, 1, 1, 0});
  CHECK(Quantize(cb, x, true).symbols == std::vector<std::int32_t>{0, 1, 0});
}

TEST_CASE("k-means input errors") {
  MatrixXdR x = MatrixXdR::Ones(10, 2);
  KMeansOptions options;
  options.k = 3;
  CHECK_THROWS_AS(FitCodebook(x, options), Error);
  CHECK_THROWS_AS(FitCodebook(x.topRows(2), options), Error);
}

TEST_CASE("codebook round trip") {
  TempDir dir("quant");
  const MatrixXdR x = Blobs(3, 20, {{0, 0}, {4, 4}}, 0.5);
  KMeansOptions options;
  options.k = 2;
  options.seed = 77;
  const Codebook cb = FitCodebook(x, options).codebook;
  SaveCodebook(cb, dir / "cb.cb");
  const Codebook back = LoadCodebook(dir / "cb.cb");
  CHECK(back.seed == 77);
  CHECK(back.k() == 2);
  CHECK(back.centers.isApprox(cb.centers, 1e-6));
}
