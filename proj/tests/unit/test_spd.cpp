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
#include "emgspeech/rng.hpp"
#include "emgspeech/spd.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace emgspeech;

namespace {

CovFrame RandomSpd(Rng& rng, Eigen::Index v) {
  Eigen::MatrixXd a(v, v + 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.Normal();
  CovFrame c;
  c.mat = a * a.transpose() / static_cast<double>(a.cols());
  c.mat.diagonal().array() += 0.05;
  return c;
}

}  // namespace

TEST_CASE("covariance of a frame is (1/tau) E E^T plus a relative ridge") {
  Rng rng(1);
  Eigen::MatrixXd e(4, 125);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = rng.Normal();
  const CovFrame c = Covariance(e, 1e-6);
  const Eigen::MatrixXd raw = e * e.transpose() / 125.0;
  const double delta = 1e-6 * raw.trace() / 4.0;
  CHECK(c.epsilon == doctest::Approx(1.0 / 125.0));
  CHECK((c.mat - raw - delta * Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  CHECK(c.mat.isApprox(c.mat.transpose(), 0.0));

  const MatrixXfR ef = e.cast<float>();
  CHECK(Covariance(ef).mat.isApprox(c.mat, 1e-5));
}

TEST_CASE("a silent frame is degenerate") {
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 50);
  CHECK_THROWS_AS(Covariance(zeros), Error);
}

TEST_CASE("diag power and vectorisation") {
  Rng rng(2);
  const CovFrame c = RandomSpd(rng, 5);
  CHECK(DiagPower(c).isApprox(c.mat.diagonal()));
  const Eigen::VectorXd flat = VecCov(c);
  REQUIRE(flat.size() == 25);
  CHECK(flat(1 * 5 + 3) == c.mat(1, 3));
  CHECK(UnvecCov(flat).mat == c.mat);
  CHECK_THROWS_AS(UnvecCov(Eigen::VectorXd::Zero(7)), Error);
}

TEST_CASE("Cholesky reconstructs and matches Eigen") {
  Rng rng(3);
  for (Eigen::Index v : {2, 22, 31}) {
    const CovFrame c = RandomSpd(rng, v);
    const CholFrame l = Cholesky(c);
    CHECK(l.lower.isLowerTriangular());
    for (Eigen::Index i = 0; i < v; ++i) CHECK(l.lower(i, i) > 0.0);
    const double rel = (Reconstruct(l).mat - c.mat).norm() / c.mat.norm();
    CHECK(rel <= 1e-8);
    const Eigen::MatrixXd reference = c.mat.llt().matrixL();
    CHECK((l.lower - reference).norm() <= 1e-10 * reference.norm());
  }
}

TEST_CASE("Cholesky rejects indefinite input with the failing pivot") {
  CovFrame c;
  c.mat = Eigen::MatrixXd::Identity(3, 3);
  c.mat(2, 2) = -1.0;
  try {
    Cholesky(c);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotPositiveDefinite);
    CHECK(std::string(e.what()).find("pivot 2") != std::string::npos);
  }
}

TEST_CASE("geodesic distance matches the reference implementation") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const CovFrame a = RandomSpd(rng, 6);
    const CovFrame b = RandomSpd(rng, 6);
    CHECK(GeodesicDistance(Cholesky(a), Cholesky(b)) ==
          doctest::Approx(oracle::LogCholeskyDistance(a.mat, b.mat)).epsilon(1e-10));
  }
}

TEST_CASE("geodesic distance is a metric") {
  Rng rng(5);
  for (Eigen::Index v : {2, 22, 31}) {
    for (int trial = 0; trial < 200; ++trial) {
      const CholFrame a = Cholesky(RandomSpd(rng, v));
      const CholFrame b = Cholesky(RandomSpd(rng, v));
      const CholFrame c = Cholesky(RandomSpd(rng, v));
      const double ab = GeodesicDistance(a, b);
      REQUIRE(GeodesicDistance(a, a) == 0.0);
      REQUIRE(ab > 0.0);
      REQUIRE(ab == GeodesicDistance(b, a));
      REQUIRE(GeodesicDistance(a, c) <= ab + GeodesicDistance(b, c) + 1e-12);
    }
  }
}

TEST_CASE("geodesic distance is Euclidean in log-Cholesky coordinates") {
  Rng rng(6);
  const CholFrame a = Cholesky(RandomSpd(rng, 5));
  const CholFrame b = Cholesky(RandomSpd(rng, 5));
  const Eigen::VectorXd ca = LogCholeskyCoords(a);
  REQUIRE(ca.size() == 15);
  CHECK((ca - LogCholeskyCoords(b)).norm() == doctest::Approx(GeodesicDistance(a, b)).epsilon(1e-12));
  CHECK((FromLogCholeskyCoords(ca, 5).lower - a.lower).norm() < 1e-12);
  // Scaling a matrix by s shifts every log-diagonal by log(s) / 2.
  CovFrame scaled = Reconstruct(a);
  scaled.mat *= 4.0;
  CHECK(GeodesicDistance(a, Cholesky(scaled)) > 0.0);
}

TEST_CASE("dimension mismatch is reported") {
  Rng rng(7);
  const CholFrame a = Cholesky(RandomSpd(rng, 3));
  const CholFrame b = Cholesky(RandomSpd(rng, 4));
  CHECK_THROWS_AS(GeodesicDistance(a, b), Error);
}
