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

#include "emgspeech/ctc.hpp"
#include "emgspeech/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace emgspeech;

namespace {

LogProbMatrix<double> RandomLogSoftmax(Rng& rng, Eigen::Index frames, Eigen::Index classes) {
  LogProbMatrix<double> m(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index s = 0; s < classes; ++s) m(t, s) = 2.0 * rng.Normal();
    const double lse = std::log(m.row(t).array().exp().sum());
    m.row(t).array() -= lse;
  }
  return m;
}

std::vector<std::int32_t> RandomTarget(Rng& rng, std::size_t len, std::size_t vocab) {
  std::vector<std::int32_t> t(len);
  for (auto& v : t) v = static_cast<std::int32_t>(1 + rng.Index(vocab));
  return t;
}

}  // namespace

TEST_CASE("two frames, one label: loss is -ln 0.75") {
  // Per-frame probabilities {blank: 0.5, a: 0.5}; paths a-a, a-blank, blank-a.
  LogProbMatrix<double> lp(2, 2);
  lp.setConstant(std::log(0.5));
  const auto r = CtcLoss(lp, {1});
  CHECK(r.feasible);
  CHECK(r.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("CTC loss matches path enumeration") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index frames = 1 + static_cast<Eigen::Index>(rng.Index(6));
    const std::size_t vocab = 1 + rng.Index(3);
    const std::size_t len = rng.Index(4);
    const auto lp = RandomLogSoftmax(rng, frames, static_cast<Eigen::Index>(vocab + 1));
    const auto target = RandomTarget(rng, len, vocab);
    const double expected = oracle::CtcBruteForce(lp, target);
    const auto r = CtcLoss(lp, target);
    if (std::isinf(expected)) {
      CHECK(!r.feasible);
      CHECK(std::isinf(r.loss));
    } else {
      REQUIRE(r.feasible);
      CHECK(r.loss == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("CTC gradient matches central differences") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lp = RandomLogSoftmax(rng, 7, 4);
    const auto target = RandomTarget(rng, 1 + rng.Index(3), 3);
    const auto r = CtcLoss(lp, target);
    REQUIRE(r.feasible);
    const double h = 1e-6;
    for (Eigen::Index t = 0; t < lp.rows(); ++t) {
      for (Eigen::Index s = 0; s < lp.cols(); ++s) {
        auto plus = lp;
        auto minus = lp;
        plus(t, s) += h;
        minus(t, s) -= h;
        const double fd = (CtcLoss(plus, target).loss - CtcLoss(minus, target).loss) / (2.0 * h);
        CHECK(std::abs(fd - r.grad(t, s)) <= 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("too few frames for the target is infeasible") {
  LogProbMatrix<double> lp(2, 3);
  lp.setConstant(std::log(1.0 / 3.0));
  CHECK(CtcMinFrames({1, 1}) == 3);
  CHECK(CtcMinFrames({1, 2}) == 2);
  const auto r = CtcLoss(lp, {1, 1});
  CHECK(!r.feasible);
  CHECK(std::isinf(r.loss));
  CHECK(r.grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single precision loss agrees with double") {
  Rng rng(3);
  const auto lp = RandomLogSoftmax(rng, 30, 6);
  const auto target = RandomTarget(rng, 8, 5);
  const LogProbMatrix<float> lpf = lp.cast<float>();
  CHECK(static_cast<double>(CtcLoss(lpf, target).loss) == doctest::Approx(CtcLoss(lp, target).loss).epsilon(1e-4));
}

TEST_CASE("greedy decoding collapses repeats and drops blanks") {
  CHECK(CollapsePath({0, 1, 1, 0, 1, 2, 2, 0}) == std::vector<std::int32_t>{1, 1, 2});
  CHECK(CollapsePath({0, 0, 0}).empty());
  CHECK(CollapsePath({}).empty());

  LogProbMatrix<double> lp(5, 3);
  lp.setConstant(-5.0);
  const int best[5] = {2, 2, 0, 2, 1};
  for (int t = 0; t < 5; ++t) lp(t, best[t]) = -0.1;
  CHECK(ArgmaxPath(lp) == std::vector<std::int32_t>{2, 2, 0, 2, 1});
  CHECK(GreedyDecode(lp) == std::vector<std::int32_t>{2, 2, 1});

  LogProbMatrix<double> tie(1, 3);
  tie << -1.0, -0.5, -0.5;
  CHECK(ArgmaxPath(tie) == std::vector<std::int32_t>{1});
}
