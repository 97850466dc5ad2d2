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
#include "emgspeech/ctc.hpp"
#include "emgspeech/dsp.hpp"
#include "emgspeech/rng.hpp"
#include "emgspeech/spd.hpp"
#include "emgspeech/synth.hpp"
#include "emgspeech/tds.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace emgspeech;

namespace {

CovFrame RandomSpd(Rng& rng, Eigen::Index v) {
  Eigen::MatrixXd a(v, 2 * v);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.Normal();
  CovFrame c;
  c.mat = a * a.transpose() / static_cast<double>(a.cols());
  return c;
}

void BM_Cholesky(benchmark::State& state) {
  Rng rng(1);
  const CovFrame c = RandomSpd(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Cholesky(c));
}
BENCHMARK(BM_Cholesky)->Arg(22)->Arg(31);

void BM_GeodesicDistance(benchmark::State& state) {
  Rng rng(2);
  const CholFrame a = Cholesky(RandomSpd(rng, state.range(0)));
  const CholFrame b = Cholesky(RandomSpd(rng, state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(GeodesicDistance(a, b));
}
BENCHMARK(BM_GeodesicDistance)->Arg(22)->Arg(31);

void BM_CtcLoss(benchmark::State& state) {
  Rng rng(3);
  const Eigen::Index frames = state.range(0);
  LogProbMatrix<float> lp(frames, 101);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index s = 0; s < 101; ++s) lp(t, s) = static_cast<float>(rng.Normal());
    const float lse = std::log(lp.row(t).array().exp().sum());
    lp.row(t).array() -= lse;
  }
  std::vector<std::int32_t> target(static_cast<std::size_t>(frames / 3));
  for (auto& c : target) c = static_cast<std::int32_t>(1 + rng.Index(100));
  for (auto _ : state) benchmark::DoNotOptimize(CtcLoss(lp, target));
}
BENCHMARK(BM_CtcLoss)->Arg(100)->Arg(400);

void BM_EmgBandPower(benchmark::State& state) {
  Rng rng(4);
  Recording rec;
  rec.samples.resize(22, 5000 * state.range(0));
  for (Eigen::Index i = 0; i < rec.samples.size(); ++i) rec.samples.data()[i] = static_cast<float>(rng.Normal());
  for (int c = 0; c < 22; ++c) rec.channel_ids.push_back(std::to_string(c + 1));
  for (auto _ : state) benchmark::DoNotOptimize(EmgBandPower(rec, BandLayout::Log5()));
}
BENCHMARK(BM_EmgBandPower)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_KMedoids(benchmark::State& state) {
  SynthSpec spec;
  spec.seed = 5;
  spec.electrodes = 22;
  spec.k = 13;
  spec.n_per_class = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd d = DistanceMatrix(GenGestureSet(spec), ClusterMetric::kGeodesic);
  for (auto _ : state) benchmark::DoNotOptimize(KMedoids(d, {13, 0, 100}));
}
BENCHMARK(BM_KMedoids)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_TdsForward(benchmark::State& state) {
  TdsArch arch;
  arch.kind = FeatureKind::kDiagE;
  arch.electrodes = 22;
  arch.d_in = 22;
  arch.classes = 101;
  TdsModel<float> model(arch);
  model.InitializeRandom(6);
  Rng rng(7);
  TdsModel<float>::Matrix x(state.range(0), 22);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.Normal());
  for (auto _ : state) benchmark::DoNotOptimize(model.Forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TdsForward)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
