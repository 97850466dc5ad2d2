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
#include "emgspeech/synth.hpp"
#include "emgspeech/trainer.hpp"

#include <doctest.h>

using namespace emgspeech;

namespace {

SynthSpec SmallTask() {
  SynthSpec spec;
  spec.seed = 21;
  spec.electrodes = 8;
  spec.k = 5;
  spec.sep = 1.0;
  spec.noise = 0.0;
  spec.min_len = 3;
  spec.max_len = 5;
  spec.utterances = 16;
  return spec;
}

TdsModel<float> SmallModel(std::uint64_t seed) {
  TdsArch arch;
  arch.kind = FeatureKind::kDiagE;
  arch.electrodes = 8;
  arch.d_in = 8;
  arch.hidden = 32;
  arch.blocks = 1;
  arch.kernel = 5;
  arch.classes = 6;
  TdsModel<float> model(arch);
  model.InitializeRandom(seed);
  return model;
}

}  // namespace

TEST_CASE("a zero learning rate leaves parameters untouched") {
  const SeqTask task = GenSeqTask(SmallTask());
  const TdsModel<float> model = SmallModel(1);
  TrainConfig config;
  config.lr = 0.0;
  config.max_epochs = 3;
  config.batch_size = 4;
  const TrainResult r = Train(model, task.examples, {}, config);
  CHECK(r.best.params() == model.params());
  CHECK(r.history.size() == 3);
}

TEST_CASE("training is deterministic across worker counts") {
  const SeqTask task = GenSeqTask(SmallTask());
  TrainConfig config;
  config.lr = 3e-3;
  config.max_epochs = 4;
  config.batch_size = 4;
  config.seed = 5;
  const TrainResult a = Train(SmallModel(2), task.examples, {}, config);
  config.workers = 3;
  const TrainResult b = Train(SmallModel(2), task.examples, {}, config);
  CHECK(a.best.params() == b.best.params());
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].train_loss == b.history[i].train_loss);
}

TEST_CASE("a planted noiseless task is learned") {
  const SynthSpec spec = SmallTask();
  const SeqTask task = GenSeqTask(spec);
  const auto val = GenSeqExamples(spec, task.templates, 99, 8);
  TrainConfig config;
  config.lr = 3e-3;
  config.max_epochs = 80;
  config.batch_size = 4;
  config.seed = 3;
  const TrainResult r = Train(SmallModel(4), task.examples, val, config);
  CHECK(!r.diverged);
  CHECK(r.history.front().train_loss > r.history.back().train_loss);
  CHECK(ErrorRate(r.best, val) < 0.1);
  const std::string csv = TrainingMetricsCsv(r.history);
  CHECK(csv.rfind("epoch,train_loss,val_error_rate,skipped\n", 0) == 0);
}

TEST_CASE("infeasible utterances are counted as skipped") {
  std::vector<SequenceExample> data(2);
  data[0].features = MatrixXfR::Ones(2, 8);
  data[0].target = {0, 0, 0, 0};
  data[1].features = MatrixXfR::Ones(6, 8);
  data[1].target = {1, 2};
  TrainConfig config;
  config.max_epochs = 1;
  config.batch_size = 2;
  const TrainResult r = Train(SmallModel(6), data, {}, config);
  CHECK(r.history.at(0).skipped == 1);
}

TEST_CASE("training config validation") {
  TrainConfig config;
  config.batch_size = 0;
  CHECK_THROWS_AS(config.Validate(), Error);
  config = TrainConfig{};
  config.lr = -1.0;
  CHECK_THROWS_AS(config.Validate(), Error);
  CHECK_THROWS_AS(Train(SmallModel(7), {}, {}, TrainConfig{}), Error);
}
