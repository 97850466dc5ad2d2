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

#include "emgspeech/dsp.hpp"
#include "emgspeech/trainer.hpp"
#include "emgspeech/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace emgspeech::cli {

struct SeqSynthConfig {
  std::uint32_t electrodes = 8;
  std::size_t vocab = 10;
  double sep = 1.0;
  double noise = 0.0;
  std::size_t min_len = 4;
  std::size_t max_len = 8;
  std::size_t train = 20;
  std::size_t val = 10;
  std::size_t test = 10;
};

struct GestureSynthConfig {
  std::uint32_t electrodes = 22;
  std::size_t classes = 13;
  std::size_t repetitions = 10;
  std::size_t subjects = 1;
  double sep = 1.0;
  double noise = 0.1;
  std::size_t samples = 7500;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: EMGSPEECH_WORKERS or hardware threads
  FeatureKind feature = FeatureKind::kDiagE;
  VocabKind target = VocabKind::kUnits100;

  FilterSpec filter;
  bool subtract_reference = true;

  double hop_ms = 20.0;
  double window_ms = 25.0;
  double lin31_window_ms = 50.0;
  BandMode band_layout = BandMode::kLog5;
  double ridge_rel = 1e-6;

  std::vector<std::string> cluster_metrics;
  std::size_t cluster_max_iter = 100;
  bool cluster_per_subject = true;
  bool cluster_bandpass = true;

  std::vector<std::string> probe_inputs;
  std::string probe_target = "diag-e";
  std::vector<double> lambda_grid;
  bool allow_vec_e = false;

  std::string quantize_input = "ss-h";
  std::size_t codebook_size = 100;
  std::size_t kmeans_max_iter = 100;
  double kmeans_tol = 1e-6;
  bool collapse_repeats = false;

  std::size_t hidden = 256;
  std::size_t blocks = 4;
  std::size_t kernel = 13;
  TrainConfig train;

  std::string vocoder_command;

  std::string synth_task = "seq";
  SeqSynthConfig seq;
  GestureSynthConfig gesture;

  /// Window used for band features under the configured layout.
  double BandWindowMs() const { return band_layout == BandMode::kLin31 ? lin31_window_ms : window_ms; }
  std::size_t Workers() const;
};

/// Full default configuration as JSON.
nlohmann::json DefaultConfigJson();

/// Overlays `user` on the defaults. Unknown keys and type changes throw
/// kConfig with the offending key path.
nlohmann::json MergeConfig(const nlohmann::json& user);

PipelineConfig ParseConfig(const nlohmann::json& effective);

nlohmann::json LoadConfigFile(const std::filesystem::path& path);

}  // namespace emgspeech::cli
