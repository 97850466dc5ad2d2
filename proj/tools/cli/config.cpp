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

#include "config.hpp"

#include "emgspeech/error.hpp"
#include "emgspeech/parallel.hpp"

#include <fstream>
#include <sstream>

namespace emgspeech::cli {

using nlohmann::json;

namespace {

bool SameType(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // Integers may stand in for reals, not the other way round.
    return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
  }
  return a.type() == b.type();
}

void Overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw Error(ErrorCode::kConfig, (path.empty() ? "config" : path) + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string at = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw Error(ErrorCode::kConfig, "unknown config key '" + at + "'");
    json& slot = base[key];
    if (slot.is_object()) {
      Overlay(slot, value, at);
      continue;
    }
    if (!SameType(slot, value)) {
      throw Error(ErrorCode::kConfig, "config key '" + at + "' expects " + std::string(slot.type_name()) +
                                          ", got " + value.type_name());
    }
    if (slot.is_array() && !slot.empty()) {
      for (const auto& item : value) {
        if (!SameType(slot.front(), item)) {
          throw Error(ErrorCode::kConfig, "config key '" + at + "' has an element of the wrong type");
        }
      }
    }
    slot = value;
  }
}

template <typename T>
T Get(const json& j, const char* section, const char* key) {
  const json& node = section ? j.at(section).at(key) : j.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (node.is_number_integer() && node.get<std::int64_t>() < 0) {
      throw Error(ErrorCode::kConfig, std::string(section ? section : "") + (section ? "." : "") + key +
                                          " must be >= 0");
    }
  }
  return node.get<T>();
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kConfig, message);
}

}  // namespace

json DefaultConfigJson() {
  return json{
      {"seed", 0},
      {"workers", 0},
      {"feature", "diag-e"},
      {"target", "units"},
      {"preprocess", {{"filter_order", 3}, {"low_hz", 80.0}, {"high_hz", 1000.0}, {"subtract_reference", true}}},
      {"features",
       {{"hop_ms", 20.0},
        {"window_ms", 25.0},
        {"band_layout", "log5"},
        {"lin31_window_ms", 50.0},
        {"ridge_rel", 1e-6}}},
      {"cluster",
       {{"metrics", json::array({"diag-euclidean", "geodesic"})},
        {"max_iter", 100},
        {"per_subject", true},
        {"bandpass", true}}},
      {"probe",
       {{"inputs", json::array({"ss-h"})},
        {"target", "diag-e"},
        {"lambda_grid", json::array({1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2})},
        {"allow_vec_e", false}}},
      {"quantize",
       {{"input", "ss-h"}, {"k", 100}, {"max_iter", 100}, {"tol", 1e-6}, {"collapse_repeats", false}}},
      {"model", {{"hidden", 256}, {"blocks", 4}, {"kernel", 13}}},
      {"train",
       {{"lr", 1e-3},
        {"batch_size", 16},
        {"max_epochs", 200},
        {"beta1", 0.9},
        {"beta2", 0.999},
        {"adam_eps", 1e-8},
        {"clip_norm", 1.0},
        {"patience", 0}}},
      {"decode", {{"vocoder_command", "vocoder --units {units} --out {wav}"}}},
      {"synth",
       {{"task", "seq"},
        {"seq",
         {{"electrodes", 8},
          {"vocab", 10},
          {"sep", 1.0},
          {"noise", 0.0},
          {"min_len", 4},
          {"max_len", 8},
          {"train", 20},
          {"val", 10},
          {"test", 10}}},
        {"gesture",
         {{"electrodes", 22},
          {"classes", 13},
          {"repetitions", 10},
          {"subjects", 1},
          {"sep", 1.0},
          {"noise", 0.1},
          {"samples", 7500}}}}},
  };
}

json MergeConfig(const json& user) {
  json effective = DefaultConfigJson();
  if (!user.is_null()) Overlay(effective, user, "");
  return effective;
}

json LoadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
}

std::size_t PipelineConfig::Workers() const { return workers > 0 ? workers : DefaultWorkers(); }

PipelineConfig ParseConfig(const json& j) {
  PipelineConfig c;
  c.seed = Get<std::uint64_t>(j, nullptr, "seed");
  c.workers = Get<std::size_t>(j, nullptr, "workers");
  c.feature = ParseFeatureKind(Get<std::string>(j, nullptr, "feature"));
  Require(c.feature == FeatureKind::kDiagE || c.feature == FeatureKind::kVecE || c.feature == FeatureKind::kVecB,
          "feature must be one of vec-e, diag-e, vec-b");
  c.target = ParseVocabKind(Get<std::string>(j, nullptr, "target"));

  c.filter.order = Get<int>(j, "preprocess", "filter_order");
  c.filter.f_lo = Get<double>(j, "preprocess", "low_hz");
  c.filter.f_hi = Get<double>(j, "preprocess", "high_hz");
  c.subtract_reference = Get<bool>(j, "preprocess", "subtract_reference");

  c.hop_ms = Get<double>(j, "features", "hop_ms");
  c.window_ms = Get<double>(j, "features", "window_ms");
  c.lin31_window_ms = Get<double>(j, "features", "lin31_window_ms");
  const auto layout = Get<std::string>(j, "features", "band_layout");
  Require(layout == "log5" || layout == "lin31", "features.band_layout must be log5 or lin31");
  c.band_layout = layout == "log5" ? BandMode::kLog5 : BandMode::kLin31;
  c.ridge_rel = Get<double>(j, "features", "ridge_rel");
  Require(c.hop_ms > 0 && c.window_ms > 0 && c.lin31_window_ms > 0, "frame hop and window must be > 0");
  Require(c.ridge_rel >= 0, "features.ridge_rel must be >= 0");

  c.cluster_metrics = Get<std::vector<std::string>>(j, "cluster", "metrics");
  for (const auto& m : c.cluster_metrics) {
    Require(m == "diag-euclidean" || m == "geodesic", "cluster.metrics entries must be diag-euclidean or geodesic");
  }
  c.cluster_max_iter = Get<std::size_t>(j, "cluster", "max_iter");
  c.cluster_per_subject = Get<bool>(j, "cluster", "per_subject");
  c.cluster_bandpass = Get<bool>(j, "cluster", "bandpass");

  c.probe_inputs = Get<std::vector<std::string>>(j, "probe", "inputs");
  c.probe_target = Get<std::string>(j, "probe", "target");
  c.lambda_grid = Get<std::vector<double>>(j, "probe", "lambda_grid");
  c.allow_vec_e = Get<bool>(j, "probe", "allow_vec_e");
  Require(!c.lambda_grid.empty(), "probe.lambda_grid must not be empty");
  for (double l : c.lambda_grid) Require(l >= 0, "probe.lambda_grid values must be >= 0");

  c.quantize_input = Get<std::string>(j, "quantize", "input");
  c.codebook_size = Get<std::size_t>(j, "quantize", "k");
  c.kmeans_max_iter = Get<std::size_t>(j, "quantize", "max_iter");
  c.kmeans_tol = Get<double>(j, "quantize", "tol");
  c.collapse_repeats = Get<bool>(j, "quantize", "collapse_repeats");
  Require(c.codebook_size >= 1 && c.codebook_size <= 100, "quantize.k must lie in [1, 100]");

  c.hidden = Get<std::size_t>(j, "model", "hidden");
  c.blocks = Get<std::size_t>(j, "model", "blocks");
  c.kernel = Get<std::size_t>(j, "model", "kernel");

  c.train.lr = Get<double>(j, "train", "lr");
  c.train.batch_size = Get<std::size_t>(j, "train", "batch_size");
  c.train.max_epochs = Get<std::size_t>(j, "train", "max_epochs");
  c.train.beta1 = Get<double>(j, "train", "beta1");
  c.train.beta2 = Get<double>(j, "train", "beta2");
  c.train.adam_eps = Get<double>(j, "train", "adam_eps");
  c.train.clip_norm = Get<double>(j, "train", "clip_norm");
  c.train.patience = Get<std::size_t>(j, "train", "patience");
  c.train.seed = c.seed;
  c.train.Validate();

  c.vocoder_command = Get<std::string>(j, "decode", "vocoder_command");

  const json& synth = j.at("synth");
  c.synth_task = synth.at("task").get<std::string>();
  Require(c.synth_task == "seq" || c.synth_task == "gesture", "synth.task must be seq or gesture");
  const json& seq = synth.at("seq");
  c.seq.electrodes = seq.at("electrodes").get<std::uint32_t>();
  c.seq.vocab = seq.at("vocab").get<std::size_t>();
  c.seq.sep = seq.at("sep").get<double>();
  c.seq.noise = seq.at("noise").get<double>();
  c.seq.min_len = seq.at("min_len").get<std::size_t>();
  c.seq.max_len = seq.at("max_len").get<std::size_t>();
  c.seq.train = seq.at("train").get<std::size_t>();
  c.seq.val = seq.at("val").get<std::size_t>();
  c.seq.test = seq.at("test").get<std::size_t>();
  Require(c.seq.vocab >= 1 && c.seq.vocab <= 100, "synth.seq.vocab must lie in [1, 100]");
  const json& gesture = synth.at("gesture");
  c.gesture.electrodes = gesture.at("electrodes").get<std::uint32_t>();
  c.gesture.classes = gesture.at("classes").get<std::size_t>();
  c.gesture.repetitions = gesture.at("repetitions").get<std::size_t>();
  c.gesture.subjects = gesture.at("subjects").get<std::size_t>();
  c.gesture.sep = gesture.at("sep").get<double>();
  c.gesture.noise = gesture.at("noise").get<double>();
  c.gesture.samples = gesture.at("samples").get<std::size_t>();
  Require(c.gesture.subjects >= 1, "synth.gesture.subjects must be >= 1");
  return c;
}

}  // namespace emgspeech::cli
