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

#include "commands.hpp"
#include "config.hpp"

#include "emgspeech/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <iostream>
#include <map>

namespace {

using emgspeech::Error;
using emgspeech::ErrorCode;
using nlohmann::json;

int ReportError(const std::string& subcommand, const std::string& code, const std::string& message, int status) {
  json j{{"error", {{"code", code}, {"message", message}, {"subcommand", subcommand}}}};
  std::cerr << j.dump() << "\n";
  return status;
}

struct Flags {
  std::string config;
  std::string manifest;
  std::string out;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> feature;
  std::optional<std::string> target;
  std::vector<std::string> inputs;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace emgspeech::cli;
  CLI::App app{"emgspeech: EMG feature extraction, probing and EMG-to-speech-unit models"};
  app.require_subcommand(1);

  Flags flags;
  const std::map<std::string, std::pair<std::string, std::function<void(const Context&)>>> commands = {
      {"preprocess", {"Subtract the reference electrode and band-pass every recording", RunPreprocess}},
      {"features", {"Frame recordings into vec-e, diag-e or vec-b features", RunFeatures}},
      {"cluster-eval", {"k-medoids over gesture covariances with cluster accuracy", RunClusterEval}},
      {"probe", {"Ridge probes from input features to an EMG feature target", RunProbe}},
      {"quantize", {"Fit a k-means codebook and write discrete unit labels", RunQuantize}},
      {"train", {"Train the CTC model on features and target labels", RunTrain}},
      {"decode", {"Greedy CTC decoding of every utterance", RunDecode}},
      {"eval", {"Unit or phoneme error rate on the test split", RunEval}},
      {"synth", {"Write a synthetic sequence or gesture dataset", RunSynth}},
      {"report", {"Collect run outputs into CSV/JSON summaries", RunReport}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", flags.config, "JSON config overlaying the defaults");
    sub->add_option("--manifest", flags.manifest, "Input manifest");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Overrides the config seed");
    sub->add_option("--workers", flags.workers, "Worker threads (default: EMGSPEECH_WORKERS or all cores)");
    sub->add_option("--feature", flags.feature, "vec-e | diag-e | vec-b");
    sub->add_option("--target", flags.target, name == "probe" ? "Probe target feature (diag-e | vec-b | vec-e)"
                                                               : "units | phonemes");
    if (name == "decode" || name == "eval") sub->add_option("--checkpoint", flags.checkpoint, "Model checkpoint");
    if (name == "report") sub->add_option("runs", flags.inputs, "Run output directories");
  }

  std::string active = "emgspeech";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (!app.get_subcommands().empty()) active = app.get_subcommands().front()->get_name();
    return ReportError(active, "usage", e.what(), 2);
  }
  CLI::App* sub = app.get_subcommands().front();
  active = sub->get_name();

  try {
    json user = flags.config.empty() ? json::object() : LoadConfigFile(flags.config);
    json effective = MergeConfig(user);
    if (flags.seed) effective["seed"] = *flags.seed;
    if (flags.workers) effective["workers"] = *flags.workers;
    if (flags.feature) effective["feature"] = *flags.feature;
    if (flags.target && active != "probe") effective["target"] = *flags.target;
    if (flags.target && active == "probe") effective["probe"]["target"] = *flags.target;

    Context ctx;
    ctx.subcommand = active;
    ctx.config = ParseConfig(effective);
    ctx.effective = std::move(effective);
    ctx.manifest = flags.manifest;
    ctx.out = flags.out;
    ctx.checkpoint = flags.checkpoint;
    ctx.inputs = flags.inputs;
    if (active == "probe") ctx.target_flag = flags.target;
    commands.at(active).second(ctx);
  } catch (const Error& e) {
    return ReportError(active, std::string(emgspeech::ErrorCodeName(e.code())), e.what(),
                       e.code() == ErrorCode::kConfig ? 2 : 1);
  } catch (const json::exception& e) {
    return ReportError(active, "config", e.what(), 2);
  } catch (const std::exception& e) {
    return ReportError(active, "internal", e.what(), 1);
  }
  return 0;
}
