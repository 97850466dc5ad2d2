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

#include "config.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emgspeech::cli {

struct Context {
  std::string subcommand;
  nlohmann::json effective;
  PipelineConfig config;
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::filesystem::path checkpoint;
  std::vector<std::string> inputs;
  std::optional<std::string> target_flag;  // raw --target value
};

void RunPreprocess(const Context& ctx);
void RunFeatures(const Context& ctx);
void RunClusterEval(const Context& ctx);
void RunProbe(const Context& ctx);
void RunQuantize(const Context& ctx);
void RunTrain(const Context& ctx);
void RunDecode(const Context& ctx);
void RunEval(const Context& ctx);
void RunSynth(const Context& ctx);
void RunReport(const Context& ctx);

}  // namespace emgspeech::cli
