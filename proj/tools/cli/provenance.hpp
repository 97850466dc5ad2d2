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

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace emgspeech::cli {

std::string Sha256Hex(const std::string& bytes);
std::string Sha256File(const std::filesystem::path& path);

/// Record of what an artifact-producing subcommand consumed: the effective
/// config hash, the seed and a hash per input file.
class Provenance {
 public:
  Provenance(std::string subcommand, const nlohmann::json& effective_config, std::uint64_t seed);

  /// `label` is the path as it appears in the input (relative to the input
  /// manifest), so records stay comparable across output directories.
  void AddInput(const std::string& label, const std::filesystem::path& path);

  /// Writes config.json and provenance.json into `out_dir`.
  void Write(const std::filesystem::path& out_dir) const;

 private:
  std::string subcommand_;
  nlohmann::json config_;
  std::uint64_t seed_;
  std::map<std::string, std::string> inputs_;
};

}  // namespace emgspeech::cli
