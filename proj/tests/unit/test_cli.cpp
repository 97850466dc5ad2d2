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

#include "emgspeech/signal_io.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace emgspeech;
using emgspeech::test::TempDir;
using nlohmann::json;

namespace {

struct Outcome {
  int status = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr merged.
Outcome RunCli(const std::string& args) {
  const std::string command = std::string(EMGSPEECH_CLI_PATH) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) out.output.append(buffer.data(), n);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ErrorJson(const std::string& output) {
  const auto start = output.find('{');
  REQUIRE(start != std::string::npos);
  return json::parse(output.substr(start));
}

void WriteJson(const std::filesystem::path& path, const json& j) { std::ofstream(path) << j.dump(2); }

json SmallModelConfig() {
  return json{{"workers", 1},
              {"model", {{"hidden", 32}, {"blocks", 1}, {"kernel", 5}}},
              {"train", {{"lr", 0.003}, {"batch_size", 4}, {"max_epochs", 60}}}};
}

}  // namespace

TEST_CASE("synth, train and eval learn the planted sequence task") {
  TempDir dir("cli");
  WriteJson(dir / "config.json", SmallModelConfig());
  const std::string cfg = " --config " + (dir / "config.json").string();
  REQUIRE(RunCli("synth --out " + (dir / "data").string() + cfg + " --seed 3").status == 0);
  REQUIRE(RunCli("train --manifest " + (dir / "data/manifest.json").string() + " --out " + (dir / "run").string() + cfg)
              .status == 0);
  CHECK(std::filesystem::exists(dir / "run/model.ckpt"));
  CHECK(std::filesystem::exists(dir / "run/provenance.json"));
  const Outcome eval = RunCli("eval --manifest " + (dir / "data/manifest.json").string() + " --checkpoint " +
                              (dir / "run/model.ckpt").string() + " --out " + (dir / "eval").string() + cfg);
  REQUIRE(eval.status == 0);
  CHECK(eval.output.find("UER") != std::string::npos);
  const json report = json::parse(ReadFile(dir / "eval/eval_report.json"));
  CHECK(report["uer"].get<double>() < 0.1);
}

TEST_CASE("preprocessing the same input twice is bit-identical") {
  TempDir dir("cli");
  WriteJson(dir / "config.json", json{{"workers", 1},
                                     {"synth", {{"task", "gesture"},
                                                {"gesture", {{"electrodes", 4}, {"classes", 2}, {"repetitions", 2},
                                                             {"samples", 2000}}}}}});
  const std::string cfg = " --config " + (dir / "config.json").string();
  REQUIRE(RunCli("synth --out " + (dir / "raw").string() + cfg).status == 0);
  const std::string manifest = " --manifest " + (dir / "raw/manifest.json").string();
  REQUIRE(RunCli("preprocess" + manifest + " --out " + (dir / "a").string() + cfg).status == 0);
  REQUIRE(RunCli("preprocess" + manifest + " --out " + (dir / "b").string() + cfg).status == 0);
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir / "a");
    CHECK(ReadFile(entry.path()) == ReadFile(dir / "b" / rel));
    ++compared;
  }
  CHECK(compared > 4);
}

TEST_CASE("probe reports mismatched utterance lengths as a structured error") {
  TempDir dir("cli");
  Manifest m;
  m.root = dir.path();
  m.electrodes = 4;
  m.vocab = Vocabulary::Units100();
  for (const auto& [id, split] : {std::pair{"a", Split::kTrain}, std::pair{"b", Split::kTest}}) {
    FeatureSequence ssh;
    ssh.kind = FeatureKind::kSsH;
    ssh.frames = MatrixXfR::Random(10, 768);
    FeatureSequence diag;
    diag.kind = FeatureKind::kDiagE;
    diag.electrodes = 4;
    diag.frames = MatrixXfR::Random(std::string(id) == "b" ? 12 : 10, 4);
    Utterance u;
    u.id = id;
    u.split = split;
    u.features["ss-h"] = std::string(id) + ".ss-h.feat";
    u.features["diag-e"] = std::string(id) + ".diag-e.feat";
    SaveFeatureSequence(ssh, dir / u.features["ss-h"]);
    SaveFeatureSequence(diag, dir / u.features["diag-e"]);
    m.utterances.push_back(u);
  }
  m.Save(dir / "manifest.json");
  const Outcome out = RunCli("probe --manifest " + (dir / "manifest.json").string() + " --out " +
                             (dir / "probe").string() + " --target diag-e --workers 1");
  CHECK(out.status == 1);
  const json err = ErrorJson(out.output);
  CHECK(err["error"]["code"] == "size_mismatch");
  CHECK(err["error"]["subcommand"] == "probe");
  CHECK(err["error"]["message"].get<std::string>().find("utterance b") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected before any work") {
  TempDir dir("cli");
  WriteJson(dir / "config.json", json{{"model", {{"hiden", 32}}}});
  const Outcome out = RunCli("synth --out " + (dir / "data").string() + " --config " + (dir / "config.json").string());
  CHECK(out.status == 2);
  const json err = ErrorJson(out.output);
  CHECK(err["error"]["code"] == "config");
  CHECK(err["error"]["message"].get<std::string>().find("model.hiden") != std::string::npos);
  CHECK(!std::filesystem::exists(dir / "data/manifest.json"));
}

TEST_CASE("missing subcommand is a usage error") {
  CHECK(RunCli("").status == 2);
  CHECK(RunCli("frobnicate").status == 2);
}
