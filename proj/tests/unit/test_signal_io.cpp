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
#include "emgspeech/signal_io.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <functional>

using namespace emgspeech;
using emgspeech::test::TempDir;

namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an emgspeech::Error");
  return ErrorCode::kInvalidArgument;
}

Recording SmallRecording() {
  Recording rec;
  rec.samples.resize(3, 40);
  for (Eigen::Index i = 0; i < rec.samples.size(); ++i) rec.samples.data()[i] = 0.01f * static_cast<float>(i);
  rec.fs = 5000.0;
  rec.channel_ids = {"1", "2", "ref"};
  rec.reference_channel = "ref";
  rec.segments = {{0, 20}, {25, 40}};
  rec.transcript = "hello";
  rec.units = LabelSequence{{71, 12, 4}, VocabKind::kUnits100};
  return rec;
}

}  // namespace

TEST_CASE("header encodes to 64 bytes and decodes back") {
  ContainerHeader h;
  h.type = ContainerType::kFeatures;
  h.subkind = static_cast<std::uint16_t>(FeatureKind::kVecB);
  h.rows = 7;
  h.cols = 10;
  h.aux0 = 2;
  h.aux1 = 5;
  h.rate0 = 20.0;
  h.rate1 = 25.0;
  h.payload_bytes = 7 * 10 * 4;
  const auto bytes = EncodeHeader(h);
  REQUIRE(bytes.size() == kHeaderBytes);
  CHECK(bytes[0] == 'E');
  CHECK(bytes[3] == 'S');
  const ContainerHeader back = DecodeHeader(bytes);
  CHECK(back.type == h.type);
  CHECK(back.subkind == h.subkind);
  CHECK(back.rows == 7);
  CHECK(back.cols == 10);
  CHECK(back.aux1 == 5);
  CHECK(back.rate1 == 25.0);
  CHECK(back.payload_bytes == h.payload_bytes);
}

TEST_CASE("bad magic and short headers are rejected") {
  ContainerHeader h;
  h.rows = 1;
  h.cols = 1;
  h.payload_bytes = 4;
  auto bytes = EncodeHeader(h);
  bytes[0] = 'X';
  CHECK(CodeOf([&] { DecodeHeader(bytes); }) == ErrorCode::kMalformedHeader);
  std::vector<std::uint8_t> shorter(10, 0);
  CHECK(CodeOf([&] { DecodeHeader(shorter); }) == ErrorCode::kMalformedHeader);
}

TEST_CASE("truncated payload reports a sample count mismatch") {
  TempDir dir("sio");
  Recording rec = SmallRecording();
  SaveRecording(rec, dir / "r.emg");
  const auto size = std::filesystem::file_size(dir / "r.emg");
  std::filesystem::resize_file(dir / "r.emg", size - 8);
  CHECK(CodeOf([&] { LoadRecording(dir / "r.emg"); }) == ErrorCode::kSizeMismatch);
}

TEST_CASE("recording round trip keeps samples and sidecar metadata") {
  TempDir dir("sio");
  const Recording rec = SmallRecording();
  SaveRecording(rec, dir / "r.emg");
  const Recording back = LoadRecording(dir / "r.emg");
  CHECK(back.samples == rec.samples);
  CHECK(back.fs == rec.fs);
  CHECK(back.channel_ids == rec.channel_ids);
  CHECK(back.reference_channel == "ref");
  CHECK(back.segments == rec.segments);
  CHECK(back.transcript == "hello");
  REQUIRE(back.units.has_value());
  CHECK(back.units->symbols == std::vector<std::int32_t>{71, 12, 4});
}

TEST_CASE("missing sidecar falls back to defaults") {
  TempDir dir("sio");
  SaveRecording(SmallRecording(), dir / "r.emg");
  std::filesystem::remove(dir / "r.emg.json");
  const Recording back = LoadRecording(dir / "r.emg");
  CHECK(back.channel_ids == std::vector<std::string>{"1", "2", "3"});
  CHECK(back.reference_channel == "3");
  REQUIRE(back.segments.size() == 1);
  CHECK(back.segments[0].start == 0);
  CHECK(back.segments[0].end == 40);
}

TEST_CASE("unit transcript formatting") {
  const LabelSequence units{{71, 12, 4}, VocabKind::kUnits100};
  CHECK(FormatUnitTranscript(units) == "71 12 4\n");
  CHECK(ParseUnitTranscript("71 12 4\n") == units);
  const LabelSequence phones{{1, 2}, VocabKind::kPhonemes};
  CHECK(CodeOf([&] { FormatUnitTranscript(phones); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("label sequences round trip and validate against the vocabulary") {
  TempDir dir("sio");
  const LabelSequence labels{{0, 5, 40}, VocabKind::kPhonemes};
  SaveLabelSequence(labels, dir / "l.lab");
  CHECK(LoadLabelSequence(dir / "l.lab") == labels);
  const Vocabulary phonemes = Vocabulary::DefaultPhonemes();
  CHECK(phonemes.size() == 41);
  CHECK(phonemes.symbol(40) == "space");
  CHECK(phonemes.id("aa") == 0);
  labels.Validate(phonemes);
  const LabelSequence bad{{41}, VocabKind::kPhonemes};
  CHECK(CodeOf([&] { bad.Validate(phonemes); }) == ErrorCode::kInvalidArgument);
  CHECK(Vocabulary::Units100().size() == 100);
  CHECK(Vocabulary::Units100().Hash() != phonemes.Hash());
}

TEST_CASE("feature sequences check their dimension") {
  TempDir dir("sio");
  FeatureSequence f;
  f.kind = FeatureKind::kVecB;
  f.electrodes = 3;
  f.bands = 5;
  f.frames = MatrixXfR::Random(4, 15);
  f.Validate();
  SaveFeatureSequence(f, dir / "f.feat");
  const FeatureSequence back = LoadFeatureSequence(dir / "f.feat", 3);
  CHECK(back.frames == f.frames);
  CHECK(back.kind == FeatureKind::kVecB);
  CHECK(back.bands == 5);
  CHECK(back.hop_ms == 20.0);
  CHECK(CodeOf([&] { LoadFeatureSequence(dir / "f.feat", 4); }) == ErrorCode::kDimensionMismatch);

  f.frames = MatrixXfR::Random(4, 14);
  CHECK(CodeOf([&] { f.Validate(); }) == ErrorCode::kDimensionMismatch);
  f.kind = FeatureKind::kSsH;
  f.frames = MatrixXfR::Zero(2, 768);
  f.Validate();
  f.frames = MatrixXfR::Zero(2, 700);
  CHECK_THROWS_AS(f.Validate(), Error);
  CHECK(ExpectedFeatureDim(FeatureKind::kVecE, 22, 0) == 484);
}

TEST_CASE("truncate to common length") {
  MatrixXfR a = MatrixXfR::Ones(5, 2);
  MatrixXfR b = MatrixXfR::Ones(3, 4);
  TruncateToCommonLength(a, b);
  CHECK(a.rows() == 3);
  CHECK(b.rows() == 3);
}

TEST_CASE("manifest round trip and split checks") {
  TempDir dir("sio");
  Manifest m;
  m.root = dir.path();
  m.electrodes = 22;
  m.vocab = Vocabulary::DefaultPhonemes();
  Utterance a;
  a.id = "a";
  a.split = Split::kTrain;
  a.subject = "s1";
  a.features["diag-e"] = "feat/a.feat";
  a.labels["phonemes"] = "lab/a.lab";
  a.gesture = 3;
  Utterance b = a;
  b.id = "b";
  b.split = Split::kTest;
  b.features["diag-e"] = "feat/b.feat";
  b.labels["phonemes"] = "lab/b.lab";
  b.gesture.reset();
  m.utterances = {a, b};
  m.CheckSplits();
  m.Save(dir / "manifest.json");

  const Manifest back = Manifest::Load(dir / "manifest.json");
  CHECK(back.electrodes == 22);
  CHECK(back.vocab.kind() == VocabKind::kPhonemes);
  REQUIRE(back.utterances.size() == 2);
  CHECK(back.utterances[0].gesture == 3);
  CHECK(!back.utterances[1].gesture.has_value());
  CHECK(back.InSplit(Split::kTest).size() == 1);
  CHECK(back.Resolve("feat/a.feat") == dir.path() / "feat/a.feat");

  m.utterances[1].features["diag-e"] = "feat/a.feat";
  CHECK(CodeOf([&] { m.CheckSplits(); }) == ErrorCode::kSplitOverlap);
  m.utterances[1] = a;
  CHECK(CodeOf([&] { m.CheckSplits(); }) == ErrorCode::kSplitOverlap);
}

TEST_CASE("manifest with an unknown format is rejected") {
  TempDir dir("sio");
  std::ofstream(dir / "m.json") << R"({"format": "other", "version": 1, "utterances": []})";
  CHECK_THROWS_AS(Manifest::Load(dir / "m.json"), Error);
}
