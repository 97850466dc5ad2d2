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

#include "binary_io.hpp"
#include "emgspeech/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

namespace emgspeech {

namespace {

using json = nlohmann::json;
using detail::ByteReader;
using detail::ByteWriter;

constexpr char kMagic[4] = {'E', 'M', 'G', 'S'};

std::string Describe(const std::filesystem::path& path) { return path.string(); }

}  // namespace

// ---------------------------------------------------------------------------
// Container
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> EncodeHeader(const ContainerHeader& header) {
  ByteWriter w;
  w.PutBytes(kMagic, 4);
  w.Put<std::uint16_t>(kContainerVersion);
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(header.type));
  w.Put<std::uint16_t>(header.subkind);
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(header.payload));
  w.Put<std::uint32_t>(header.rows);
  w.Put<std::uint32_t>(header.cols);
  w.Put<std::uint32_t>(header.aux0);
  w.Put<std::uint32_t>(header.aux1);
  w.Put<std::uint32_t>(0);
  w.Put<double>(header.rate0);
  w.Put<double>(header.rate1);
  w.Put<std::uint64_t>(header.seed);
  w.Put<std::uint64_t>(header.payload_bytes);
  return std::move(w.bytes());
}

ContainerHeader DecodeHeader(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kMalformedHeader, "file shorter than the 64-byte header");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kMalformedHeader, "bad magic");
  }
  ByteReader r(bytes);
  r.Skip(4);
  const auto version = r.Get<std::uint16_t>();
  if (version != kContainerVersion) {
    throw Error(ErrorCode::kMalformedHeader, "unsupported version " + std::to_string(version));
  }
  ContainerHeader h;
  const auto type = r.Get<std::uint16_t>();
  if (type < 1 || type > 5) throw Error(ErrorCode::kMalformedHeader, "unknown container type");
  h.type = static_cast<ContainerType>(type);
  h.subkind = r.Get<std::uint16_t>();
  const auto payload = r.Get<std::uint16_t>();
  if (payload != 1 && payload != 2) throw Error(ErrorCode::kMalformedHeader, "unknown payload type");
  h.payload = static_cast<PayloadType>(payload);
  h.rows = r.Get<std::uint32_t>();
  h.cols = r.Get<std::uint32_t>();
  h.aux0 = r.Get<std::uint32_t>();
  h.aux1 = r.Get<std::uint32_t>();
  r.Skip(4);
  h.rate0 = r.Get<double>();
  h.rate1 = r.Get<double>();
  h.seed = r.Get<std::uint64_t>();
  h.payload_bytes = r.Get<std::uint64_t>();
  return h;
}

namespace {

void CheckPayloadSize(const ContainerHeader& h, std::size_t file_bytes,
                      const std::filesystem::path& path) {
  const std::uint64_t expected = static_cast<std::uint64_t>(h.rows) * h.cols * 4;
  if (h.payload_bytes != expected) {
    throw Error(ErrorCode::kMalformedHeader,
                Describe(path) + ": payload size field disagrees with dimensions");
  }
  if (file_bytes - kHeaderBytes != expected) {
    throw Error(ErrorCode::kSizeMismatch,
                Describe(path) + ": sample count mismatch (header declares " +
                    std::to_string(expected / 4) + " values, file holds " +
                    std::to_string((file_bytes - kHeaderBytes) / 4) + ")");
  }
}

}  // namespace

void WriteFloatContainer(const std::filesystem::path& path, ContainerHeader header,
                         const float* data) {
  header.payload = PayloadType::kFloat32;
  const std::size_t count = static_cast<std::size_t>(header.rows) * header.cols;
  header.payload_bytes = count * sizeof(float);
  ByteWriter w;
  w.bytes() = EncodeHeader(header);
  detail::AppendPayload(w, data, count);
  detail::WriteFileBytes(path, w.bytes());
}

ContainerHeader ReadFloatContainer(const std::filesystem::path& path, ContainerType expected,
                                   std::vector<float>& out) {
  const auto bytes = detail::ReadFileBytes(path);
  const ContainerHeader h = DecodeHeader(bytes);
  if (h.type != expected) {
    throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": unexpected container type");
  }
  if (h.payload != PayloadType::kFloat32) {
    throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": expected float32 payload");
  }
  CheckPayloadSize(h, bytes.size(), path);
  out.resize(static_cast<std::size_t>(h.rows) * h.cols);
  detail::ExtractPayload(bytes, kHeaderBytes, out.data(), out.size());
  return h;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(VocabKind kind, std::vector<std::string> symbols)
    : kind_(kind), symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], static_cast<std::int32_t>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::Units100() {
  std::vector<std::string> symbols;
  symbols.reserve(100);
  for (int i = 0; i < 100; ++i) symbols.push_back(std::to_string(i));
  return Vocabulary(VocabKind::kUnits100, std::move(symbols));
}

Vocabulary Vocabulary::DefaultPhonemes() {
  return Vocabulary(VocabKind::kPhonemes,
                    {"aa", "ae", "ah", "ao", "aw", "ax", "ay", "b",  "ch", "d",  "dh",
                     "eh", "er", "ey", "f",  "g",  "hh", "ih", "iy", "jh", "k",  "l",
                     "m",  "n",  "ng", "ow", "oy", "p",  "r",  "s",  "sh", "t",  "th",
                     "uh", "uw", "v",  "w",  "y",  "z",  "zh", "space"});
}

const std::string& Vocabulary::symbol(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "symbol id " + std::to_string(id) + " out of range");
  }
  return symbols_[static_cast<std::size_t>(id)];
}

std::int32_t Vocabulary::id(const std::string& symbol) const {
  const auto it = index_.find(symbol);
  if (it == index_.end()) throw Error(ErrorCode::kInvalidArgument, "unknown symbol '" + symbol + "'");
  return it->second;
}

std::uint64_t Vocabulary::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  mix(static_cast<std::uint8_t>(kind_));
  for (const auto& s : symbols_) {
    for (char c : s) mix(static_cast<std::uint8_t>(c));
    mix(0);
  }
  return h;
}

void LabelSequence::Validate(const Vocabulary& vocabulary) const {
  if (vocabulary.kind() != vocab) {
    throw Error(ErrorCode::kInvalidArgument, "label vocabulary does not match");
  }
  for (auto id : symbols) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocabulary.size()) {
      throw Error(ErrorCode::kInvalidArgument, "label id " + std::to_string(id) + " outside vocabulary");
    }
  }
}

void SaveLabelSequence(const LabelSequence& labels, const std::filesystem::path& path) {
  ContainerHeader h;
  h.type = ContainerType::kLabels;
  h.subkind = static_cast<std::uint16_t>(labels.vocab);
  h.payload = PayloadType::kInt32;
  h.rows = static_cast<std::uint32_t>(labels.symbols.size());
  h.cols = 1;
  h.payload_bytes = labels.symbols.size() * sizeof(std::int32_t);
  ByteWriter w;
  w.bytes() = EncodeHeader(h);
  detail::AppendPayload(w, labels.symbols.data(), labels.symbols.size());
  detail::WriteFileBytes(path, w.bytes());
}

LabelSequence LoadLabelSequence(const std::filesystem::path& path) {
  const auto bytes = detail::ReadFileBytes(path);
  const ContainerHeader h = DecodeHeader(bytes);
  if (h.type != ContainerType::kLabels || h.payload != PayloadType::kInt32 || h.cols != 1) {
    throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": not a label container");
  }
  if (h.subkind != 1 && h.subkind != 2) {
    throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": unknown vocabulary kind");
  }
  CheckPayloadSize(h, bytes.size(), path);
  LabelSequence labels;
  labels.vocab = static_cast<VocabKind>(h.subkind);
  labels.symbols.resize(h.rows);
  detail::ExtractPayload(bytes, kHeaderBytes, labels.symbols.data(), labels.symbols.size());
  return labels;
}

std::string FormatUnitTranscript(const LabelSequence& units) {
  if (units.vocab != VocabKind::kUnits100) {
    throw Error(ErrorCode::kInvalidArgument, "unit transcripts require the 100-unit vocabulary");
  }
  std::string line;
  for (std::size_t i = 0; i < units.symbols.size(); ++i) {
    if (i > 0) line += ' ';
    line += std::to_string(units.symbols[i]);
  }
  line += '\n';
  return line;
}

void EmitUnitTranscript(const LabelSequence& units, const std::filesystem::path& path) {
  detail::WriteTextFile(path, FormatUnitTranscript(units));
}

LabelSequence ParseUnitTranscript(const std::string& text) {
  LabelSequence labels;
  labels.vocab = VocabKind::kUnits100;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    int value = -1;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || value < 0 || value >= 100) {
      throw Error(ErrorCode::kInvalidArgument, "bad unit token '" + token + "'");
    }
    labels.symbols.push_back(value);
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Recording
// ---------------------------------------------------------------------------

std::optional<std::size_t> Recording::ChannelIndex(const std::string& id) const {
  const auto it = std::find(channel_ids.begin(), channel_ids.end(), id);
  if (it == channel_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channel_ids.begin());
}

void Recording::Validate() const {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw Error(ErrorCode::kInvalidArgument, "fs must be > 0");
  if (channel_ids.size() != channels()) {
    throw Error(ErrorCode::kSizeMismatch, "channel id count does not match sample rows");
  }
  const std::size_t min_channels = reference_channel.empty() ? 1 : 2;
  if (channels() < min_channels) {
    throw Error(ErrorCode::kInvalidArgument, "recording needs at least one data channel plus reference");
  }
  if (!reference_channel.empty() && !ChannelIndex(reference_channel)) {
    throw Error(ErrorCode::kInvalidArgument, "reference channel '" + reference_channel + "' not present");
  }
  for (const auto& s : segments) {
    if (s.start < 0 || s.start >= s.end || s.end > static_cast<std::int64_t>(length())) {
      throw Error(ErrorCode::kInvalidArgument, "segment [" + std::to_string(s.start) + ", " +
                                                   std::to_string(s.end) + ") outside recording");
    }
  }
}

namespace {

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar += ".json";
  return sidecar;
}

json LabelsToJson(const LabelSequence& labels) { return labels.symbols; }

LabelSequence LabelsFromJson(const json& j, VocabKind vocab) {
  LabelSequence labels;
  labels.vocab = vocab;
  labels.symbols = j.get<std::vector<std::int32_t>>();
  return labels;
}

}  // namespace

void SaveRecording(const Recording& recording, const std::filesystem::path& path) {
  recording.Validate();
  ContainerHeader h;
  h.type = ContainerType::kRecording;
  h.rows = static_cast<std::uint32_t>(recording.channels());
  h.cols = static_cast<std::uint32_t>(recording.length());
  h.rate0 = recording.fs;
  WriteFloatContainer(path, h, recording.samples.data());

  json meta;
  meta["channel_ids"] = recording.channel_ids;
  meta["reference_channel"] = recording.reference_channel;
  json segments = json::array();
  for (const auto& s : recording.segments) segments.push_back({s.start, s.end});
  meta["segments"] = segments;
  meta["transcript"] = recording.transcript;
  if (recording.phonemes) meta["phonemes"] = LabelsToJson(*recording.phonemes);
  if (recording.units) meta["units"] = LabelsToJson(*recording.units);
  detail::WriteTextFile(SidecarPath(path), meta.dump(2) + "\n");
}

Recording LoadRecording(const std::filesystem::path& path) {
  std::vector<float> payload;
  const ContainerHeader h = ReadFloatContainer(path, ContainerType::kRecording, payload);
  Recording rec;
  rec.fs = h.rate0;
  rec.samples = Eigen::Map<const MatrixXfR>(payload.data(), h.rows, h.cols);

  const auto sidecar = SidecarPath(path);
  if (std::filesystem::exists(sidecar)) {
    try {
      const json meta = json::parse(detail::ReadTextFile(sidecar));
      rec.channel_ids = meta.at("channel_ids").get<std::vector<std::string>>();
      rec.reference_channel = meta.value("reference_channel", std::string());
      for (const auto& s : meta.value("segments", json::array())) {
        rec.segments.push_back({s.at(0).get<std::int64_t>(), s.at(1).get<std::int64_t>()});
      }
      rec.transcript = meta.value("transcript", std::string());
      if (meta.contains("phonemes")) rec.phonemes = LabelsFromJson(meta["phonemes"], VocabKind::kPhonemes);
      if (meta.contains("units")) rec.units = LabelsFromJson(meta["units"], VocabKind::kUnits100);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedHeader, Describe(sidecar) + ": " + e.what());
    }
  } else {
    for (std::uint32_t c = 0; c < h.rows; ++c) rec.channel_ids.push_back(std::to_string(c + 1));
    if (h.rows >= 2) rec.reference_channel = rec.channel_ids.back();
    if (h.cols > 0) rec.segments.push_back({0, static_cast<std::int64_t>(h.cols)});
  }
  rec.Validate();
  return rec;
}

// ---------------------------------------------------------------------------
// Feature sequences
// ---------------------------------------------------------------------------

std::size_t ExpectedFeatureDim(FeatureKind kind, std::size_t electrodes, std::size_t bands) {
  switch (kind) {
    case FeatureKind::kDiagE: return electrodes;
    case FeatureKind::kVecE: return electrodes * electrodes;
    case FeatureKind::kVecB: return electrodes * bands;
    case FeatureKind::kMelA: return 80;
    case FeatureKind::kSsH: return 0;
  }
  return 0;
}

void FeatureSequence::Validate() const {
  if (frames.rows() < 1) throw Error(ErrorCode::kInvalidArgument, "T must be >= 1");
  if (!(hop_ms > 0.0) || !(window_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "hop and window must be positive");
  }
  const std::size_t d = dim();
  if (kind == FeatureKind::kSsH) {
    if (d != 768 && d != 1024) {
      throw Error(ErrorCode::kDimensionMismatch, "ss-h features must have d = 768 or 1024, got " +
                                                     std::to_string(d));
    }
    return;
  }
  if (kind == FeatureKind::kVecB && bands == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "vec-b features need a band count");
  }
  if ((kind == FeatureKind::kDiagE || kind == FeatureKind::kVecE || kind == FeatureKind::kVecB) &&
      electrodes == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "EMG features need an electrode count");
  }
  const std::size_t expected = ExpectedFeatureDim(kind, electrodes, bands);
  if (d != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(FeatureKindName(kind)) + " expects d = " + std::to_string(expected) +
                    ", got " + std::to_string(d));
  }
}

void SaveFeatureSequence(const FeatureSequence& features, const std::filesystem::path& path) {
  features.Validate();
  ContainerHeader h;
  h.type = ContainerType::kFeatures;
  h.subkind = static_cast<std::uint16_t>(features.kind);
  h.rows = static_cast<std::uint32_t>(features.length());
  h.cols = static_cast<std::uint32_t>(features.dim());
  h.aux0 = features.electrodes;
  h.aux1 = features.bands;
  h.rate0 = features.hop_ms;
  h.rate1 = features.window_ms;
  WriteFloatContainer(path, h, features.frames.data());
}

FeatureSequence LoadFeatureSequence(const std::filesystem::path& path,
                                    std::optional<std::uint32_t> expected_electrodes) {
  std::vector<float> payload;
  const ContainerHeader h = ReadFloatContainer(path, ContainerType::kFeatures, payload);
  if (h.subkind < 1 || h.subkind > 5) {
    throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": unknown feature kind");
  }
  FeatureSequence f;
  f.kind = static_cast<FeatureKind>(h.subkind);
  f.electrodes = h.aux0;
  f.bands = h.aux1;
  f.hop_ms = h.rate0;
  f.window_ms = h.rate1;
  f.frames = Eigen::Map<const MatrixXfR>(payload.data(), h.rows, h.cols);
  try {
    f.Validate();
  } catch (const Error& e) {
    throw Error(e.code(), Describe(path) + ": " + e.what());
  }
  const bool emg = f.kind == FeatureKind::kDiagE || f.kind == FeatureKind::kVecE ||
                   f.kind == FeatureKind::kVecB;
  if (emg && expected_electrodes && *expected_electrodes != f.electrodes) {
    throw Error(ErrorCode::kDimensionMismatch,
                Describe(path) + ": file has " + std::to_string(f.electrodes) +
                    " electrodes but the manifest declares " + std::to_string(*expected_electrodes));
  }
  return f;
}

void TruncateToCommonLength(MatrixXfR& a, MatrixXfR& b) {
  const Eigen::Index n = std::min(a.rows(), b.rows());
  a.conservativeResize(n, Eigen::NoChange);
  b.conservativeResize(n, Eigen::NoChange);
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "unknown split '" + std::string(name) + "'");
}

std::vector<const Utterance*> Manifest::InSplit(Split split) const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances) {
    if (u.split == split) out.push_back(&u);
  }
  return out;
}

void Manifest::CheckSplits() const {
  std::set<std::string> ids;
  std::set<std::string> fit_files;
  for (const auto& u : utterances) {
    if (!ids.insert(u.id).second) {
      throw Error(ErrorCode::kSplitOverlap, "duplicate utterance id '" + u.id + "'");
    }
    if (u.split == Split::kTest) continue;
    if (!u.recording.empty()) fit_files.insert(u.recording);
    for (const auto& [kind, file] : u.features) fit_files.insert(file);
  }
  for (const auto& u : utterances) {
    if (u.split != Split::kTest) continue;
    auto check = [&](const std::string& file) {
      if (fit_files.count(file)) {
        throw Error(ErrorCode::kSplitOverlap,
                    "test utterance '" + u.id + "' shares " + file + " with train/val");
      }
    };
    if (!u.recording.empty()) check(u.recording);
    for (const auto& [kind, file] : u.features) check(file);
  }
}

Manifest Manifest::Load(const std::filesystem::path& path) {
  Manifest m;
  m.root = path.parent_path();
  try {
    const json j = json::parse(detail::ReadTextFile(path));
    if (j.value("format", std::string()) != "emgspeech-manifest") {
      throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": not an emgspeech manifest");
    }
    m.electrodes = j.at("electrodes").get<std::uint32_t>();
    const json& vocab = j.at("vocab");
    const VocabKind kind = ParseVocabKind(vocab.at("kind").get<std::string>());
    if (vocab.contains("symbols")) {
      m.vocab = Vocabulary(kind, vocab.at("symbols").get<std::vector<std::string>>());
    } else {
      m.vocab = kind == VocabKind::kUnits100 ? Vocabulary::Units100() : Vocabulary::DefaultPhonemes();
    }
    for (const json& e : j.at("utterances")) {
      Utterance u;
      u.id = e.at("id").get<std::string>();
      u.split = ParseSplit(e.at("split").get<std::string>());
      u.subject = e.value("subject", std::string());
      u.recording = e.value("recording", std::string());
      if (e.contains("features")) u.features = e["features"].get<std::map<std::string, std::string>>();
      if (e.contains("labels")) u.labels = e["labels"].get<std::map<std::string, std::string>>();
      if (e.contains("gesture")) u.gesture = e["gesture"].get<std::int32_t>();
      m.utterances.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, Describe(path) + ": " + e.what());
  }
  m.CheckSplits();
  return m;
}

void Manifest::Save(const std::filesystem::path& path) const {
  CheckSplits();
  json j;
  j["format"] = "emgspeech-manifest";
  j["version"] = 1;
  j["electrodes"] = electrodes;
  j["vocab"] = {{"kind", std::string(VocabKindName(vocab.kind()))}, {"symbols", vocab.symbols()}};
  json list = json::array();
  for (const auto& u : utterances) {
    json e;
    e["id"] = u.id;
    e["split"] = std::string(SplitName(u.split));
    if (!u.subject.empty()) e["subject"] = u.subject;
    if (!u.recording.empty()) e["recording"] = u.recording;
    if (!u.features.empty()) e["features"] = u.features;
    if (!u.labels.empty()) e["labels"] = u.labels;
    if (u.gesture) e["gesture"] = *u.gesture;
    list.push_back(std::move(e));
  }
  j["utterances"] = std::move(list);
  detail::WriteTextFile(path, j.dump(2) + "\n");
}

}  // namespace emgspeech
