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

#include "emgspeech/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emgspeech {

// ---------------------------------------------------------------------------
// Binary container
//
// Every binary file starts with the same 64-byte little-endian header followed
// by a raw little-endian payload:
//
//   off  size  field
//     0     4  magic "EMGS"
//     4     2  version (1)
//     6     2  container type (1 recording, 2 features, 3 labels, 4 codebook)
//     8     2  subkind (FeatureKind for features, VocabKind for labels)
//    10     2  payload type (1 float32, 2 int32)
//    12     4  rows   (channels | frames | symbols | centers)
//    16     4  cols   (samples  | dim    | 1       | dim)
//    20     4  aux0   (electrodes, features only)
//    24     4  aux1   (bands, VEC_B features only)
//    28     4  reserved, zero
//    32     8  rate0  (fs in Hz | hop in ms)
//    40     8  rate1  (0 | window in ms)
//    48     8  seed   (codebooks; zero otherwise)
//    56     8  payload size in bytes
//
// Model checkpoints use the same magic and version with their own header
// layout (see tds.hpp).
// ---------------------------------------------------------------------------

inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::uint16_t kContainerVersion = 1;

enum class ContainerType : std::uint16_t {
  kRecording = 1,
  kFeatures = 2,
  kLabels = 3,
  kCodebook = 4,
  kCheckpoint = 5,
};

enum class PayloadType : std::uint16_t {
  kFloat32 = 1,
  kInt32 = 2,
};

struct ContainerHeader {
  ContainerType type = ContainerType::kFeatures;
  std::uint16_t subkind = 0;
  PayloadType payload = PayloadType::kFloat32;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t aux0 = 0;
  std::uint32_t aux1 = 0;
  double rate0 = 0.0;
  double rate1 = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t payload_bytes = 0;
};

std::vector<std::uint8_t> EncodeHeader(const ContainerHeader& header);
/// Throws kMalformedHeader on bad magic, version, type or payload fields.
ContainerHeader DecodeHeader(const std::vector<std::uint8_t>& bytes);

/// Writes header + float32 payload (rows*cols values, row-major).
void WriteFloatContainer(const std::filesystem::path& path, ContainerHeader header,
                         const float* data);
/// Reads and validates a float container of the expected type.
ContainerHeader ReadFloatContainer(const std::filesystem::path& path,
                                   ContainerType expected, std::vector<float>& out);

// ---------------------------------------------------------------------------
// Vocabularies and label sequences
// ---------------------------------------------------------------------------

/// Symbol table for targets. Ids are 0-based; the CTC blank is not part of the
/// vocabulary (the model reserves class 0 for it and shifts ids by one).
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(VocabKind kind, std::vector<std::string> symbols);

  static Vocabulary Units100();
  /// 40 English phonemes (ARPAbet, lower case) followed by "space".
  static Vocabulary DefaultPhonemes();

  VocabKind kind() const { return kind_; }
  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(std::int32_t id) const;
  std::int32_t id(const std::string& symbol) const;
  const std::vector<std::string>& symbols() const { return symbols_; }

  /// FNV-1a over kind and symbol strings; stored in checkpoints.
  std::uint64_t Hash() const;

 private:
  VocabKind kind_ = VocabKind::kUnits100;
  std::vector<std::string> symbols_;
  std::map<std::string, std::int32_t> index_;
};

struct LabelSequence {
  std::vector<std::int32_t> symbols;
  VocabKind vocab = VocabKind::kUnits100;

  /// Every id must be in [0, vocab.size()).
  void Validate(const Vocabulary& vocabulary) const;
  bool operator==(const LabelSequence&) const = default;
};

void SaveLabelSequence(const LabelSequence& labels, const std::filesystem::path& path);
LabelSequence LoadLabelSequence(const std::filesystem::path& path);

/// Space-separated ids with a trailing newline, e.g. "71 12 4\n". Requires the
/// 100-unit vocabulary.
std::string FormatUnitTranscript(const LabelSequence& units);
void EmitUnitTranscript(const LabelSequence& units, const std::filesystem::path& path);
LabelSequence ParseUnitTranscript(const std::string& text);

// ---------------------------------------------------------------------------
// Recordings
// ---------------------------------------------------------------------------

struct Segment {
  std::int64_t start = 0;  // first sample
  std::int64_t end = 0;    // one past the last sample
  bool operator==(const Segment&) const = default;
};

struct Recording {
  MatrixXfR samples;  // channels x time, volts
  double fs = 5000.0;
  std::vector<std::string> channel_ids;
  /// Label of the reference electrode; empty once the reference has been
  /// subtracted and dropped.
  std::string reference_channel;
  std::vector<Segment> segments;
  std::string transcript;
  std::optional<LabelSequence> phonemes;
  std::optional<LabelSequence> units;

  std::size_t channels() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(samples.cols()); }

  /// Row index of a channel label, or nullopt.
  std::optional<std::size_t> ChannelIndex(const std::string& id) const;
  void Validate() const;
};

/// Binary container plus a JSON sidecar "<path>.json" holding channel ids,
/// reference, segments, transcript and optional labels. A missing sidecar
/// yields channel ids "1".."V", the last channel as reference and a single
/// segment spanning the recording.
void SaveRecording(const Recording& recording, const std::filesystem::path& path);
Recording LoadRecording(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Feature sequences
// ---------------------------------------------------------------------------

struct FeatureSequence {
  MatrixXfR frames;  // T x d
  double hop_ms = 20.0;
  double window_ms = 25.0;
  FeatureKind kind = FeatureKind::kDiagE;
  std::uint32_t electrodes = 0;  // V for EMG kinds
  std::uint32_t bands = 0;       // B for VEC_B

  std::size_t length() const { return static_cast<std::size_t>(frames.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(frames.cols()); }

  /// Checks T >= 1 and that d matches kind (DIAG_E: V, VEC_E: V^2, VEC_B: V*B,
  /// MEL_A: 80, SS_H: 768 or 1024).
  void Validate() const;
};

/// Expected dimension of a feature kind, or 0 when not determined by V and B.
std::size_t ExpectedFeatureDim(FeatureKind kind, std::size_t electrodes, std::size_t bands);

void SaveFeatureSequence(const FeatureSequence& features, const std::filesystem::path& path);
/// When `expected_electrodes` is set, EMG feature kinds must agree with it.
FeatureSequence LoadFeatureSequence(const std::filesystem::path& path,
                                    std::optional<std::uint32_t> expected_electrodes = {});

/// Truncates both sequences to the shorter length (frame-index pairing).
void TruncateToCommonLength(MatrixXfR& a, MatrixXfR& b);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

enum class Split { kTrain, kVal, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct Utterance {
  std::string id;
  Split split = Split::kTrain;
  std::string subject;
  std::string recording;                       // relative path, may be empty
  std::map<std::string, std::string> features;  // "diag-e", "ss-h@6", ...
  std::map<std::string, std::string> labels;    // "units", "phonemes"
  std::optional<std::int32_t> gesture;
};

/// JSON manifest. Paths inside are relative to the manifest's directory.
///
///   {
///     "format": "emgspeech-manifest", "version": 1,
///     "electrodes": 31,
///     "vocab": {"kind": "phonemes", "symbols": ["aa", ...]},
///     "utterances": [
///       {"id": "u0001", "split": "train", "subject": "s01",
///        "recording": "raw/u0001.emg",
///        "features": {"diag-e": "feat/u0001.diag-e.feat"},
///        "labels": {"units": "lab/u0001.units.lab"},
///        "gesture": 3}
///     ]
///   }
struct Manifest {
  std::filesystem::path root;
  std::uint32_t electrodes = 31;
  Vocabulary vocab = Vocabulary::Units100();
  std::vector<Utterance> utterances;

  std::filesystem::path Resolve(const std::string& relative) const { return root / relative; }
  std::vector<const Utterance*> InSplit(Split split) const;

  /// Throws kSplitOverlap if a test utterance id or file is shared with
  /// train/val, or if ids are duplicated.
  void CheckSplits() const;

  static Manifest Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;
};

}  // namespace emgspeech
