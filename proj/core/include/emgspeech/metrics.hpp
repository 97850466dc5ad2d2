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

#include "emgspeech/signal_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace emgspeech {

/// Unit-cost edit distance (insertions, deletions, substitutions).
std::size_t Levenshtein(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b);

/// Same, for labelled sequences; throws kInvalidArgument on vocab mismatch.
std::size_t Levenshtein(const LabelSequence& a, const LabelSequence& b);

struct UtteranceError {
  std::size_t edits = 0;
  std::size_t target_len = 0;
  double rate = 0.0;  // edits / target_len, or edits when the target is empty
};

struct ErrorReport {
  std::vector<UtteranceError> per_utterance;
  double aggregate = 0.0;       // sum(edits) / sum(target_len)
  double mean_of_rates = 0.0;   // over pairs with non-empty targets
  std::size_t empty_targets = 0;

  std::string ToJson(const std::string& label = "error_rate") const;
};

/// Pairs targets[i] with predictions[i]. Empty targets are reported but left
/// out of both aggregates.
ErrorReport ComputeErrorRate(const std::vector<std::vector<std::int32_t>>& targets,
                             const std::vector<std::vector<std::int32_t>>& predictions);
ErrorReport ComputeErrorRate(const std::vector<LabelSequence>& targets,
                             const std::vector<LabelSequence>& predictions);

/// Spread of aggregate rates over independent training runs (seeds).
struct RunSummary {
  std::vector<double> aggregates;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
};

RunSummary SummarizeRuns(const std::vector<ErrorReport>& runs);

}  // namespace emgspeech
