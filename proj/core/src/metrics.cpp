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

#include "emgspeech/metrics.hpp"

#include "emgspeech/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emgspeech {

std::size_t Levenshtein(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t Levenshtein(const LabelSequence& a, const LabelSequence& b) {
  if (a.vocab != b.vocab) throw Error(ErrorCode::kInvalidArgument, "sequences use different vocabularies");
  return Levenshtein(a.symbols, b.symbols);
}

ErrorReport ComputeErrorRate(const std::vector<std::vector<std::int32_t>>& targets,
                             const std::vector<std::vector<std::int32_t>>& predictions) {
  if (targets.size() != predictions.size()) {
    throw Error(ErrorCode::kSizeMismatch, std::to_string(targets.size()) + " targets but " +
                                              std::to_string(predictions.size()) + " predictions");
  }
  ErrorReport report;
  std::size_t edits = 0;
  std::size_t length = 0;
  double rate_sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    UtteranceError e;
    e.edits = Levenshtein(targets[i], predictions[i]);
    e.target_len = targets[i].size();
    if (e.target_len == 0) {
      e.rate = static_cast<double>(e.edits);
      ++report.empty_targets;
    } else {
      e.rate = static_cast<double>(e.edits) / static_cast<double>(e.target_len);
      edits += e.edits;
      length += e.target_len;
      rate_sum += e.rate;
    }
    report.per_utterance.push_back(e);
  }
  const std::size_t counted = targets.size() - report.empty_targets;
  if (counted > 0) {
    report.aggregate = static_cast<double>(edits) / static_cast<double>(length);
    report.mean_of_rates = rate_sum / static_cast<double>(counted);
  }
  return report;
}

ErrorReport ComputeErrorRate(const std::vector<LabelSequence>& targets,
                             const std::vector<LabelSequence>& predictions) {
  if (targets.size() != predictions.size()) {
    throw Error(ErrorCode::kSizeMismatch, "target and prediction counts differ");
  }
  std::vector<std::vector<std::int32_t>> t;
  std::vector<std::vector<std::int32_t>> p;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].vocab != predictions[i].vocab) {
      throw Error(ErrorCode::kInvalidArgument, "sequences use different vocabularies");
    }
    t.push_back(targets[i].symbols);
    p.push_back(predictions[i].symbols);
  }
  return ComputeErrorRate(t, p);
}

std::string ErrorReport::ToJson(const std::string& label) const {
  nlohmann::json j;
  j[label] = aggregate;
  j["mean_of_rates"] = mean_of_rates;
  j["utterances"] = per_utterance.size();
  j["empty_targets"] = empty_targets;
  std::size_t edits = 0;
  std::size_t length = 0;
  for (const auto& u : per_utterance) {
    if (u.target_len == 0) continue;
    edits += u.edits;
    length += u.target_len;
  }
  j["edits"] = edits;
  j["target_symbols"] = length;
  return j.dump(2);
}

RunSummary SummarizeRuns(const std::vector<ErrorReport>& runs) {
  if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "no runs to summarise");
  RunSummary summary;
  for (const auto& r : runs) summary.aggregates.push_back(r.aggregate);
  const double n = static_cast<double>(runs.size());
  summary.mean = std::accumulate(summary.aggregates.begin(), summary.aggregates.end(), 0.0) / n;
  if (runs.size() > 1) {
    double ss = 0.0;
    for (double a : summary.aggregates) ss += (a - summary.mean) * (a - summary.mean);
    summary.stddev = std::sqrt(ss / (n - 1.0));
  }
  return summary;
}

}  // namespace emgspeech
