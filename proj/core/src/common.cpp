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
#include "emgspeech/parallel.hpp"
#include "emgspeech/types.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace emgspeech {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kSizeMismatch: return "size_mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kNotPositiveDefinite: return "not_positive_definite";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSplitOverlap: return "split_overlap";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kDiverged: return "diverged";
  }
  return "unknown";
}

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kVecE: return "vec-e";
    case FeatureKind::kDiagE: return "diag-e";
    case FeatureKind::kVecB: return "vec-b";
    case FeatureKind::kMelA: return "mel-a";
    case FeatureKind::kSsH: return "ss-h";
  }
  return "unknown";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  for (auto kind : {FeatureKind::kVecE, FeatureKind::kDiagE, FeatureKind::kVecB,
                    FeatureKind::kMelA, FeatureKind::kSsH}) {
    if (FeatureKindName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature kind '" + std::string(name) + "'");
}

std::string_view VocabKindName(VocabKind kind) {
  return kind == VocabKind::kUnits100 ? "units_100" : "phonemes";
}

VocabKind ParseVocabKind(std::string_view name) {
  if (name == "units_100" || name == "units") return VocabKind::kUnits100;
  if (name == "phonemes") return VocabKind::kPhonemes;
  throw Error(ErrorCode::kInvalidArgument, "unknown vocabulary '" + std::string(name) + "'");
}

std::size_t DefaultWorkers() {
  if (const char* env = std::getenv("EMGSPEECH_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = DefaultWorkers();
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace emgspeech
