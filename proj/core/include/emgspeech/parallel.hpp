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

#include <cstddef>
#include <functional>

namespace emgspeech {

/// Worker count used when callers pass 0: $EMGSPEECH_WORKERS if set, else
/// std::thread::hardware_concurrency().
std::size_t DefaultWorkers();

/// Runs fn(i) for i in [0, n) across up to `workers` threads. Each index is
/// visited exactly once; callers that reduce results must do so in index order
/// afterwards. The first exception thrown by any task is rethrown here.
void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace emgspeech
