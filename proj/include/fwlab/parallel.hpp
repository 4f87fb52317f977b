// Copyright 2026 The fwlab Authors
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
#include <cstdint>
#include <functional>
#include <string_view>

namespace fwlab {

/// Upper bound on worker threads used by parallel_for (CLI --threads).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks; fn must
/// write only to slot i of its outputs, so results do not depend on the
/// worker count. Exceptions from workers are rethrown (first by index).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// 64-bit FNV-1a, used for config and input hashes in emitted files.
std::uint64_t fnv1a64(std::string_view bytes);

/// Mean and standard error of the mean over run-level samples.
struct RunStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};
RunStats run_stats(const double* values, std::size_t n);

}  // namespace fwlab
