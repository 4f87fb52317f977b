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

// Counter-based random streams. A stream is identified by (seed, path...), so
// any worker can reconstruct the draws of run r / particle i without shared
// state, and results do not depend on scheduling.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fwlab {

/// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter ctr, Key key);
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform random bit generator over a single Philox stream.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; platform independent.
  double normal();

 private:
  Philox4x32::Key key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fwlab
