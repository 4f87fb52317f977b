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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised for malformed or out-of-contract input (dimension mismatch,
/// invalid configuration, unknown registry key, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure detects a state it cannot continue from
/// (divergence guard, exhausted size limits).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome of an executable inequality/identity check. A failed check is a
/// result, not an exception: callers decide how to surface it.
struct CheckReport {
  std::string name;
  bool passed = true;
  double worst = 0.0;      // largest violation (or residual) observed
  double tolerance = 0.0;  // tolerance the check was run at
  std::string detail;

  void fail(std::string why) {
    passed = false;
    if (!detail.empty()) detail += "; ";
    detail += std::move(why);
  }
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

}  // namespace fwlab
