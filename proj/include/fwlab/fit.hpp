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

// Empirical constants for inequalities of the form lhs <= c * rhs: the
// constant is fitted as a supremum over a sample family and re-verified on
// held-out samples.

#include <functional>
#include <limits>
#include <vector>

#include "fwlab/common.hpp"

namespace fwlab {

using Objective = std::function<double(const Vec&)>;

struct AscentConfig {
  double initial_step = 0.25;
  double min_step = 1e-4;
  int max_evals = 400;
  int refine_top = 5;  // number of best fit samples to refine
};

/// Compass search maximizing f inside the box [lo, hi]. Returns the best point
/// and writes its value.
Vec compass_ascent(const Objective& f, Vec x0, const Vec& lo, const Vec& hi,
                   const AscentConfig& cfg, double* value);

struct SupremumFit {
  double constant = 0.0;  // largest value found
  double sample_max = 0.0;  // max over the raw fit samples
  Vec argmax;
  int evaluations = 0;
};

/// max over `samples`, then compass ascent from the best cfg.refine_top
/// samples (refine_top = 0 gives the plain sample maximum).
SupremumFit fit_supremum(const Objective& f, const std::vector<Vec>& samples, const Vec& lo,
                         const Vec& hi, const AscentConfig& cfg = {});

struct HoldoutResult {
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();  // max value on held-out set
  Vec witness;
};

/// Counts held-out samples with f > c + tol * max(1, |c|).
HoldoutResult verify_holdout(const Objective& f, double c, const std::vector<Vec>& samples,
                             double tol = 1e-12);

}  // namespace fwlab
