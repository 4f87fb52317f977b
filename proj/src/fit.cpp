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

#include "fwlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fwlab {

Vec compass_ascent(const Objective& f, Vec x0, const Vec& lo, const Vec& hi,
                   const AscentConfig& cfg, double* value) {
  const int n = static_cast<int>(x0.size());
  require(lo.size() == n && hi.size() == n, "compass_ascent: bound size mismatch");
  Vec x = x0.cwiseMax(lo).cwiseMin(hi);
  double fx = f(x);
  int evals = 1;
  double step = cfg.initial_step;
  while (step >= cfg.min_step && evals < cfg.max_evals) {
    bool improved = false;
    for (int a = 0; a < n && evals < cfg.max_evals; ++a) {
      for (double sgn : {1.0, -1.0}) {
        Vec y = x;
        y[a] = std::clamp(y[a] + sgn * step * (hi[a] - lo[a]), lo[a], hi[a]);
        if (y[a] == x[a]) continue;
        const double fy = f(y);
        ++evals;
        if (fy > fx) {
          x = y;
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (value) *value = fx;
  return x;
}

SupremumFit fit_supremum(const Objective& f, const std::vector<Vec>& samples, const Vec& lo,
                         const Vec& hi, const AscentConfig& cfg) {
  require(!samples.empty(), "fit_supremum: empty sample family");
  SupremumFit out;
  std::vector<double> vals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) vals[i] = f(samples[i]);
  out.evaluations = static_cast<int>(samples.size());
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
  out.sample_max = vals[order[0]];
  out.constant = out.sample_max;
  out.argmax = samples[order[0]];
  const int top = std::min<int>(cfg.refine_top, static_cast<int>(samples.size()));
  for (int r = 0; r < top; ++r) {
    double v = 0.0;
    Vec x = compass_ascent(f, samples[order[r]], lo, hi, cfg, &v);
    out.evaluations += cfg.max_evals;
    if (v > out.constant) {
      out.constant = v;
      out.argmax = x;
    }
  }
  return out;
}

HoldoutResult verify_holdout(const Objective& f, double c, const std::vector<Vec>& samples,
                             double tol) {
  HoldoutResult out;
  const double slack = tol * std::max(1.0, std::abs(c));
  for (const Vec& x : samples) {
    const double v = f(x);
    if (v > out.worst) {
      out.worst = v;
      out.witness = x;
    }
    if (v > c + slack) ++out.violations;
  }
  return out;
}

}  // namespace fwlab
