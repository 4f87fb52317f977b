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

#include "fwlab/kernels.hpp"

#include <cmath>

namespace fwlab::kernels::scalar {

namespace {

// Pairwise summation over blocks of 64; deterministic for a given length.
template <class Term>
double pairwise_sum(std::size_t lo, std::size_t hi, const Term& term) {
  if (hi - lo <= 64) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

}  // namespace

void sincos(std::span<const double> theta, std::span<double> s, std::span<double> c) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    s[i] = std::sin(theta[i]);
    c[i] = std::cos(theta[i]);
  }
}

void accumulate_phase(std::span<const double> theta, double w, std::span<double> re,
                      std::span<double> im) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    re[i] += w * std::cos(theta[i]);
    im[i] += w * std::sin(theta[i]);
  }
}

void rotate(std::span<const double> fr, std::span<const double> fi,
            std::span<const double> theta, std::span<double> a, std::span<double> b) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double cs = std::cos(theta[i]);
    const double sn = std::sin(theta[i]);
    a[i] = fr[i] * cs + fi[i] * sn;
    b[i] = fi[i] * cs - fr[i] * sn;
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  return pairwise_sum(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double weighted_norm_sq(std::span<const double> w, std::span<const double> re,
                        std::span<const double> im) {
  return pairwise_sum(0, w.size(), [&](std::size_t i) {
    return w[i] * (re[i] * re[i] + im[i] * im[i]);
  });
}

void scale_complex(std::span<double> z, std::span<const double> m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    z[2 * i] *= m[i];
    z[2 * i + 1] *= m[i];
  }
}

}  // namespace fwlab::kernels::scalar
