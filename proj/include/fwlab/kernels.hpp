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

// Data-parallel inner loops shared by the quadrature and spectral code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is chosen once at first use from CPU features; it can
// be pinned with force_isa() or the FWLAB_ISA environment variable
// ("scalar" or "avx2"). Both variants are covered by equivalence tests.
//
// Reductions use a fixed association order per ISA, so results are
// bit-reproducible for a given ISA and input length.

#include <cstddef>
#include <span>
#include <string_view>

namespace fwlab::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool avx2_supported();
Isa active_isa();
void force_isa(Isa isa);

// s[i] = sin(theta[i]), c[i] = cos(theta[i])
void sincos(std::span<const double> theta, std::span<double> s, std::span<double> c);

// re[i] += w * cos(theta[i]); im[i] += w * sin(theta[i])
void accumulate_phase(std::span<const double> theta, double w, std::span<double> re,
                      std::span<double> im);

// a[i] = fr[i] cos(theta[i]) + fi[i] sin(theta[i])
// b[i] = fi[i] cos(theta[i]) - fr[i] sin(theta[i])
// i.e. (a + i b) = (fr + i fi) * exp(-i theta).
void rotate(std::span<const double> fr, std::span<const double> fi,
            std::span<const double> theta, std::span<double> a, std::span<double> b);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// sum_i w[i] * (re[i]^2 + im[i]^2)
double weighted_norm_sq(std::span<const double> w, std::span<const double> re,
                        std::span<const double> im);

// Interleaved complex array z (2n doubles) scaled by a real multiplier m (n).
void scale_complex(std::span<double> z, std::span<const double> m);

namespace scalar {
void sincos(std::span<const double>, std::span<double>, std::span<double>);
void accumulate_phase(std::span<const double>, double, std::span<double>, std::span<double>);
void rotate(std::span<const double>, std::span<const double>, std::span<const double>,
            std::span<double>, std::span<double>);
void axpy(double, std::span<const double>, std::span<double>);
double dot(std::span<const double>, std::span<const double>);
double weighted_norm_sq(std::span<const double>, std::span<const double>,
                        std::span<const double>);
void scale_complex(std::span<double>, std::span<const double>);
}  // namespace scalar

#if defined(FWLAB_HAVE_AVX2)
namespace avx2 {
void sincos(std::span<const double>, std::span<double>, std::span<double>);
void accumulate_phase(std::span<const double>, double, std::span<double>, std::span<double>);
void rotate(std::span<const double>, std::span<const double>, std::span<const double>,
            std::span<double>, std::span<double>);
void axpy(double, std::span<const double>, std::span<double>);
double dot(std::span<const double>, std::span<const double>);
double weighted_norm_sq(std::span<const double>, std::span<const double>,
                        std::span<const double>);
void scale_complex(std::span<double>, std::span<const double>);
}  // namespace avx2
#endif

}  // namespace fwlab::kernels
