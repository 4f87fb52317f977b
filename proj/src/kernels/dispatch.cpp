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

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "fwlab/kernels.hpp"

namespace fwlab::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("FWLAB_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && avx2_supported()) return Isa::kAvx2;
  }
  return avx2_supported() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool avx2_supported() {
#if defined(FWLAB_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2_supported()) isa = Isa::kScalar;
  current().store(isa, std::memory_order_relaxed);
}

#if defined(FWLAB_HAVE_AVX2)
#define FWLAB_DISPATCH(fn, ...)                                    \
  (active_isa() == Isa::kAvx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define FWLAB_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void sincos(std::span<const double> theta, std::span<double> s, std::span<double> c) {
  assert(s.size() >= theta.size() && c.size() >= theta.size());
  FWLAB_DISPATCH(sincos, theta, s, c);
}

void accumulate_phase(std::span<const double> theta, double w, std::span<double> re,
                      std::span<double> im) {
  assert(re.size() >= theta.size() && im.size() >= theta.size());
  FWLAB_DISPATCH(accumulate_phase, theta, w, re, im);
}

void rotate(std::span<const double> fr, std::span<const double> fi,
            std::span<const double> theta, std::span<double> a, std::span<double> b) {
  FWLAB_DISPATCH(rotate, fr, fi, theta, a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  FWLAB_DISPATCH(axpy, alpha, x, y);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return FWLAB_DISPATCH(dot, a, b);
}

double weighted_norm_sq(std::span<const double> w, std::span<const double> re,
                        std::span<const double> im) {
  return FWLAB_DISPATCH(weighted_norm_sq, w, re, im);
}

void scale_complex(std::span<double> z, std::span<const double> m) {
  assert(z.size() >= 2 * m.size());
  FWLAB_DISPATCH(scale_complex, z, m);
}

#undef FWLAB_DISPATCH

}  // namespace fwlab::kernels
