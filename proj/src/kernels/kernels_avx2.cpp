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

// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has confirmed CPU support.

#include "fwlab/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace fwlab::kernels::avx2 {

namespace {

// Cody-Waite split of pi/4 and minimax coefficients on [-pi/4, pi/4]
// (the classic Cephes double-precision sin/cos reduction).
constexpr double kFourOverPi = 1.27323954473516268615;
constexpr double kDp1 = 7.85398125648498535156E-1;
constexpr double kDp2 = 3.77489470793079817668E-8;
constexpr double kDp3 = 2.69515142907905952645E-15;

constexpr double kSinCoef[6] = {1.58962301576546568060E-10, -2.50507477628578072866E-8,
                                2.75573136213857245213E-6,  -1.98412698295895385996E-4,
                                8.33333333332211858878E-3,  -1.66666666666666307295E-1};
constexpr double kCosCoef[6] = {-1.13585365213876817300E-11, 2.08757008419747316778E-9,
                                -2.75573141792967388112E-7,  2.48015872888517045348E-5,
                                -1.38888888888730564116E-3,  4.16666666666665929218E-2};

inline __m256d polevl(__m256d x, const double (&c)[6]) {
  __m256d r = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 6; ++i) r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c[i]));
  return r;
}

struct SinCos {
  __m256d s;
  __m256d c;
};

inline SinCos sincos_pd(__m256d x) {
  const __m256d sign_bit = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_andnot_pd(sign_bit, x);
  const __m256d xsign = _mm256_and_pd(sign_bit, x);

  __m256d y = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(kFourOverPi)));
  // Round the octant index up to even.
  const __m256d odd = _mm256_sub_pd(
      y, _mm256_mul_pd(_mm256_set1_pd(2.0),
                       _mm256_floor_pd(_mm256_mul_pd(y, _mm256_set1_pd(0.5)))));
  y = _mm256_add_pd(y, odd);
  const __m256d j8 = _mm256_sub_pd(
      y, _mm256_mul_pd(_mm256_set1_pd(8.0),
                       _mm256_floor_pd(_mm256_mul_pd(y, _mm256_set1_pd(0.125)))));
  const __m256d ge4 = _mm256_cmp_pd(j8, _mm256_set1_pd(3.5), _CMP_GT_OQ);
  const __m256d j4 = _mm256_sub_pd(j8, _mm256_and_pd(ge4, _mm256_set1_pd(4.0)));
  const __m256d is2 = _mm256_cmp_pd(j4, _mm256_set1_pd(1.5), _CMP_GT_OQ);

  __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDp1), ax);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDp2), z);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDp3), z);
  const __m256d zz = _mm256_mul_pd(z, z);

  const __m256d ps = _mm256_fmadd_pd(_mm256_mul_pd(z, zz), polevl(zz, kSinCoef), z);
  const __m256d pc = _mm256_fmadd_pd(
      _mm256_mul_pd(zz, zz), polevl(zz, kCosCoef),
      _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, _mm256_set1_pd(1.0)));

  __m256d s = _mm256_blendv_pd(ps, pc, is2);
  __m256d c = _mm256_blendv_pd(pc, ps, is2);
  s = _mm256_xor_pd(s, _mm256_xor_pd(xsign, _mm256_and_pd(ge4, sign_bit)));
  c = _mm256_xor_pd(c, _mm256_and_pd(_mm256_xor_pd(ge4, is2), sign_bit));
  return {s, c};
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void sincos(std::span<const double> theta, std::span<double> s, std::span<double> c) {
  const std::size_t n = theta.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const SinCos r = sincos_pd(_mm256_loadu_pd(theta.data() + i));
    _mm256_storeu_pd(s.data() + i, r.s);
    _mm256_storeu_pd(c.data() + i, r.c);
  }
  for (; i < n; ++i) {
    s[i] = std::sin(theta[i]);
    c[i] = std::cos(theta[i]);
  }
}

void accumulate_phase(std::span<const double> theta, double w, std::span<double> re,
                      std::span<double> im) {
  const std::size_t n = theta.size();
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const SinCos r = sincos_pd(_mm256_loadu_pd(theta.data() + i));
    _mm256_storeu_pd(re.data() + i, _mm256_fmadd_pd(vw, r.c, _mm256_loadu_pd(re.data() + i)));
    _mm256_storeu_pd(im.data() + i, _mm256_fmadd_pd(vw, r.s, _mm256_loadu_pd(im.data() + i)));
  }
  for (; i < n; ++i) {
    re[i] += w * std::cos(theta[i]);
    im[i] += w * std::sin(theta[i]);
  }
}

void rotate(std::span<const double> fr, std::span<const double> fi,
            std::span<const double> theta, std::span<double> a, std::span<double> b) {
  const std::size_t n = theta.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const SinCos r = sincos_pd(_mm256_loadu_pd(theta.data() + i));
    const __m256d vr = _mm256_loadu_pd(fr.data() + i);
    const __m256d vi = _mm256_loadu_pd(fi.data() + i);
    _mm256_storeu_pd(a.data() + i, _mm256_fmadd_pd(vr, r.c, _mm256_mul_pd(vi, r.s)));
    _mm256_storeu_pd(b.data() + i, _mm256_fmsub_pd(vi, r.c, _mm256_mul_pd(vr, r.s)));
  }
  for (; i < n; ++i) {
    const double cs = std::cos(theta[i]);
    const double sn = std::sin(theta[i]);
    a[i] = fr[i] * cs + fi[i] * sn;
    b[i] = fi[i] * cs - fr[i] * sn;
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i),
                                                   _mm256_loadu_pd(y.data() + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4),
                           _mm256_loadu_pd(b.data() + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 8),
                           _mm256_loadu_pd(b.data() + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 12),
                           _mm256_loadu_pd(b.data() + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3))) + tail;
}

double weighted_norm_sq(std::span<const double> w, std::span<const double> re,
                        std::span<const double> im) {
  const std::size_t n = w.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d r = _mm256_loadu_pd(re.data() + i);
    __m256d m = _mm256_loadu_pd(im.data() + i);
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + i),
                           _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m)), acc0);
    r = _mm256_loadu_pd(re.data() + i + 4);
    m = _mm256_loadu_pd(im.data() + i + 4);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + i + 4),
                           _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m)), acc1);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * (re[i] * re[i] + im[i] * im[i]);
  return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

void scale_complex(std::span<double> z, std::span<const double> m) {
  const std::size_t n = m.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // (m0, m0, m1, m1)
    const __m128d mm = _mm_loadu_pd(m.data() + i);
    const __m256d dup = _mm256_permute4x64_pd(_mm256_castpd128_pd256(mm), 0b01010000);
    _mm256_storeu_pd(z.data() + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(z.data() + 2 * i), dup));
  }
  for (; i < n; ++i) {
    z[2 * i] *= m[i];
    z[2 * i + 1] *= m[i];
  }
}

}  // namespace fwlab::kernels::avx2
