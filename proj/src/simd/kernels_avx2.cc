// Copyright 2026 The PSAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma. Nothing in this file may run before
// avx2_kernels() has confirmed CPU support.

#include "psac/simd.h"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace psac::simd {
namespace {

// Horizontal sum in a fixed order: (l0 + l2) + (l1 + l3).
inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double DotAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Compensated like the scalar kernel: per-lane TwoSum of exact squares,
// lanes folded in a fixed order at the end.
struct Compensated {
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();

  void add_square(__m256d x) {
    const __m256d p = _mm256_mul_pd(x, x);
    const __m256d pe = _mm256_fmsub_pd(x, x, p);
    const __m256d t = _mm256_add_pd(s, p);
    const __m256d z = _mm256_sub_pd(t, s);
    const __m256d e = _mm256_add_pd(_mm256_sub_pd(s, _mm256_sub_pd(t, z)),
                                    _mm256_sub_pd(p, z));
    c = _mm256_add_pd(c, _mm256_add_pd(e, pe));
    s = t;
  }
};

inline void TwoSumInto(double& s, double& c, double p) {
  const double t = s + p;
  const double z = t - s;
  c += (s - (t - z)) + (p - z);
  s = t;
}

double SumSquaresAvx2(const double* a, std::size_t n) {
  Compensated acc0;
  Compensated acc1;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0.add_square(_mm256_loadu_pd(a + i));
    acc1.add_square(_mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0.add_square(_mm256_loadu_pd(a + i));
  alignas(32) double s[8];
  alignas(32) double c[8];
  _mm256_store_pd(s, acc0.s);
  _mm256_store_pd(s + 4, acc1.s);
  _mm256_store_pd(c, acc0.c);
  _mm256_store_pd(c + 4, acc1.c);
  double sum = 0.0;
  double comp = 0.0;
  for (int k = 0; k < 8; ++k) {
    TwoSumInto(sum, comp, s[k]);
    comp += c[k];
  }
  for (; i < n; ++i) {
    const double p = a[i] * a[i];
    TwoSumInto(sum, comp, p);
    comp += _mm_cvtsd_f64(_mm_fmsub_sd(_mm_set_sd(a[i]), _mm_set_sd(a[i]),
                                       _mm_set_sd(p)));
  }
  return sum + comp;
}

void AxpyAvx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void ScaleAvx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels kKernels{Isa::kAvx2, DotAvx2, SumSquaresAvx2, AxpyAvx2,
                                ScaleAvx2};
  static const bool kCpuOk =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return kCpuOk ? &kKernels : nullptr;
}

}  // namespace psac::simd

#else

namespace psac::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace psac::simd

#endif
