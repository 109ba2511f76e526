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

#include "psac/simd.h"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace psac::simd {
namespace {

double DotNeon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline void TwoSumInto(double& s, double& c, double p) {
  const double t = s + p;
  const double z = t - s;
  c += (s - (t - z)) + (p - z);
  s = t;
}

// Compensated like the scalar kernel, two lanes at a time.
double SumSquaresNeon(const double* a, std::size_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  float64x2_t c = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(a + i);
    const float64x2_t p = vmulq_f64(x, x);
    const float64x2_t pe = vfmaq_f64(vnegq_f64(p), x, x);
    const float64x2_t t = vaddq_f64(s, p);
    const float64x2_t z = vsubq_f64(t, s);
    const float64x2_t e =
        vaddq_f64(vsubq_f64(s, vsubq_f64(t, z)), vsubq_f64(p, z));
    c = vaddq_f64(c, vaddq_f64(e, pe));
    s = t;
  }
  double sum = 0.0;
  double comp = 0.0;
  TwoSumInto(sum, comp, vgetq_lane_f64(s, 0));
  TwoSumInto(sum, comp, vgetq_lane_f64(s, 1));
  comp += vgetq_lane_f64(c, 0) + vgetq_lane_f64(c, 1);
  for (; i < n; ++i) {
    const double p = a[i] * a[i];
    TwoSumInto(sum, comp, p);
    comp += __builtin_fma(a[i], a[i], -p);
  }
  return sum + comp;
}

void AxpyNeon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void ScaleNeon(double alpha, double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), alpha));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

}  // namespace

const Kernels* neon_kernels() {
  static const Kernels kKernels{Isa::kNeon, DotNeon, SumSquaresNeon, AxpyNeon,
                                ScaleNeon};
  return &kKernels;
}

}  // namespace psac::simd

#else

namespace psac::simd {
const Kernels* neon_kernels() { return nullptr; }
}  // namespace psac::simd

#endif
