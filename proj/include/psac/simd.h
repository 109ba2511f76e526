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

// Dense double-precision kernels with a scalar reference implementation and
// optional AVX2 / NEON variants. The variant is chosen once per process from
// the CPU feature set; PSAC_SIMD=scalar in the environment forces the
// reference path. Every variant reduces in a fixed lane order, so results are
// reproducible run to run on the same machine.

#ifndef PSAC_SIMD_H_
#define PSAC_SIMD_H_

#include <cstddef>
#include <string_view>

namespace psac::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct Kernels {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
};

const Kernels& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

bool supported(Isa isa);

// Kernel table used by numerics. Selected lazily on first call.
const Kernels& active();

// Overrides the selection; throws ContractViolation if `isa` is unsupported.
void set_active(Isa isa);

std::string_view name(Isa isa);

}  // namespace psac::simd

#endif  // PSAC_SIMD_H_
