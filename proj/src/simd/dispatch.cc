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

#include <atomic>
#include <cstdlib>
#include <string>

#include "psac/error.h"
#include "psac/simd.h"

namespace psac::simd {
namespace {

const Kernels* Lookup(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_kernels();
    case Isa::kAvx2:
      return avx2_kernels();
    case Isa::kNeon:
      return neon_kernels();
  }
  return nullptr;
}

const Kernels* SelectDefault() {
  if (const char* env = std::getenv("PSAC_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && avx2_kernels()) return avx2_kernels();
    if (want == "neon" && neon_kernels()) return neon_kernels();
  }
  if (const Kernels* k = avx2_kernels()) return k;
  if (const Kernels* k = neon_kernels()) return k;
  return &scalar_kernels();
}

std::atomic<const Kernels*>& Slot() {
  static std::atomic<const Kernels*> slot{SelectDefault()};
  return slot;
}

}  // namespace

bool supported(Isa isa) { return Lookup(isa) != nullptr; }

const Kernels& active() { return *Slot().load(std::memory_order_acquire); }

void set_active(Isa isa) {
  const Kernels* k = Lookup(isa);
  if (k == nullptr) {
    throw ContractViolation("kernel variant '" + std::string(name(isa)) +
                            "' is not available on this machine");
  }
  Slot().store(k, std::memory_order_release);
}

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

}  // namespace psac::simd
