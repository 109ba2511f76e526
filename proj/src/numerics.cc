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

#include "psac/numerics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "psac/error.h"
#include "psac/simd.h"

namespace psac {

bool ParamVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void ParamVector::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void check_same_dim(const ParamVector& a, const ParamVector& b,
                    const char* what) {
  if (a.dim() != b.dim()) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("dot: dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  return simd::active().dot(a.data(), b.data(), a.size());
}

double dot(const ParamVector& a, const ParamVector& b) {
  return dot(a.values(), b.values());
}

double norm2(std::span<const double> a) {
  const double ss = simd::active().sum_squares(a.data(), a.size());
  if (std::isfinite(ss)) return std::sqrt(ss);
  // Squares overflowed: rescale by the largest magnitude and retry.
  double peak = 0.0;
  for (double x : a) {
    if (std::isnan(x)) return x;
    peak = std::max(peak, std::abs(x));
  }
  if (!std::isfinite(peak)) return peak;
  double scaled = 0.0;
  for (double x : a) scaled += (x / peak) * (x / peak);
  return peak * std::sqrt(scaled);
}

double norm2(const ParamVector& a) { return norm2(a.values()); }

CosineResult cosine_similarity(const ParamVector& a, const ParamVector& b,
                               double floor) {
  check_same_dim(a, b, "cosine_similarity");
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na < floor || nb < floor) return {0.0, true};
  return {dot(a, b) / (na * nb), false};
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw ContractViolation("axpy: dimension mismatch (" +
                            std::to_string(x.size()) + " vs " +
                            std::to_string(y.size()) + ")");
  }
  simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

void axpy(double alpha, const ParamVector& x, ParamVector& y) {
  axpy(alpha, x.values(), y.values());
}

void scale(double alpha, ParamVector& x) {
  simd::active().scale(alpha, x.data(), x.dim());
}

ParamVector scaled(const ParamVector& x, double alpha) {
  ParamVector out = x;
  scale(alpha, out);
  return out;
}

// Philox4x32-10 with the Random123 round and Weyl constants.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t kMul0 = 0xD2511F53;
  constexpr std::uint64_t kMul1 = 0xCD9E8D57;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kMul0 * ctr[0];
    const std::uint64_t p1 = kMul1 * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint64_t, 2> RngState::next_block() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_id_),
      static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  ++counter_;
  const auto out = philox4x32(ctr, key);
  return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
          (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

std::uint64_t RngState::next_u64() { return next_block()[0]; }

namespace {

inline double ToUnitInterval(std::uint64_t bits) {
  // (k + 1) / 2^53 for k in [0, 2^53): never 0, reaches 1.
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

double RngState::next_uniform() { return ToUnitInterval(next_u64()); }

std::uint64_t RngState::uniform_index(std::uint64_t n) {
  if (n == 0) throw ContractViolation("uniform_index: n must be positive");
  // Lemire's multiply-shift with rejection.
  while (true) {
    const std::uint64_t x = next_u64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    const auto low = static_cast<std::uint64_t>(m);
    if (low >= n || low >= (0 - n) % n) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

bool RngState::bernoulli(double p) {
  if (p >= 1.0) {
    next_u64();
    return true;
  }
  // next_uniform is in (0, 1], so u <= p is exact at both ends.
  return next_uniform() <= p;
}

double RngState::next_gaussian() {
  const auto block = next_block();
  const double u1 = ToUnitInterval(block[0]);
  const double u2 = ToUnitInterval(block[1]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngState RngState::fork(std::uint64_t child) const {
  return RngState(derive_seed(seed_, derive_seed(stream_id_, child)),
                  stream_id_);
}

ParamVector gaussian_vector(RngState& rng, std::size_t dim, double std) {
  if (!(std >= 0.0)) {
    throw ContractViolation("gaussian_vector: std must be nonnegative");
  }
  ParamVector out(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    const auto block = rng.next_block();
    if (std == 0.0) continue;
    const double u1 = ToUnitInterval(block[0]);
    const double u2 = ToUnitInterval(block[1]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = std * radius * std::cos(angle);
    if (i + 1 < dim) out[i + 1] = std * radius * std::sin(angle);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace psac
