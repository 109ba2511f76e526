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

#ifndef PSAC_NUMERICS_H_
#define PSAC_NUMERICS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace psac {

// Flat dense parameter (or gradient) vector. All arithmetic is float64.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0)
      : values_(dim, fill) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}
  explicit ParamVector(std::vector<double> values)
      : values_(std::move(values)) {}

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool all_finite() const;

  // Sets every entry to zero without reallocating.
  void set_zero();

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

// Throws ContractViolation unless a.dim() == b.dim().
void check_same_dim(const ParamVector& a, const ParamVector& b,
                    const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double dot(const ParamVector& a, const ParamVector& b);

double norm2(std::span<const double> a);
double norm2(const ParamVector& a);

inline constexpr double kDefaultCosineFloor = 1e-12;

struct CosineResult {
  double value = 0.0;
  // Either input had norm below the floor; value is 0 in that case.
  bool degenerate = false;
};

CosineResult cosine_similarity(const ParamVector& a, const ParamVector& b,
                               double floor = kDefaultCosineFloor);

// y += alpha * x
void axpy(double alpha, const ParamVector& x, ParamVector& y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// x *= alpha
void scale(double alpha, ParamVector& x);

ParamVector scaled(const ParamVector& x, double alpha);

// Fixed named streams so that noise, batch sampling, data generation and
// initialization never share draws.
enum class Stream : std::uint64_t {
  kNoise = 1,
  kBatch = 2,
  kData = 3,
  kInit = 4,
  kTheory = 5,
};

// Philox4x32-10 block function (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based generator: draw k of (seed, stream_id) is a pure function of
// those three values, so a state can be forked or replayed freely. One state
// must not be drawn from by two threads at once.
class RngState {
 public:
  RngState() = default;
  RngState(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {}
  RngState(std::uint64_t seed, Stream stream)
      : RngState(seed, static_cast<std::uint64_t>(stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  // 128 random bits for the current counter; advances by one.
  std::array<std::uint64_t, 2> next_block();

  std::uint64_t next_u64();

  // Uniform in (0, 1], 53 bits of resolution.
  double next_uniform();

  // Unbiased uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p);

  // One standard normal draw (consumes one block).
  double next_gaussian();

  // Independent child stream, e.g. one per sweep cell.
  RngState fork(std::uint64_t child) const;

  friend bool operator==(const RngState&, const RngState&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

// `dim` i.i.d. N(0, std^2) samples. Pairs of coordinates share one Box-Muller
// block, so the state advances by ceil(dim / 2), also when std == 0.
ParamVector gaussian_vector(RngState& rng, std::size_t dim, double std);

// Mixes a parent seed with a tag into a new 64-bit seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace psac

#endif  // PSAC_NUMERICS_H_
