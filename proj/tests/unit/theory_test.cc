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

#include "psac/theory.h"

#include <gtest/gtest.h>

#include <cmath>

#include "psac/clipping.h"
#include "psac/error.h"

namespace psac::theory {
namespace {

BoundInputs RandomInputs(RngState& rng) {
  BoundInputs in;
  in.l0 = std::exp(2 * rng.next_gaussian());
  in.l1 = rng.next_uniform() < 0.2 ? 0.0 : std::exp(2 * rng.next_gaussian());
  in.tau0 = std::exp(1.5 * rng.next_gaussian());
  in.tau1 = 0.95 * (rng.next_uniform() - 1e-9);
  in.r = std::exp(std::log(1e-4) * rng.next_uniform());
  return in;
}

TEST(TheoryTest, ClosedFormsAtUnitInputs) {
  EXPECT_DOUBLE_EQ(n_const(1, 0, 1), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(m_const(1, 0, 1), 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(alpha_const(1, 0, 1), 3.0 / 56.0);
  EXPECT_NEAR(nonvanishing_bound(1, 0, 1), 28.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(lemma4_rhs(1, 0, 1), 2.0);
}

TEST(TheoryTest, Limits) {
  // r -> 0: second argument of n_const -> 1/2.
  EXPECT_NEAR(n_const(2.0, 0.1, 1e-12), 0.5, 1e-9);
  EXPECT_NEAR(n_const(0.3, 0.5, 1e-12), 0.5, 1e-9);
  // Vanishes linearly as tau0 -> 0.
  EXPECT_LT(nonvanishing_bound(1e-6, 0.0, 0.1), 1e-5);
  EXPECT_NEAR(nonvanishing_bound(1e-8, 0.0, 0.1) / nonvanishing_bound(1e-6, 0.0, 0.1), 0.01,
              1e-4);
  for (double tau0 : {0.1, 1.0, 3.0}) {
    EXPECT_LE(m_const(tau0, 0.2, 0.1), 1.0);
    EXPECT_GE(m_const(tau0, 0.2, 0.1), m_const(tau0 * 1.5, 0.2, 0.1));
  }
}

TEST(TheoryTest, AlphaBelowOneEighth) {
  RngState rng(6, Stream::kTheory);
  for (int i = 0; i < 10000; ++i) {
    const BoundInputs in = RandomInputs(rng);
    const double a = alpha_const(in.tau0, in.tau1, in.r);
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, 0.125);
  }
}

TEST(TheoryTest, EvaluatorsFiniteOnValidInputs) {
  RngState rng(8, Stream::kTheory);
  for (int i = 0; i < 2000; ++i) {
    BoundInputs in = RandomInputs(rng);
    for (double v : {n_const(in.tau0, in.tau1, in.r), m_const(in.tau0, in.tau1, in.r),
                     nonvanishing_bound(in.tau0, in.tau1, in.r),
                     lemma2_rhs(in.l0, in.l1, in.tau0, in.tau1, in.r),
                     lemma4_rhs(in.tau0, in.tau1, in.r),
                     min_iterations(in.l0, in.l1, in.tau0, in.tau1, in.r, in.dim,
                                    in.sigma, in.batch_size),
                     min_samples(in.l0, in.l1, in.tau0, in.tau1, in.r, in.dim,
                                 in.epsilon, in.delta),
                     theorem2_delta(in)}) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  }
}

// With L1 = 0 both arguments of the max depend on L0 alone, and since
// 2 sqrt(r) - r >= sqrt(r) on (0, 1] the second one wins.
TEST(TheoryTest, LemmaTwoWithoutNormDependence) {
  for (double r : {1e-4, 0.01, 0.1, 0.5, 1.0}) {
    const double rhs = lemma2_rhs(2.0, 0.0, 1.0, 0.3, r);
    EXPECT_NEAR(rhs, 2.0 / std::sqrt(r), 1e-12 * rhs);
    EXPECT_LE(2.0 * max_weight(ClipStrategy::psac(r)), rhs * (1 + 1e-12));
  }
}

TEST(TheoryTest, SamplerRespectsDeviationBound) {
  RngState rng(9, Stream::kTheory);
  for (int t = 0; t < 20; ++t) {
    const BoundInputs in = RandomInputs(rng);
    AssumptionSampler sampler(rng.fork(t), in.tau0, in.tau1);
    for (int i = 0; i < 5000; ++i) {
      const auto d = i % 3 == 0   ? sampler.next()
                     : i % 3 == 1 ? sampler.with_grad_norm(rng.next_uniform() * 10)
                                  : sampler.with_sample_norm(rng.next_uniform() * 10);
      ParamVector diff = d.g;
      axpy(-1.0, d.grad_f, diff);
      ASSERT_LE(norm2(diff), in.tau0 + in.tau1 * norm2(d.grad_f));
    }
  }
}

TEST(TheoryTest, SamplerTargetsRequestedNorms) {
  RngState rng(1, Stream::kTheory);
  AssumptionSampler sampler(rng, 1.0, 0.5);
  EXPECT_NEAR(norm2(sampler.with_grad_norm(3.0).grad_f), 3.0, 1e-12);
  const auto d = sampler.with_sample_norm(0.7);
  EXPECT_NEAR(norm2(d.g), 0.7, 1e-12);
  EXPECT_NEAR(norm2(d.grad_f), (0.7 + 1.0) / 0.5, 1e-9);
  EXPECT_THROW(AssumptionSampler(rng, 1.0, 1.0), ContractViolation);
}

TEST(TheoryTest, LemmasHoldOnRandomTuples) {
  RngState rng(10, Stream::kTheory);
  for (int t = 0; t < 20; ++t) {
    const BoundInputs in = RandomInputs(rng);
    const VerificationResult l2 = verify_lemma2(in, 100000, t);
    const VerificationResult l4 = verify_lemma4(in, 100000, t);
    EXPECT_TRUE(l2.passed) << l2.counterexample.value_or("");
    EXPECT_TRUE(l4.passed) << l4.counterexample.value_or("");
    EXPECT_EQ(l2.violations, 0);
    EXPECT_GE(l2.trials, 100000);
    EXPECT_LE(l4.worst_gap, kLemmaTolerance);
  }
}

TEST(TheoryTest, DefaultVerificationPasses) {
  BoundInputs in;
  in.tau1 = 0.5;
  EXPECT_TRUE(verify_lemma2(in, 100000, 0).passed);
  EXPECT_TRUE(verify_lemma4(in, 100000, 0).passed);
}

TEST(TheoryTest, TargetedNormsCoverCriticalPoints) {
  BoundInputs in;
  in.tau1 = 0.5;
  const auto targeted = targeted_norms(in.tau0, in.tau1, in.r);
  ASSERT_EQ(targeted.size(), 4u);
  EXPECT_DOUBLE_EQ(targeted[1], std::sqrt(in.r) - in.r);
  EXPECT_DOUBLE_EQ(targeted[3], in.tau0 / (1 - in.tau1));
}

TEST(TheoryTest, MinIterationsHandValue) {
  // (L0, L1, tau0, tau1, r, d, sigma, B) = (1, 1, 1, 0, 0.25, 100, 1, 16):
  // alpha = 3/76 and the second term dominates at 51200/75 * 5776/9.
  EXPECT_NEAR(min_iterations(1, 1, 1, 0, 0.25, 100, 1, 16), 295731200.0 / 675.0, 1e-6);
}

TEST(TheoryTest, MinIterationsScaling) {
  // Without L1 the third term vanishes and the rest scales as sigma^-2.
  const double base = min_iterations(1, 0, 1, 0.2, 0.1, 1000, 1, 64);
  EXPECT_NEAR(min_iterations(1, 0, 1, 0.2, 0.1, 1000, 4, 64), base / 16, 1e-9 * base);
  // With a huge d sigma^2 the third term takes over and grows as sigma^2.
  const double third = min_iterations(1, 1, 1, 0, 0.1, 1e8, 100, 1);
  EXPECT_NEAR(third, 72.0 * 1e8 * 1e4 / 3.0, 1e-9 * third);
}

TEST(TheoryTest, MinSamples) {
  // alpha = 3/56; 6 / alpha = 112; sqrt(2 * 100 * 1 / 3).
  EXPECT_NEAR(min_samples(1, 1, 1, 0, 1, 100, 1, std::exp(-1.0)),
              112.0 * std::sqrt(200.0 / 3.0), 1e-9);
  EXPECT_EQ(min_samples(1, 0, 1, 0, 1, 100, 1, 1e-5), 0.0);
  const double at1 = min_samples(1, 2, 1, 0.1, 0.1, 1e4, 1, 1e-5);
  EXPECT_NEAR(min_samples(1, 2, 1, 0.1, 0.1, 1e4, 2, 1e-5), at1 / 2, 1e-12 * at1);
  EXPECT_NEAR(min_samples(1, 2, 1, 0.1, 0.1, 1e4, 1, 1e-5, 3.0), 3 * at1, 1e-12 * at1);
}

TEST(TheoryTest, TheoremTwoDecreasesInSteps) {
  BoundInputs in;
  const double t_min = min_iterations(in.l0, in.l1, in.tau0, in.tau1, in.r, in.dim,
                                      in.sigma, in.batch_size);
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 30; ++k) {
    in.steps = std::ceil(t_min) * std::pow(2.0, k);
    const double v = theorem2_rhs(in);
    EXPECT_LE(v, previous);
    previous = v;
  }
  in.steps = std::floor(t_min) - 1;
  EXPECT_THROW(theorem2_rhs(in), ContractViolation);
}

TEST(TheoryTest, TheoremTwoLimit) {
  BoundInputs in;
  in.steps = 1e40;
  in.d_f = 3.0;
  const double n = n_const(in.tau0, in.tau1, in.r);
  const double m = m_const(in.tau0, in.tau1, in.r);
  // Only the term independent of T survives; it is 3N/4 of the
  // nonvanishing bound.
  const double floor = 0.75 * n * nonvanishing_bound(in.tau0, in.tau1, in.r);
  const double limit = std::max(std::sqrt(16 * floor / (7 * m)), 8 * floor / (3 * n));
  EXPECT_NEAR(theorem2_rhs(in), limit, 1e-6 * limit);
}

TEST(TheoryTest, InverseRootScaling) {
  for (double r = 1e-8; r <= 1.0; r *= 1.7) {
    const double scaled = nonvanishing_bound(1, 0, r) * std::sqrt(r);
    EXPECT_GT(scaled, 5.0);
    EXPECT_LT(scaled, 9.5);
  }
  const double ratio = nonvanishing_bound(1, 0, 1e-6) / nonvanishing_bound(1, 0, 0.25e-6);
  EXPECT_NEAR(ratio, 0.5, 0.025);
  // At r = 1e-4 the bound sits far below a 1/r curve matched at r = 1.
  EXPECT_LT(nonvanishing_bound(1, 0, 1e-4), nonvanishing_bound(1, 0, 1) / 1e-4);
}

TEST(TheoryTest, InputValidation) {
  BoundInputs in;
  in.tau1 = 1.0;
  EXPECT_THROW(in.validate(), ContractViolation);
  in = BoundInputs();
  in.r = 0.0;
  EXPECT_THROW(in.validate(), ContractViolation);
  in = BoundInputs();
  in.l0 = 0.0;
  EXPECT_THROW(in.validate(), ContractViolation);
}

}  // namespace
}  // namespace psac::theory
