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

// Closed-form constants and bounds from the DP-PSAC convergence analysis,
// plus randomized checkers for the two weight inequalities it rests on.
//
// Notation: (L0, L1) generalized smoothness, ||grad f(x) - grad f(y)|| <=
// (L0 + L1 ||grad f(x)||) ||x - y||; (tau0, tau1) bounded per-sample
// deviation, ||g - grad f|| <= tau0 + tau1 ||grad f|| with 0 <= tau1 < 1;
// r in (0, 1] the psac regularizer.

#ifndef PSAC_THEORY_H_
#define PSAC_THEORY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psac/numerics.h"

namespace psac::theory {

struct BoundInputs {
  double l0 = 1.0;
  double l1 = 1.0;
  double tau0 = 1.0;
  double tau1 = 0.0;
  double r = 0.1;
  double batch_size = 256;
  double dim = 1e4;
  double steps = 1e4;
  double num_samples = 6e4;
  double sigma = 1.0;
  double epsilon = 3.0;
  double delta = 1e-5;
  // f(x_0) - E f(x_T); only enters theorem2_rhs.
  double d_f = 1.0;

  // Throws ContractViolation unless L0 > 0, L1 >= 0, tau0 > 0,
  // 0 <= tau1 < 1, 0 < r <= 1 and the integer-like fields are positive.
  void validate() const;
};

// min(tau0/(1-tau1), (2 tau0^2 + r tau0 (1-tau1)) /
//                    (4 tau0^2 + 2 r tau0 (1-tau1) + r (1-tau1)^2))
double n_const(double tau0, double tau1, double r);

// min(1, 1 / (tau0 + r/(r+tau0) + tau0 (1+tau1)/(1-tau1)))
double m_const(double tau0, double tau1, double r);

// n_const (1-tau1) min(sqrt(r)/(sqrt(r)+tau0),
//                      (2 sqrt(r)-r)/(sqrt(r)-r+tau0)) / 4; always < 1/8.
double alpha_const(double tau0, double tau1, double r);

// Term of the gradient-norm bound that does not vanish as T grows:
// 8 tau0^2 (1+tau0) / (3 N (1-tau1)^3 (tau0 + r(1-tau1)/(2 tau0 + r(1-tau1)))
//                      (2 sqrt(r) - r))
double nonvanishing_bound(double tau0, double tau1, double r);

// Upper bound on (L0 + L1 ||grad f||) w(g) for the psac weight.
double lemma2_rhs(double l0, double l1, double tau0, double tau1, double r);

// Upper bound on w(g) ||grad f|| for the psac weight.
double lemma4_rhs(double tau0, double tau1, double r);

// Smallest T for which the constant learning rate theoretical_lr satisfies
// the step-size conditions of the descent lemma.
double min_iterations(double l0, double l1, double tau0, double tau1, double r,
                      double dim, double sigma, double batch_size);

// (6 L1 c2 / (alpha eps)) sqrt(2 d log(1/delta) / (L0 + L1 (tau0 + 1))).
// c2 is the unspecified constant of the sigma ~ q sqrt(T log(1/delta))/eps
// privacy scaling and must be supplied by the caller.
double min_samples(double l0, double l1, double tau0, double tau1, double r,
                   double dim, double epsilon, double delta, double c2 = 1.0);

// The three-term Delta of the convergence proof.
double theorem2_delta(const BoundInputs& in);

// max(sqrt(16 Delta / (7 M)), 8 Delta / (3 N)). Throws ContractViolation
// when in.steps < min_iterations.
double theorem2_rhs(const BoundInputs& in);

// Emits (grad f, g) pairs with ||g - grad f|| <= tau0 + tau1 ||grad f|| by
// construction: the deviation is a random direction scaled to a random
// fraction of the allowed radius.
class AssumptionSampler {
 public:
  AssumptionSampler(RngState rng, double tau0, double tau1,
                    double max_grad_norm = 1e3, std::size_t dim = 8);

  struct Draw {
    ParamVector grad_f;
    ParamVector g;
  };

  // Random ||grad f|| (mixture of log-uniform and uniform on [0, max]).
  Draw next();

  // ||grad f|| fixed to `grad_norm`, deviation random.
  Draw with_grad_norm(double grad_norm);

  // ||g|| fixed to `g_norm` and grad f parallel to g with the largest norm
  // the assumption allows, (g_norm + tau0)/(1 - tau1) shrunk by 1e-12.
  Draw with_sample_norm(double g_norm);

 private:
  ParamVector RandomDirection();
  Draw Around(ParamVector grad_f);

  RngState rng_;
  double tau0_;
  double tau1_;
  double max_grad_norm_;
  std::size_t dim_;
};

struct VerificationResult {
  bool passed = true;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double rhs = 0.0;
  // max over trials of lhs - rhs; negative when every trial held strictly.
  double worst_gap = -1e300;
  // JSON object describing the first violating draw, if any.
  std::optional<std::string> counterexample;
};

inline constexpr double kLemmaTolerance = 1e-9;

// Checks (L0 + L1 ||grad f||) w_psac(||g||) <= lemma2_rhs + 1e-9 on `trials`
// random draws plus the targeted norms {0, sqrt(r)-r, 1-r, tau0/(1-tau1)}
// applied to both ||grad f|| and ||g||.
VerificationResult verify_lemma2(const BoundInputs& in, std::int64_t trials,
                                 std::uint64_t seed);

// Same for w_psac(||g||) ||grad f|| <= lemma4_rhs + 1e-9.
VerificationResult verify_lemma4(const BoundInputs& in, std::int64_t trials,
                                 std::uint64_t seed);

// Norms every verification visits explicitly.
std::vector<double> targeted_norms(double tau0, double tau1, double r);

}  // namespace psac::theory

#endif  // PSAC_THEORY_H_
