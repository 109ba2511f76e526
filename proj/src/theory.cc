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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "json.hpp"
#include "psac/clipping.h"
#include "psac/error.h"

namespace psac::theory {
namespace {

void CheckTau(double tau0, double tau1, double r) {
  if (!(tau0 > 0.0)) throw ContractViolation("tau0 must be positive");
  if (!(tau1 >= 0.0 && tau1 < 1.0)) {
    throw ContractViolation("tau1 must lie in [0, 1)");
  }
  if (!(r > 0.0 && r <= 1.0)) throw ContractViolation("r must lie in (0, 1]");
}

void CheckSmoothness(double l0, double l1) {
  if (!(l0 > 0.0)) throw ContractViolation("L0 must be positive");
  if (!(l1 >= 0.0)) throw ContractViolation("L1 must be nonnegative");
}

// Shared denominator factor tau0 + r(1 - tau1) / (2 tau0 + r(1 - tau1)).
double ShiftedTau(double tau0, double tau1, double r) {
  const double a = r * (1.0 - tau1);
  return tau0 + a / (2.0 * tau0 + a);
}

nlohmann::json DrawJson(const ParamVector& grad_f, const ParamVector& g) {
  return {{"grad_f", std::vector<double>(grad_f.begin(), grad_f.end())},
          {"g", std::vector<double>(g.begin(), g.end())},
          {"grad_f_norm", norm2(grad_f)},
          {"g_norm", norm2(g)}};
}

using LhsFn = std::function<double(double grad_norm, double g_norm)>;

VerificationResult Verify(const BoundInputs& in, std::int64_t trials,
                          std::uint64_t seed, double rhs, const LhsFn& lhs,
                          const char* lemma) {
  if (trials < 0) throw ContractViolation("trials must be nonnegative");
  VerificationResult result;
  result.rhs = rhs;
  AssumptionSampler sampler(RngState(seed, Stream::kTheory), in.tau0, in.tau1);
  auto check = [&](const AssumptionSampler::Draw& d) {
    const double gap = lhs(norm2(d.grad_f), norm2(d.g)) - rhs;
    ++result.trials;
    result.worst_gap = std::max(result.worst_gap, gap);
    if (gap > kLemmaTolerance) {
      ++result.violations;
      result.passed = false;
      if (!result.counterexample) {
        nlohmann::json cx = DrawJson(d.grad_f, d.g);
        cx["lemma"] = lemma;
        cx["lhs"] = gap + rhs;
        cx["rhs"] = rhs;
        cx["l0"] = in.l0;
        cx["l1"] = in.l1;
        cx["tau0"] = in.tau0;
        cx["tau1"] = in.tau1;
        cx["r"] = in.r;
        result.counterexample = cx.dump();
      }
    }
  };
  for (double n : targeted_norms(in.tau0, in.tau1, in.r)) {
    check(sampler.with_sample_norm(n));
    for (int k = 0; k < 16; ++k) check(sampler.with_grad_norm(n));
  }
  for (std::int64_t i = 0; i < trials; ++i) check(sampler.next());
  return result;
}

}  // namespace

void BoundInputs::validate() const {
  CheckSmoothness(l0, l1);
  CheckTau(tau0, tau1, r);
  if (!(batch_size > 0 && dim > 0 && steps > 0 && num_samples > 0)) {
    throw ContractViolation("B, d, T and N must be positive");
  }
  if (!(sigma > 0.0)) throw ContractViolation("sigma must be positive");
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0)) {
    throw ContractViolation("invalid (epsilon, delta)");
  }
}

double n_const(double tau0, double tau1, double r) {
  CheckTau(tau0, tau1, r);
  const double a = 1.0 - tau1;
  const double num = 2.0 * tau0 * tau0 + r * tau0 * a;
  const double den = 4.0 * tau0 * tau0 + 2.0 * r * tau0 * a + r * a * a;
  return std::min(tau0 / a, num / den);
}

double m_const(double tau0, double tau1, double r) {
  CheckTau(tau0, tau1, r);
  return std::min(
      1.0, 1.0 / (tau0 + r / (r + tau0) + tau0 * (1.0 + tau1) / (1.0 - tau1)));
}

double alpha_const(double tau0, double tau1, double r) {
  const double sr = std::sqrt(r);
  return n_const(tau0, tau1, r) * (1.0 - tau1) *
         std::min(sr / (sr + tau0), (2.0 * sr - r) / (sr - r + tau0)) / 4.0;
}

double nonvanishing_bound(double tau0, double tau1, double r) {
  const double a = 1.0 - tau1;
  return 8.0 * tau0 * tau0 * (1.0 + tau0) /
         (3.0 * n_const(tau0, tau1, r) * a * a * a * ShiftedTau(tau0, tau1, r) *
          (2.0 * std::sqrt(r) - r));
}

double lemma2_rhs(double l0, double l1, double tau0, double tau1, double r) {
  CheckSmoothness(l0, l1);
  CheckTau(tau0, tau1, r);
  const double a = 1.0 - tau1;
  const double sr = std::sqrt(r);
  return std::max((l0 * a + l1 * (sr - r + tau0)) / (a * (2.0 * sr - r)),
                  (l0 * a + l1 * tau0 + l1 * sr) / (sr * a));
}

double lemma4_rhs(double tau0, double tau1, double r) {
  CheckTau(tau0, tau1, r);
  const double a = 1.0 - tau1;
  const double sr = std::sqrt(r);
  return std::max((sr - r + tau0) / ((2.0 * sr - r) * a),
                  (tau0 + sr) / (a * sr));
}

double min_iterations(double l0, double l1, double tau0, double tau1, double r,
                      double dim, double sigma, double batch_size) {
  CheckSmoothness(l0, l1);
  CheckTau(tau0, tau1, r);
  if (!(dim > 0 && sigma > 0 && batch_size > 0)) {
    throw ContractViolation("d, sigma and B must be positive");
  }
  const double a = 1.0 - tau1;
  const double sr = std::sqrt(r);
  const double alpha = alpha_const(tau0, tau1, r);
  const double smooth = l0 + l1 * (tau0 + 1.0);
  const double b2 = batch_size * batch_size;
  const double s2 = sigma * sigma;
  const double k1 = l0 * a + l1 * (sr - r + tau0);
  const double k2 = l0 * a + l1 * tau0 + l1 * sr;
  const double first = 32.0 * b2 * k1 * k1 /
                       (dim * s2 * smooth * (2.0 * sr - r) * (2.0 * sr - r) *
                        a * a * alpha * alpha);
  const double second =
      32.0 * b2 * k2 * k2 / (dim * s2 * smooth * a * a * r * alpha * alpha);
  const double third = 72.0 * l1 * l1 * dim * s2 / (smooth * b2);
  return std::max({first, second, third});
}

double min_samples(double l0, double l1, double tau0, double tau1, double r,
                   double dim, double epsilon, double delta, double c2) {
  CheckSmoothness(l0, l1);
  if (!(c2 > 0.0)) throw ContractViolation("c2 must be positive");
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) || !(dim > 0)) {
    throw ContractViolation("invalid (epsilon, delta, d)");
  }
  const double alpha = alpha_const(tau0, tau1, r);
  return 6.0 * l1 * c2 / (alpha * epsilon) *
         std::sqrt(2.0 * dim * std::log(1.0 / delta) / (l0 + l1 * (tau0 + 1.0)));
}

double theorem2_delta(const BoundInputs& in) {
  in.validate();
  const double a = 1.0 - in.tau1;
  const double smooth = in.l0 + in.l1 * (in.tau0 + 1.0);
  const double b2 = in.batch_size * in.batch_size;
  const double s2 = in.sigma * in.sigma;
  const double noise_term =
      (in.d_f + 1.0) * std::sqrt(in.dim * s2 * smooth / (2.0 * in.steps * b2));
  const double bias_term =
      3.0 * (in.l0 * a + in.l1 * in.tau0) * in.tau0 * in.tau0 /
      (2.0 * in.r * in.r * a * a * a) *
      std::sqrt(smooth * b2 / (2.0 * in.steps * in.dim * s2));
  const double floor_term =
      2.0 * in.tau0 * in.tau0 * (1.0 + in.tau0) /
      (a * a * a * ShiftedTau(in.tau0, in.tau1, in.r) *
       (2.0 * std::sqrt(in.r) - in.r));
  return noise_term + bias_term + floor_term;
}

double theorem2_rhs(const BoundInputs& in) {
  in.validate();
  const double t_min = min_iterations(in.l0, in.l1, in.tau0, in.tau1, in.r,
                                      in.dim, in.sigma, in.batch_size);
  if (in.steps < t_min) {
    throw ContractViolation("theorem2_rhs: T=" + std::to_string(in.steps) +
                            " is below the minimum iteration count " +
                            std::to_string(t_min));
  }
  const double delta = theorem2_delta(in);
  const double m = m_const(in.tau0, in.tau1, in.r);
  const double n = n_const(in.tau0, in.tau1, in.r);
  return std::max(std::sqrt(16.0 * delta / (7.0 * m)), 8.0 * delta / (3.0 * n));
}

AssumptionSampler::AssumptionSampler(RngState rng, double tau0, double tau1,
                                     double max_grad_norm, std::size_t dim)
    : rng_(rng),
      tau0_(tau0),
      tau1_(tau1),
      max_grad_norm_(max_grad_norm),
      dim_(dim) {
  if (!(tau0 >= 0.0) || !(tau1 >= 0.0 && tau1 < 1.0)) {
    throw ContractViolation("AssumptionSampler: invalid (tau0, tau1)");
  }
  if (dim == 0) throw ContractViolation("AssumptionSampler: dim must be > 0");
}

ParamVector AssumptionSampler::RandomDirection() {
  while (true) {
    ParamVector v = gaussian_vector(rng_, dim_, 1.0);
    const double n = norm2(v);
    if (n > 1e-8) {
      scale(1.0 / n, v);
      return v;
    }
  }
}

AssumptionSampler::Draw AssumptionSampler::Around(ParamVector grad_f) {
  const double f_norm = norm2(grad_f);
  // Shrink keeps ||g - grad f|| inside the radius after rounding.
  const double radius = (tau0_ + tau1_ * f_norm) * (1.0 - 1e-12);
  const double u = rng_.next_uniform();
  ParamVector dir;
  double fraction;
  if (u < 0.25 && f_norm > 0.0) {
    // Straight towards the origin: the smallest ||g|| for this grad f.
    dir = scaled(grad_f, -1.0 / f_norm);
    fraction = 1.0;
  } else if (u < 0.5) {
    dir = RandomDirection();
    fraction = 1.0;
  } else {
    dir = RandomDirection();
    fraction = rng_.next_uniform();
  }
  ParamVector g = grad_f;
  axpy(radius * fraction, dir, g);
  return {std::move(grad_f), std::move(g)};
}

AssumptionSampler::Draw AssumptionSampler::next() {
  const double u = rng_.next_uniform();
  double f_norm;
  if (u < 0.5) {
    f_norm = max_grad_norm_ * rng_.next_uniform();
  } else {
    const double lo = std::log(1e-6);
    const double hi = std::log(max_grad_norm_);
    f_norm = std::exp(lo + (hi - lo) * rng_.next_uniform());
  }
  return with_grad_norm(f_norm);
}

AssumptionSampler::Draw AssumptionSampler::with_grad_norm(double grad_norm) {
  return Around(scaled(RandomDirection(), grad_norm));
}

AssumptionSampler::Draw AssumptionSampler::with_sample_norm(double g_norm) {
  const ParamVector dir = RandomDirection();
  const double f_norm = (g_norm + tau0_) / (1.0 - tau1_) * (1.0 - 1e-12);
  return {scaled(dir, f_norm), scaled(dir, g_norm)};
}

std::vector<double> targeted_norms(double tau0, double tau1, double r) {
  return {0.0, std::sqrt(r) - r, 1.0 - r, tau0 / (1.0 - tau1)};
}

VerificationResult verify_lemma2(const BoundInputs& in, std::int64_t trials,
                                 std::uint64_t seed) {
  CheckSmoothness(in.l0, in.l1);
  CheckTau(in.tau0, in.tau1, in.r);
  const ClipStrategy psac = ClipStrategy::psac(in.r);
  return Verify(
      in, trials, seed, lemma2_rhs(in.l0, in.l1, in.tau0, in.tau1, in.r),
      [&](double f_norm, double g_norm) {
        return (in.l0 + in.l1 * f_norm) * weight(psac, g_norm);
      },
      "lemma2");
}

VerificationResult verify_lemma4(const BoundInputs& in, std::int64_t trials,
                                 std::uint64_t seed) {
  CheckTau(in.tau0, in.tau1, in.r);
  const ClipStrategy psac = ClipStrategy::psac(in.r);
  return Verify(
      in, trials, seed, lemma4_rhs(in.tau0, in.tau1, in.r),
      [&](double f_norm, double g_norm) { return weight(psac, g_norm) * f_norm; },
      "lemma4");
}

}  // namespace psac::theory
