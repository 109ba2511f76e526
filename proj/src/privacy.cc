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

#include "psac/privacy.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "psac/error.h"

namespace psac {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)) for a >= b.
double LogSub(double a, double b) {
  if (b == kNegInf) return a;
  if (a == b) return kNegInf;
  if (a < b) throw ContractViolation("LogSub: result would be negative");
  return a + std::log(-std::expm1(b - a));
}

// log(erfc(x)), accurate where erfc underflows.
double LogErfc(double x) {
  if (x < 20.0) return std::log(std::erfc(x));
  // Asymptotic expansion erfc(x) ~ exp(-x^2)/(x sqrt(pi)) (1 - 1/(2x^2) + ...).
  const double inv2 = 1.0 / (x * x);
  const double series =
      1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2 +
      6.5625 * inv2 * inv2 * inv2 * inv2;
  return -x * x - std::log(x) - 0.5 * std::log(std::numbers::pi) +
         std::log(series);
}

// log A_alpha for integer alpha via the binomial expansion.
double LogAInteger(double q, double sigma, long alpha) {
  double log_a = kNegInf;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double two_s2 = 2.0 * sigma * sigma;
  for (long i = 0; i <= alpha; ++i) {
    const double log_binom = std::lgamma(alpha + 1.0) - std::lgamma(i + 1.0) -
                             std::lgamma(alpha - i + 1.0);
    const double term = log_binom + i * log_q + (alpha - i) * log_1mq +
                        static_cast<double>(i * i - i) / two_s2;
    log_a = LogAdd(log_a, term);
  }
  return log_a;
}

// log A_alpha for fractional alpha: split the integral at the point z0 where
// the two mixture components cross and expand each side as a generalized
// binomial series, each term an erfc tail.
double LogAFractional(double q, double sigma, double alpha) {
  double log_a0 = kNegInf;
  double log_a1 = kNegInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double two_s2 = 2.0 * sigma * sigma;
  const double sqrt2_sigma = std::sqrt(2.0) * sigma;

  double log_abs_coef = 0.0;  // log |binom(alpha, i)|
  bool coef_positive = true;
  constexpr int kMaxTerms = 100000;
  for (int i = 0; i < kMaxTerms; ++i) {
    const double j = alpha - i;
    const double log_t0 = log_abs_coef + i * log_q + j * log_1mq;
    const double log_t1 = log_abs_coef + j * log_q + i * log_1mq;
    const double log_e0 = std::log(0.5) + LogErfc((i - z0) / sqrt2_sigma);
    const double log_e1 = std::log(0.5) + LogErfc((z0 - j) / sqrt2_sigma);
    const double log_s0 = log_t0 + (static_cast<double>(i) * i - i) / two_s2 + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / two_s2 + log_e1;
    if (coef_positive) {
      log_a0 = LogAdd(log_a0, log_s0);
      log_a1 = LogAdd(log_a1, log_s1);
    } else {
      log_a0 = LogSub(log_a0, log_s0);
      log_a1 = LogSub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0) break;
    // binom(alpha, i + 1) = binom(alpha, i) * (alpha - i) / (i + 1)
    const double ratio = (alpha - i) / (i + 1.0);
    if (ratio == 0.0) break;
    log_abs_coef += std::log(std::abs(ratio));
    if (ratio < 0.0) coef_positive = !coef_positive;
  }
  return LogAdd(log_a0, log_a1);
}

void CheckMechanism(double q, double sigma) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw ContractViolation("sampling rate q must lie in (0, 1]");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ContractViolation("noise multiplier sigma must be positive");
  }
}

}  // namespace

const std::vector<double>& default_orders() {
  static const std::vector<double> kOrders = [] {
    std::vector<double> orders;
    for (int k = 5; k <= 254; ++k) orders.push_back(0.25 * k);  // 1.25..63.5
    for (int a = 64; a <= 512; ++a) orders.push_back(a);
    return orders;
  }();
  return kOrders;
}

double rdp_subsampled_gaussian(double q, double sigma, double order) {
  CheckMechanism(q, sigma);
  if (!(order > 1.0)) throw ContractViolation("RDP order must exceed 1");
  if (q == 1.0) return order / (2.0 * sigma * sigma);
  const double log_a = order == std::floor(order)
                           ? LogAInteger(q, sigma, static_cast<long>(order))
                           : LogAFractional(q, sigma, order);
  // Cancellation in the series can push a true zero slightly negative.
  return std::max(log_a, 0.0) / (order - 1.0);
}

RdpCurve rdp_per_step(double q, double sigma, std::span<const double> orders) {
  CheckMechanism(q, sigma);
  RdpCurve curve;
  curve.orders.assign(orders.begin(), orders.end());
  curve.values.reserve(orders.size());
  for (double order : orders) {
    curve.values.push_back(rdp_subsampled_gaussian(q, sigma, order));
  }
  return curve;
}

EpsilonResult compose_and_convert(const RdpCurve& curve, std::int64_t steps,
                                  double delta) {
  if (curve.orders.empty() || curve.orders.size() != curve.values.size()) {
    throw ContractViolation("compose_and_convert: empty or malformed curve");
  }
  if (steps < 1) throw ContractViolation("compose_and_convert: steps must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ContractViolation("compose_and_convert: delta must lie in (0, 1)");
  }
  const double log_inv_delta = std::log(1.0 / delta);
  EpsilonResult best{std::numeric_limits<double>::infinity(), curve.orders[0]};
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const double alpha = curve.orders[i];
    const double eps = static_cast<double>(steps) * curve.values[i] +
                       log_inv_delta / (alpha - 1.0);
    if (eps < best.epsilon) best = {eps, alpha};
  }
  return best;
}

EpsilonResult epsilon_for(double q, double sigma, std::int64_t steps,
                          double delta) {
  return compose_and_convert(rdp_per_step(q, sigma), steps, delta);
}

double calibrate_sigma(double q, std::int64_t steps, double epsilon,
                       double delta, double rel_tol) {
  if (!(epsilon > 0.0)) throw ContractViolation("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ContractViolation("delta must lie in (0, 1)");
  }
  if (steps < 1) throw ContractViolation("steps must be >= 1");
  CheckMechanism(q, 1.0);

  auto feasible = [&](double sigma) {
    return epsilon_for(q, sigma, steps, delta).epsilon <= epsilon;
  };
  double lo = kSigmaBracketLow;
  double hi = kSigmaBracketHigh;
  if (!feasible(hi)) {
    std::ostringstream msg;
    msg << "cannot reach epsilon=" << epsilon << " at delta=" << delta
        << " with q=" << q << ", steps=" << steps << ": sigma=" << hi
        << " still spends epsilon="
        << epsilon_for(q, hi, steps, delta).epsilon;
    throw CalibrationFailure(msg.str());
  }
  if (feasible(lo)) return lo;
  while (hi - lo > rel_tol * hi) {
    const double mid = std::sqrt(lo * hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

PrivacySpec PrivacySpec::calibrated(double epsilon, double delta, double q,
                                    std::int64_t steps) {
  PrivacySpec spec{epsilon, delta, q, steps, 0.0};
  spec.sigma = calibrate_sigma(q, steps, epsilon, delta);
  return spec;
}

EpsilonResult PrivacySpec::realized() const {
  return epsilon_for(q, sigma, steps, delta);
}

}  // namespace psac
