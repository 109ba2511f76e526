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

// Renyi-DP accounting for the Poisson-subsampled Gaussian mechanism and
// noise calibration for a target (epsilon, delta).
//
// For sampling rate q and noise multiplier sigma, the per-step RDP at order
// alpha is log(A_alpha) / (alpha - 1) with
//
//   A_alpha = E_{z ~ N(0, sigma^2)} [ ((1 - q) + q exp((2z - 1) / (2 sigma^2)))^alpha ].
//
// Integer orders use the exact binomial expansion; fractional orders use the
// two-sided erfc series of Mironov, Talwar and Zhang (2019). Both are summed
// in log space. Accounting assumes Poisson sampling regardless of how the
// engine actually draws batches; the clipping strategy never enters because
// every bounded strategy has sensitivity C.

#ifndef PSAC_PRIVACY_H_
#define PSAC_PRIVACY_H_

#include <cstdint>
#include <span>
#include <vector>

namespace psac {

// {1.25, 1.5, ..., 63.5} followed by the integers {64, ..., 512}.
const std::vector<double>& default_orders();

struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> values;  // per-step RDP at each order
};

// Per-step RDP of the subsampled Gaussian at a single order.
double rdp_subsampled_gaussian(double q, double sigma, double order);

RdpCurve rdp_per_step(double q, double sigma,
                      std::span<const double> orders = default_orders());

struct EpsilonResult {
  double epsilon = 0.0;
  double best_order = 0.0;
};

// min over orders of T * rdp(alpha) + log(1/delta) / (alpha - 1).
EpsilonResult compose_and_convert(const RdpCurve& curve, std::int64_t steps,
                                  double delta);

EpsilonResult epsilon_for(double q, double sigma, std::int64_t steps,
                          double delta);

inline constexpr double kSigmaBracketLow = 0.3;
inline constexpr double kSigmaBracketHigh = 1e4;

// Smallest sigma (to relative tolerance `rel_tol`) in the bracket
// [0.3, 1e4] whose composed epsilon is at most `epsilon`. Returns the lower
// bracket end when even that is private enough. Throws CalibrationFailure if
// the upper end is not.
double calibrate_sigma(double q, std::int64_t steps, double epsilon,
                       double delta, double rel_tol = 1e-4);

struct PrivacySpec {
  double epsilon = 3.0;
  double delta = 1e-5;
  double q = 0.0;
  std::int64_t steps = 0;
  double sigma = 0.0;

  // Calibrates sigma for the given budget.
  static PrivacySpec calibrated(double epsilon, double delta, double q,
                                std::int64_t steps);

  // Epsilon actually spent by (q, sigma, steps) at this delta.
  EpsilonResult realized() const;
};

}  // namespace psac

#endif  // PSAC_PRIVACY_H_
