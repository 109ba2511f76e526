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

// Per-sample gradient scaling rules.
//
//   kind      weight w(s), s = ||g||          clipped gradient
//   none      1                               g
//   constant  min(C / s, 1)                   w g
//   auto_v    1 / s                           C w g
//   auto_s    1 / (s + r)                     C w g
//   psac      1 / (s + r / (s + r))           C w g
//
// The psac weight equals 1 at s = 0, peaks at s = sqrt(r) - r with value
// 1 / (2 sqrt(r) - r), and approaches 1 / s for large s. Every kind except
// none bounds the clipped norm by C.

#ifndef PSAC_CLIPPING_H_
#define PSAC_CLIPPING_H_

#include <string_view>

#include "psac/numerics.h"

namespace psac {

enum class ClipKind { kNone, kConstant, kAutoV, kAutoS, kPsac };

std::string_view to_string(ClipKind kind);

// Accepts the CLI method names (none, dpsgd, autov, autos, psac) as well as
// the enum spellings (constant, auto_v, auto_s).
ClipKind parse_clip_kind(std::string_view name);

struct ClipStrategy {
  ClipKind kind = ClipKind::kPsac;
  double c = 1.0;
  double r = 0.1;

  static ClipStrategy none() { return {ClipKind::kNone, 1.0, 0.1}; }
  static ClipStrategy constant(double c) { return {ClipKind::kConstant, c, 0.1}; }
  static ClipStrategy auto_v(double c = 1.0) { return {ClipKind::kAutoV, c, 0.1}; }
  static ClipStrategy auto_s(double r, double c = 1.0) {
    return {ClipKind::kAutoS, c, r};
  }
  static ClipStrategy psac(double r, double c = 1.0) {
    return {ClipKind::kPsac, c, r};
  }

  // C > 0 always; 0 < r <= 1 for auto_s and psac.
  void validate() const;

  // Whether the clipped norm is bounded by C.
  bool bounded() const { return kind != ClipKind::kNone; }

  friend bool operator==(const ClipStrategy&, const ClipStrategy&) = default;
};

// Per-sample multiplier w(s). Throws DegenerateInput for auto_v at s == 0.
double weight(const ClipStrategy& strategy, double norm);

// Full factor m with clip(g) = m g, i.e. C w(s) for the normalizing kinds.
double clip_factor(const ClipStrategy& strategy, double norm);

ParamVector clip(const ClipStrategy& strategy, const ParamVector& g);

// In-place variant; returns the factor that was applied.
double clip_in_place(const ClipStrategy& strategy, ParamVector& g);

// sup_s w(s): 1/r for auto_s, 1/(2 sqrt(r) - r) for psac. Throws
// UnsupportedStrategy for the other kinds.
double max_weight(const ClipStrategy& strategy);

// Location of the psac weight maximum, sqrt(r) - r.
double psac_argmax_norm(double r);

}  // namespace psac

#endif  // PSAC_CLIPPING_H_
