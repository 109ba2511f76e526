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

#include "psac/clipping.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "psac/error.h"

namespace psac {

std::string_view to_string(ClipKind kind) {
  switch (kind) {
    case ClipKind::kNone:
      return "none";
    case ClipKind::kConstant:
      return "dpsgd";
    case ClipKind::kAutoV:
      return "autov";
    case ClipKind::kAutoS:
      return "autos";
    case ClipKind::kPsac:
      return "psac";
  }
  return "unknown";
}

ClipKind parse_clip_kind(std::string_view name) {
  if (name == "none") return ClipKind::kNone;
  if (name == "dpsgd" || name == "constant") return ClipKind::kConstant;
  if (name == "autov" || name == "auto_v") return ClipKind::kAutoV;
  if (name == "autos" || name == "auto_s" || name == "nsgd") {
    return ClipKind::kAutoS;
  }
  if (name == "psac") return ClipKind::kPsac;
  throw ContractViolation("unknown clipping method '" + std::string(name) + "'");
}

void ClipStrategy::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ContractViolation("clipping threshold C must be positive");
  }
  if ((kind == ClipKind::kAutoS || kind == ClipKind::kPsac) &&
      !(r > 0.0 && r <= 1.0)) {
    throw ContractViolation("regularizer r must lie in (0, 1]");
  }
}

double weight(const ClipStrategy& strategy, double norm) {
  if (!(norm >= 0.0)) throw ContractViolation("weight: norm must be >= 0");
  const double r = strategy.r;
  switch (strategy.kind) {
    case ClipKind::kNone:
      return 1.0;
    case ClipKind::kConstant:
      return norm == 0.0 ? 1.0 : std::min(strategy.c / norm, 1.0);
    case ClipKind::kAutoV:
      if (norm == 0.0) {
        throw DegenerateInput("auto_v weight is undefined for a zero gradient");
      }
      return 1.0 / norm;
    case ClipKind::kAutoS:
      return 1.0 / (norm + r);
    case ClipKind::kPsac:
      return 1.0 / (norm + r / (norm + r));
  }
  throw UnsupportedStrategy("unknown clipping kind");
}

double clip_factor(const ClipStrategy& strategy, double norm) {
  const double w = weight(strategy, norm);
  switch (strategy.kind) {
    case ClipKind::kNone:
    case ClipKind::kConstant:
      return w;
    default:
      return strategy.c * w;
  }
}

double clip_in_place(const ClipStrategy& strategy, ParamVector& g) {
  const double factor = clip_factor(strategy, norm2(g));
  scale(factor, g);
  return factor;
}

ParamVector clip(const ClipStrategy& strategy, const ParamVector& g) {
  ParamVector out = g;
  clip_in_place(strategy, out);
  return out;
}

double max_weight(const ClipStrategy& strategy) {
  const double r = strategy.r;
  switch (strategy.kind) {
    case ClipKind::kAutoS:
      return 1.0 / r;
    case ClipKind::kPsac:
      return 1.0 / (2.0 * std::sqrt(r) - r);
    default:
      throw UnsupportedStrategy("max_weight is defined for auto_s and psac only, got " +
                                std::string(to_string(strategy.kind)));
  }
}

double psac_argmax_norm(double r) { return std::sqrt(r) - r; }

}  // namespace psac
