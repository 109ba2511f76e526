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

// Small models with exact per-sample gradients.
//
// Parameter layouts (all row-major, bias last in each row):
//   logistic, 2 classes:  [w_0 .. w_{D-1}, b]                       d = D + 1
//   logistic, K > 2:      K rows of [w_k0 .. w_k,D-1, b_k]          d = K(D + 1)
//   mlp (tanh hidden):    H rows of [W1_h0 .. W1_h,D-1, b1_h], then
//                         K rows of [W2_k0 .. W2_k,H-1, b2_k]
//                                                   d = H(D + 1) + K(H + 1)
//
// Binary logistic regression uses labels {0, 1}; -1 is accepted as an alias
// for class 0. Internally y = +1 for class 1 and y = -1 for class 0, and the
// loss is log(1 + exp(-y z)). A score of exactly 0 predicts class 0.

#ifndef PSAC_MODELS_H_
#define PSAC_MODELS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psac/numerics.h"

namespace psac {

struct Example {
  ParamVector features;
  int label = 0;
};

enum class ModelKind { kLogisticRegression, kMlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  int input_dim = 1;
  int hidden_dim = 0;
  int num_classes = 2;

  static ModelSpec logistic(int input_dim, int num_classes = 2);
  static ModelSpec mlp(int input_dim, int hidden_dim, int num_classes);

  std::size_t param_dim() const;

  // Throws ContractViolation on inconsistent dimensions.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct PerSampleGradient {
  ParamVector grad;
  double loss = 0.0;
  std::size_t sample_index = 0;
};

double loss(const ModelSpec& spec, const ParamVector& params,
            const Example& example);

PerSampleGradient per_sample_grad(const ModelSpec& spec,
                                  const ParamVector& params,
                                  const Example& example,
                                  std::size_t sample_index = 0);

// Element i is per_sample_grad(batch[i]). Work is split across `threads`
// workers (0 = hardware concurrency); output is independent of the count.
std::vector<PerSampleGradient> batch_per_sample_grads(
    const ModelSpec& spec, const ParamVector& params,
    std::span<const Example> batch, unsigned threads = 1);

// Predicted class index; ties go to the smallest index.
int predict(const ModelSpec& spec, const ParamVector& params,
            const ParamVector& features);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

Evaluation evaluate(const ModelSpec& spec, const ParamVector& params,
                    std::span<const Example> dataset);

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
ParamVector init_params(const ModelSpec& spec, RngState& rng);

// Per-sample gradient of the scalar model loss log(1 + exp(-y(theta + x))),
// y in {-1, +1}, with respect to theta.
double scalar_logistic_grad(double theta, double x, double y);

}  // namespace psac

#endif  // PSAC_MODELS_H_
