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

// The private training loop. One step:
//
//   g_i   = per-sample gradient of each example in the sampled batch
//   s     = sum_i clip(g_i)
//   g_hat = s + N(0, C^2 sigma^2 I)
//   x    <- x - (lr / B) g_hat
//
// B is always the nominal batch size, also under Poisson sampling where the
// realized batch may be larger, smaller or empty. An empty batch still takes
// the noise-only step.

#ifndef PSAC_ENGINE_H_
#define PSAC_ENGINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psac/clipping.h"
#include "psac/data.h"
#include "psac/models.h"
#include "psac/numerics.h"
#include "psac/privacy.h"

namespace psac {

enum class Sampling { kPoisson, kWithReplacement };

std::string_view to_string(Sampling sampling);
Sampling parse_sampling(std::string_view name);

struct TrainConfig {
  int batch_size = 100;
  std::int64_t steps = 100;
  double learning_rate = 0.5;
  ClipStrategy strategy;
  // Absent for a non-private baseline (sigma = 0).
  std::optional<PrivacySpec> privacy;
  Sampling sampling = Sampling::kPoisson;
  std::uint64_t seed = 0;
  // Evaluate every this many steps; 0 evaluates only at start and end.
  std::int64_t eval_every = 0;
  // Workers for per-sample gradients; results do not depend on it.
  unsigned threads = 1;

  double sigma() const { return privacy ? privacy->sigma : 0.0; }

  // Throws ContractViolation for an inconsistent config; `dataset_size` is
  // used to check q = B / N when privacy is set.
  void validate(std::size_t dataset_size) const;
};

struct GradNormStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct StepRecord {
  std::int64_t step = 0;
  std::size_t batch_size = 0;  // realized
  double mean_loss = 0.0;
  GradNormStats grad_norms;
  double update_norm = 0.0;
};

struct EvalRecord {
  std::int64_t step = 0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  Evaluation final_eval;
  std::optional<double> realized_epsilon;
  double sigma = 0.0;
  ParamVector final_params;
};

// Indices of one sampled batch. with_replacement draws exactly `batch_size`
// uniform indices; poisson includes each index independently with
// probability min(1, batch_size / n).
std::vector<std::size_t> sample_batch(std::size_t n, Sampling mode,
                                      int batch_size, RngState& rng);

std::vector<Example> sample_batch(std::span<const Example> dataset,
                                  Sampling mode, int batch_size, RngState& rng);

struct StepResult {
  StepRecord record;
  // Raw (unclipped) per-sample gradients of the batch, in batch order.
  std::vector<PerSampleGradient> grads;
  // Sum of clipped gradients before noise.
  ParamVector clipped_sum;
  ParamVector noise;
};

// One update of `params` in place. Noise std is strategy.c * sigma.
StepResult private_step(const ModelSpec& spec, ParamVector& params,
                        std::span<const Example> batch,
                        const ClipStrategy& strategy, double sigma,
                        double learning_rate, int nominal_batch_size,
                        RngState& noise_rng, unsigned threads = 1);

// Called after every step with the parameters the gradients were taken at.
using StepObserver = std::function<void(std::int64_t step,
                                        const ParamVector& params_before,
                                        const StepResult& result)>;

// Runs config.steps private steps from init_params(seed). Evaluates on
// `eval_set` when given, otherwise on `train`. Throws DivergedRun if the
// parameters become non-finite.
TrainReport run_training(const ModelSpec& spec, const Dataset& train,
                         const TrainConfig& config,
                         const Dataset* eval_set = nullptr,
                         const StepObserver& observer = {});

// Constant learning rate sqrt(2 B^2 / (d sigma^2 T (L0 + L1 (tau0 + 1)))).
double theoretical_lr(double batch_size, double dim, double sigma, double steps,
                      double l0, double l1, double tau0);

}  // namespace psac

#endif  // PSAC_ENGINE_H_
