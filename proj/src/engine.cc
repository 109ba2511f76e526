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

#include "psac/engine.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "psac/error.h"

namespace psac {
namespace {

GradNormStats NormStats(std::vector<double> norms) {
  if (norms.empty()) return {};
  std::sort(norms.begin(), norms.end());
  const std::size_t n = norms.size();
  const double median =
      n % 2 == 1 ? norms[n / 2] : 0.5 * (norms[n / 2 - 1] + norms[n / 2]);
  return {norms.front(), median, norms.back()};
}

}  // namespace

std::string_view to_string(Sampling sampling) {
  return sampling == Sampling::kPoisson ? "poisson" : "with_replacement";
}

Sampling parse_sampling(std::string_view name) {
  if (name == "poisson") return Sampling::kPoisson;
  if (name == "with_replacement" || name == "replacement") {
    return Sampling::kWithReplacement;
  }
  throw ContractViolation("unknown sampling mode '" + std::string(name) + "'");
}

void TrainConfig::validate(std::size_t dataset_size) const {
  if (batch_size <= 0) throw ContractViolation("batch size must be positive");
  if (steps < 0) throw ContractViolation("step count must be nonnegative");
  if (!(learning_rate > 0.0)) {
    throw ContractViolation("learning rate must be positive");
  }
  if (eval_every < 0) throw ContractViolation("eval_every must be >= 0");
  strategy.validate();
  if (privacy) {
    if (!strategy.bounded()) {
      throw ContractViolation(
          "private training needs a clipping strategy with bounded sensitivity");
    }
    if (!(privacy->sigma > 0.0)) {
      throw ContractViolation("private training needs sigma > 0");
    }
    const double q =
        std::min(1.0, static_cast<double>(batch_size) / dataset_size);
    if (std::abs(privacy->q - q) > 1e-12 * q) {
      throw ContractViolation("privacy q=" + std::to_string(privacy->q) +
                              " does not match B/N=" + std::to_string(q));
    }
  }
}

std::vector<std::size_t> sample_batch(std::size_t n, Sampling mode,
                                      int batch_size, RngState& rng) {
  if (n == 0) throw ContractViolation("sample_batch: empty dataset");
  std::vector<std::size_t> idx;
  if (mode == Sampling::kWithReplacement) {
    idx.reserve(batch_size);
    for (int i = 0; i < batch_size; ++i) idx.push_back(rng.uniform_index(n));
    return idx;
  }
  const double q = std::min(1.0, static_cast<double>(batch_size) / n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(q)) idx.push_back(i);
  }
  return idx;
}

std::vector<Example> sample_batch(std::span<const Example> dataset,
                                  Sampling mode, int batch_size,
                                  RngState& rng) {
  std::vector<Example> out;
  for (std::size_t i : sample_batch(dataset.size(), mode, batch_size, rng)) {
    out.push_back(dataset[i]);
  }
  return out;
}

StepResult private_step(const ModelSpec& spec, ParamVector& params,
                        std::span<const Example> batch,
                        const ClipStrategy& strategy, double sigma,
                        double learning_rate, int nominal_batch_size,
                        RngState& noise_rng, unsigned threads) {
  if (!(sigma >= 0.0)) throw ContractViolation("sigma must be nonnegative");
  if (nominal_batch_size <= 0) {
    throw ContractViolation("nominal batch size must be positive");
  }
  StepResult result;
  result.record.batch_size = batch.size();
  result.clipped_sum = ParamVector(params.dim());
  if (!batch.empty()) {
    result.grads = batch_per_sample_grads(spec, params, batch, threads);
    std::vector<double> norms;
    norms.reserve(batch.size());
    double loss_sum = 0.0;
    // Fixed-order reduction over the batch.
    for (const PerSampleGradient& g : result.grads) {
      const double n = norm2(g.grad);
      norms.push_back(n);
      loss_sum += g.loss;
      axpy(clip_factor(strategy, n), g.grad, result.clipped_sum);
    }
    result.record.mean_loss = loss_sum / batch.size();
    result.record.grad_norms = NormStats(std::move(norms));
  }
  result.noise = gaussian_vector(noise_rng, params.dim(), strategy.c * sigma);
  ParamVector noisy = result.clipped_sum;
  axpy(1.0, result.noise, noisy);
  const double step_scale = learning_rate / nominal_batch_size;
  result.record.update_norm = step_scale * norm2(noisy);
  axpy(-step_scale, noisy, params);
  return result;
}

TrainReport run_training(const ModelSpec& spec, const Dataset& train,
                         const TrainConfig& config, const Dataset* eval_set,
                         const StepObserver& observer) {
  spec.validate();
  train.validate();
  config.validate(train.size());
  if (train.input_dim != spec.input_dim) {
    throw ContractViolation("dataset input_dim does not match the model");
  }
  const Dataset& eval_data = eval_set ? *eval_set : train;

  RngState init_rng(config.seed, Stream::kInit);
  RngState batch_rng(config.seed, Stream::kBatch);
  RngState noise_rng(config.seed, Stream::kNoise);

  TrainReport report;
  report.sigma = config.sigma();
  ParamVector params = init_params(spec, init_rng);

  auto record_eval = [&](std::int64_t step) {
    const Evaluation e = evaluate(spec, params, eval_data.view());
    report.evals.push_back({step, e.accuracy, e.mean_loss});
    return e;
  };
  report.final_eval = record_eval(0);

  report.steps.reserve(config.steps);
  for (std::int64_t t = 0; t < config.steps; ++t) {
    std::vector<Example> batch = sample_batch(
        train.view(), config.sampling, config.batch_size, batch_rng);
    ParamVector before = observer ? params : ParamVector();
    StepResult result =
        private_step(spec, params, batch, config.strategy, report.sigma,
                     config.learning_rate, config.batch_size, noise_rng,
                     config.threads);
    result.record.step = t;
    if (!params.all_finite()) {
      throw DivergedRun("parameters became non-finite at step " +
                            std::to_string(t),
                        t);
    }
    report.steps.push_back(result.record);
    if (observer) observer(t, before, result);
    const std::int64_t done = t + 1;
    if (config.eval_every > 0 && done % config.eval_every == 0 &&
        done != config.steps) {
      record_eval(done);
    }
  }
  if (config.steps > 0) report.final_eval = record_eval(config.steps);

  if (config.privacy) {
    report.realized_epsilon =
        config.steps > 0
            ? epsilon_for(config.privacy->q, config.privacy->sigma,
                          config.steps, config.privacy->delta)
                  .epsilon
            : 0.0;
  }
  report.final_params = std::move(params);
  return report;
}

double theoretical_lr(double batch_size, double dim, double sigma, double steps,
                      double l0, double l1, double tau0) {
  if (!(batch_size > 0 && dim > 0 && sigma > 0 && steps > 0 && l0 > 0 &&
        l1 >= 0 && tau0 > 0)) {
    throw ContractViolation("theoretical_lr: inputs must be positive");
  }
  return std::sqrt(2.0 * batch_size * batch_size /
                   (dim * sigma * sigma * steps * (l0 + l1 * (tau0 + 1.0))));
}

}  // namespace psac
