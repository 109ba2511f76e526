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

#include "psac/models.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "psac/error.h"
#include "psac/parallel.h"

namespace psac {
namespace {

// log(1 + exp(t)) without overflow.
double Softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double Sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

bool IsBinaryLogistic(const ModelSpec& spec) {
  return spec.kind == ModelKind::kLogisticRegression && spec.num_classes == 2;
}

int ClassIndex(const ModelSpec& spec, int label) {
  if (spec.num_classes == 2 && label == -1) return 0;
  if (label < 0 || label >= spec.num_classes) {
    throw ContractViolation("label " + std::to_string(label) +
                            " outside [0, " + std::to_string(spec.num_classes) +
                            ")");
  }
  return label;
}

void CheckInputs(const ModelSpec& spec, const ParamVector& params,
                 const ParamVector& features) {
  if (params.dim() != spec.param_dim()) {
    throw ContractViolation("params have dimension " +
                            std::to_string(params.dim()) + ", model expects " +
                            std::to_string(spec.param_dim()));
  }
  if (features.dim() != static_cast<std::size_t>(spec.input_dim)) {
    throw ContractViolation("example has " + std::to_string(features.dim()) +
                            " features, model expects " +
                            std::to_string(spec.input_dim));
  }
}

// Row r of a row-major block with `width` weights plus one bias.
std::span<const double> Row(const ParamVector& p, std::size_t offset,
                            std::size_t width, std::size_t r) {
  return p.values().subspan(offset + r * (width + 1), width + 1);
}

double Affine(std::span<const double> row, std::span<const double> x) {
  return dot(row.first(x.size()), x) + row.back();
}

// Softmax cross-entropy. Overwrites `logits` with the class probabilities.
double SoftmaxCrossEntropy(std::vector<double>& logits, int label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  const double target = logits[label] - mx;
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - mx);
    total += z;
  }
  for (double& z : logits) z /= total;
  return std::log(total) - target;
}

// Hidden activations of the MLP.
std::vector<double> Hidden(const ModelSpec& spec, const ParamVector& params,
                           std::span<const double> x) {
  const auto d = static_cast<std::size_t>(spec.input_dim);
  std::vector<double> h(spec.hidden_dim);
  for (std::size_t j = 0; j < h.size(); ++j) {
    h[j] = std::tanh(Affine(Row(params, 0, d, j), x));
  }
  return h;
}

std::vector<double> Logits(const ModelSpec& spec, const ParamVector& params,
                           std::span<const double> x,
                           std::vector<double>* hidden_out = nullptr) {
  const auto d = static_cast<std::size_t>(spec.input_dim);
  std::vector<double> logits(spec.num_classes);
  if (spec.kind == ModelKind::kLogisticRegression) {
    for (std::size_t k = 0; k < logits.size(); ++k) {
      logits[k] = Affine(Row(params, 0, d, k), x);
    }
    return logits;
  }
  std::vector<double> h = Hidden(spec, params, x);
  const std::size_t offset = static_cast<std::size_t>(spec.hidden_dim) * (d + 1);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    logits[k] = Affine(Row(params, offset, h.size(), k), h);
  }
  if (hidden_out) *hidden_out = std::move(h);
  return logits;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogisticRegression:
      return "logistic_regression";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "logistic_regression" || name == "logreg" || name == "logistic")
    return ModelKind::kLogisticRegression;
  if (name == "mlp") return ModelKind::kMlp;
  throw ContractViolation("unknown model kind '" + std::string(name) + "'");
}

ModelSpec ModelSpec::logistic(int input_dim, int num_classes) {
  ModelSpec spec{ModelKind::kLogisticRegression, input_dim, 0, num_classes};
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::mlp(int input_dim, int hidden_dim, int num_classes) {
  ModelSpec spec{ModelKind::kMlp, input_dim, hidden_dim, num_classes};
  spec.validate();
  return spec;
}

std::size_t ModelSpec::param_dim() const {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto h = static_cast<std::size_t>(hidden_dim);
  const auto k = static_cast<std::size_t>(num_classes);
  if (kind == ModelKind::kLogisticRegression) {
    return num_classes == 2 ? d + 1 : k * (d + 1);
  }
  return h * (d + 1) + k * (h + 1);
}

void ModelSpec::validate() const {
  if (input_dim <= 0) throw ContractViolation("input_dim must be positive");
  if (num_classes < 2) throw ContractViolation("num_classes must be >= 2");
  if (kind == ModelKind::kLogisticRegression && hidden_dim != 0) {
    throw ContractViolation("logistic regression takes hidden_dim = 0");
  }
  if (kind == ModelKind::kMlp && hidden_dim <= 0) {
    throw ContractViolation("mlp needs hidden_dim > 0");
  }
}

double loss(const ModelSpec& spec, const ParamVector& params,
            const Example& example) {
  CheckInputs(spec, params, example.features);
  const int cls = ClassIndex(spec, example.label);
  const auto x = example.features.values();
  if (IsBinaryLogistic(spec)) {
    const double y = cls == 1 ? 1.0 : -1.0;
    return Softplus(-y * Affine(params.values(), x));
  }
  std::vector<double> logits = Logits(spec, params, x);
  return SoftmaxCrossEntropy(logits, cls);
}

PerSampleGradient per_sample_grad(const ModelSpec& spec,
                                  const ParamVector& params,
                                  const Example& example,
                                  std::size_t sample_index) {
  CheckInputs(spec, params, example.features);
  const int cls = ClassIndex(spec, example.label);
  const auto x = example.features.values();
  const auto d = static_cast<std::size_t>(spec.input_dim);

  PerSampleGradient out{ParamVector(spec.param_dim()), 0.0, sample_index};
  auto grad = out.grad.values();

  if (IsBinaryLogistic(spec)) {
    const double y = cls == 1 ? 1.0 : -1.0;
    const double margin = y * Affine(params.values(), x);
    out.loss = Softplus(-margin);
    const double dz = -y * Sigmoid(-margin);
    axpy(dz, x, grad.first(d));
    grad[d] = dz;
    return out;
  }

  std::vector<double> hidden;
  std::vector<double> probs = Logits(spec, params, x, &hidden);
  out.loss = SoftmaxCrossEntropy(probs, cls);
  std::vector<double>& dz = probs;
  dz[cls] -= 1.0;

  if (spec.kind == ModelKind::kLogisticRegression) {
    for (std::size_t k = 0; k < dz.size(); ++k) {
      auto row = grad.subspan(k * (d + 1), d + 1);
      axpy(dz[k], x, row.first(d));
      row[d] = dz[k];
    }
    return out;
  }

  const std::size_t h = hidden.size();
  const std::size_t offset = h * (d + 1);
  std::vector<double> dpre(h, 0.0);
  for (std::size_t k = 0; k < dz.size(); ++k) {
    auto row = grad.subspan(offset + k * (h + 1), h + 1);
    axpy(dz[k], hidden, row.first(h));
    row[h] = dz[k];
    axpy(dz[k], Row(params, offset, h, k).first(h), dpre);
  }
  for (std::size_t j = 0; j < h; ++j) {
    dpre[j] *= 1.0 - hidden[j] * hidden[j];
    auto row = grad.subspan(j * (d + 1), d + 1);
    axpy(dpre[j], x, row.first(d));
    row[d] = dpre[j];
  }
  return out;
}

std::vector<PerSampleGradient> batch_per_sample_grads(
    const ModelSpec& spec, const ParamVector& params,
    std::span<const Example> batch, unsigned threads) {
  if (batch.empty()) throw ContractViolation("batch must be nonempty");
  std::vector<PerSampleGradient> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    out[i] = per_sample_grad(spec, params, batch[i], i);
  });
  return out;
}

int predict(const ModelSpec& spec, const ParamVector& params,
            const ParamVector& features) {
  CheckInputs(spec, params, features);
  if (IsBinaryLogistic(spec)) {
    return Affine(params.values(), features.values()) > 0.0 ? 1 : 0;
  }
  const std::vector<double> logits = Logits(spec, params, features.values());
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                          logits.begin());
}

Evaluation evaluate(const ModelSpec& spec, const ParamVector& params,
                    std::span<const Example> dataset) {
  if (dataset.empty()) throw ContractViolation("evaluate: empty dataset");
  std::size_t correct = 0;
  double total_loss = 0.0;
  for (const Example& ex : dataset) {
    if (predict(spec, params, ex.features) == ClassIndex(spec, ex.label)) {
      ++correct;
    }
    total_loss += loss(spec, params, ex);
  }
  const auto n = static_cast<double>(dataset.size());
  return {static_cast<double>(correct) / n, total_loss / n};
}

ParamVector init_params(const ModelSpec& spec, RngState& rng) {
  spec.validate();
  ParamVector params(spec.param_dim());
  auto fill = [&](std::size_t begin, std::size_t end, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = begin; i < end; ++i) {
      params[i] = bound * (2.0 * rng.next_uniform() - 1.0);
    }
  };
  if (spec.kind == ModelKind::kLogisticRegression) {
    fill(0, params.dim(), spec.input_dim);
  } else {
    const std::size_t split =
        static_cast<std::size_t>(spec.hidden_dim) * (spec.input_dim + 1);
    fill(0, split, spec.input_dim);
    fill(split, params.dim(), spec.hidden_dim);
  }
  return params;
}

double scalar_logistic_grad(double theta, double x, double y) {
  return -y * (1.0 - Sigmoid(y * (theta + x)));
}

}  // namespace psac
