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

// RunConfig: everything needed to reproduce one invocation. Serialized as a
// JSON document with sorted keys, grouped into sections:
//
//   data        source spec ("synthetic:KIND", "csv:PATH", "idx:IMG,LBL"),
//               optional test source, synthetic generator parameters, CSV
//               and IDX options.
//   model       kind ("logistic_regression" | "mlp") and hidden width.
//   train       method, r, clip_c, lr, batch, steps, sampling, seed,
//               eval_every, threads.
//   privacy     epsilon, delta, sigma (0 = calibrate from epsilon).
//   experiment  sweep grids, seeds, diagnostic and lazy-region settings.
//   theory      generalized-smoothness and deviation constants plus the
//               remaining BoundInputs fields and verification settings.
//
// Unknown keys are rejected; missing keys keep their defaults.

#ifndef PSAC_CONFIG_H_
#define PSAC_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "psac/clipping.h"
#include "psac/data.h"
#include "psac/engine.h"
#include "psac/models.h"
#include "psac/theory.h"

namespace psac {

struct DataConfig {
  std::string source = "synthetic:separable_nd";
  // Empty: evaluate on the training set.
  std::string test_source;
  int n_per_class = 1000;
  int dim = 2;
  double margin = 3.0;
  std::uint64_t data_seed = 7;
  int label_column = -1;
  bool csv_header = false;
  bool normalize = true;
  // Keep only the first `limit` examples of a loaded file; 0 keeps all.
  int limit = 0;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct ModelConfig {
  std::string kind = "logistic_regression";
  int hidden = 32;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainSection {
  std::string method = "psac";
  double r = 0.1;
  double clip_c = 1.0;
  double lr = 0.5;
  int batch = 100;
  std::int64_t steps = 500;
  std::string sampling = "poisson";
  std::uint64_t seed = 0;
  std::int64_t eval_every = 0;
  unsigned threads = 1;

  friend bool operator==(const TrainSection&, const TrainSection&) = default;
};

struct PrivacySection {
  double epsilon = 3.0;
  double delta = 1e-5;
  // Fixed noise multiplier; 0 calibrates it from (epsilon, delta, q, steps).
  double sigma = 0.0;

  friend bool operator==(const PrivacySection&, const PrivacySection&) = default;
};

struct ExperimentSection {
  // sweep
  std::string family = "psac";
  std::vector<double> lr_grid = {0.1, 0.5, 2.0};
  std::vector<double> param_grid = {0.001, 0.01, 0.1, 1.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  // diagnose
  std::int64_t every_k = 10;
  int runs = 5;
  int bins = 50;
  double hist_lo = 0.5;
  double hist_hi = 1.0;
  std::string compare_a = "psac";
  std::string compare_b = "autos";
  // lazy-region
  int lazy_n = 10000;
  double lazy_r = 0.01;
  double lazy_c = 0.1;
  double theta_min = -2.0;
  double theta_max = 2.0;
  int theta_points = 81;

  friend bool operator==(const ExperimentSection&,
                         const ExperimentSection&) = default;
};

struct TheorySection {
  double l0 = 1.0;
  double l1 = 1.0;
  double tau0 = 1.0;
  double tau1 = 0.5;
  double r = 0.1;
  double dim = 1e4;
  double sigma = 1.0;
  double batch = 256;
  double steps = 1e6;
  double num_samples = 6e4;
  double d_f = 1.0;
  double c2 = 1.0;
  std::string verify;  // "", "lemma2", "lemma4" or "all"
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;

  friend bool operator==(const TheorySection&, const TheorySection&) = default;
};

struct RunConfig {
  DataConfig data;
  ModelConfig model;
  TrainSection train;
  PrivacySection privacy;
  ExperimentSection experiment;
  TheorySection theory;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Pretty-printed JSON, sorted keys, trailing newline.
std::string to_json(const RunConfig& config);
// Single-line form used inside JSON-lines and CSV headers.
std::string to_json_line(const RunConfig& config);

// Accepts a bare RunConfig document, a sidecar {"config": {...}, ...}, the
// first line of a JSON-lines stream whose record holds "config", or a CSV
// whose first line is "# config=<json>". Throws ParseError on malformed
// input and ContractViolation on unknown keys or wrong value types.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Validates cross-field constraints (known method/model/sampling names,
// positive sizes, grids nonempty).
void validate(const RunConfig& config);

// Dataset named by `source`, using the generator and parser options of
// `data`. Synthetic test sets draw from a seed derived from data_seed.
Dataset resolve_dataset(const DataConfig& data, std::string_view source,
                        Split split);

ModelSpec resolve_model(const RunConfig& config, const Dataset& train);

// Strategy for `method` with the config's r and clip_c.
ClipStrategy resolve_strategy(std::string_view method, double r, double clip_c);

// TrainConfig for `dataset_size` examples. Private unless the method is
// "none"; sigma is calibrated when privacy.sigma is 0.
TrainConfig resolve_train(const RunConfig& config, std::size_t dataset_size);

// BoundInputs from the theory section and the privacy epsilon/delta.
theory::BoundInputs resolve_bounds(const RunConfig& config);

// git describe of the build, "unknown" outside a checkout.
std::string_view git_describe();

}  // namespace psac

#endif  // PSAC_CONFIG_H_
