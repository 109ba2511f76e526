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

// Diagnostic studies of the clipping rules: per-sample alignment with the
// batch gradient, weighted-average alignment, weight curves, the 1-D lazy
// region simulation and hyperparameter heatmaps. Every result is a
// deterministic function of its inputs and seeds.

#ifndef PSAC_EXPERIMENTS_H_
#define PSAC_EXPERIMENTS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psac/clipping.h"
#include "psac/data.h"
#include "psac/engine.h"
#include "psac/models.h"

namespace psac::experiments {

// ---- Alignment of individual samples ---------------------------------------

struct QuartileCosine {
  std::int64_t step = 0;
  // 1 holds the smallest gradient norms, 4 the largest.
  int quartile = 1;
  double mean_cosine = 0.0;
  std::size_t count = 0;
};

struct CosineProfile {
  std::vector<QuartileCosine> records;
  // Measured steps whose batch had fewer than 4 samples and were reported as
  // a single bucket (quartile 1).
  std::vector<std::int64_t> single_bucket_steps;
};

// Mean cosine between each gradient and the unweighted batch mean, grouped
// by norm quartile. Sorting is by (norm, position), so ties split
// deterministically. Batches of fewer than 4 yield one bucket.
std::vector<QuartileCosine> quartile_cosines(std::span<const ParamVector> grads,
                                             std::int64_t step = 0);

// Trains with `config` and records quartile_cosines every `every_k` steps
// (steps 0, k, 2k, ...). Empty batches are skipped.
CosineProfile cosine_profile(const ModelSpec& spec, const Dataset& train,
                             const TrainConfig& config, std::int64_t every_k);

// Fraction of measured steps at or after `warmup` where the top-quartile
// mean cosine exceeds the bottom-quartile one. Single-bucket steps count as
// failures.
double top_beats_bottom_fraction(const CosineProfile& profile,
                                 std::int64_t warmup);

// ---- Alignment of weighted batch averages ----------------------------------

// cos(sum_i clip_factor(s, g_i) g_i, sum_i g_i). Positive rescaling of the
// strategy's factors leaves it unchanged.
double weighted_cosine(std::span<const ParamVector> grads,
                       const ClipStrategy& strategy);

struct Histogram {
  double lo = 0.5;
  double hi = 1.0;
  std::vector<std::int64_t> counts;
  std::int64_t below = 0;  // values < lo
  std::int64_t above = 0;  // values > hi (rounding only)

  void add(double value);
  std::int64_t total() const;
};

struct HistogramComparison {
  Histogram a;
  Histogram b;
  std::vector<double> values_a;
  std::vector<double> values_b;
  double pooled_median = 0.0;
  // Fraction of each strategy's values strictly above the pooled median.
  double mass_above_a = 0.0;
  double mass_above_b = 0.0;
};

struct HistogramOptions {
  int runs = 5;
  std::int64_t every_k = 10;
  int bins = 50;
  double lo = 0.5;
  double hi = 1.0;
};

// Runs `options.runs` trainings driven by `driver` (seed of run k is
// derive_seed(driver.seed, k)) and, every `every_k` steps, measures both
// strategies on the same batch of raw gradients.
HistogramComparison weighted_cosine_histogram(const ModelSpec& spec,
                                              const Dataset& train,
                                              const TrainConfig& driver,
                                              const ClipStrategy& strategy_a,
                                              const ClipStrategy& strategy_b,
                                              const HistogramOptions& options);

// ---- Weight curves ---------------------------------------------------------

struct WeightTable {
  std::vector<double> norms;
  std::vector<std::string> labels;
  // rows[k][i] = weight(strategies[k], norms[i])
  std::vector<std::vector<double>> rows;
};

// Throws ContractViolation unless the grid is nonnegative and ascending.
WeightTable weight_curve(std::span<const ClipStrategy> strategies,
                         std::span<const double> norm_grid);

// ---- Lazy region -----------------------------------------------------------

struct LazyRegionCurve {
  std::vector<double> theta;
  std::vector<double> sgd_raw;
  // Standard error of the raw mean at each theta.
  std::vector<double> sgd_raw_stderr;
  std::vector<double> dp_sgd;
  std::vector<double> auto_s;
  std::vector<double> psac;
};

struct LazyRegionOptions {
  int n_per_class = 10000;
  double r = 0.01;
  double c = 0.1;
  std::uint64_t seed = 0;
};

// Dataset-averaged clipped gradient of the scalar logistic model on the
// two-Gaussian construction, noise free. Averages, not sums, so curves are
// comparable across n_per_class. Auto-S and psac use unit scale.
LazyRegionCurve lazy_region(std::span<const double> theta_grid,
                            const LazyRegionOptions& options);

// `points` values evenly spaced on [lo, hi] (just lo when points == 1).
std::vector<double> linspace(double lo, double hi, int points);

// ---- Hyperparameter sweeps -------------------------------------------------

struct HeatmapCell {
  double mean_accuracy = 0.0;
  bool diverged = false;  // any seed diverged
  std::vector<double> accuracies;  // per seed, chance level if diverged
};

struct HeatmapGrid {
  ClipKind family = ClipKind::kPsac;
  std::vector<double> learning_rates;  // rows
  std::vector<double> params;          // columns: r, or C for dpsgd
  std::vector<std::vector<HeatmapCell>> cells;
  double sigma = 0.0;

  // Row holding the largest mean accuracy; ties go to the first.
  std::size_t best_row() const;
  // max - min mean accuracy along `row`.
  double row_spread(std::size_t row) const;
};

struct SweepOptions {
  ClipKind family = ClipKind::kPsac;
  std::vector<double> learning_rates;
  std::vector<double> params;
  std::vector<std::uint64_t> seeds;
  // Supplies batch size, steps, sampling and privacy; its strategy,
  // learning rate and seed are replaced per cell.
  TrainConfig base;
  // Concurrent cells; results do not depend on it.
  unsigned threads = 1;
};

// Strategy of `family` at parameter value `param`: C for dpsgd, r otherwise
// (unit scale).
ClipStrategy family_strategy(ClipKind family, double param);

// Seed of one run, derived from the cell's values so reordering the grid
// changes nothing.
std::uint64_t cell_seed(std::uint64_t seed, double learning_rate, double param);

HeatmapGrid sweep(const ModelSpec& spec, const Dataset& train,
                  const Dataset* test, const SweepOptions& options);

}  // namespace psac::experiments

#endif  // PSAC_EXPERIMENTS_H_
