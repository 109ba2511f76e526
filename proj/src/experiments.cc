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

#include "psac/experiments.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "psac/error.h"
#include "psac/parallel.h"

namespace psac::experiments {
namespace {

std::vector<ParamVector> RawGrads(const StepResult& result) {
  std::vector<ParamVector> out;
  out.reserve(result.grads.size());
  for (const PerSampleGradient& g : result.grads) out.push_back(g.grad);
  return out;
}

ParamVector Sum(std::span<const ParamVector> grads) {
  ParamVector total(grads.front().dim());
  for (const ParamVector& g : grads) axpy(1.0, g, total);
  return total;
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double FractionAbove(std::span<const double> v, double threshold) {
  if (v.empty()) return 0.0;
  const auto n = std::count_if(v.begin(), v.end(),
                               [&](double x) { return x > threshold; });
  return static_cast<double>(n) / static_cast<double>(v.size());
}

}  // namespace

std::vector<QuartileCosine> quartile_cosines(std::span<const ParamVector> grads,
                                             std::int64_t step) {
  if (grads.empty()) return {};
  ParamVector mean = Sum(grads);
  scale(1.0 / static_cast<double>(grads.size()), mean);

  const std::size_t n = grads.size();
  std::vector<double> norms(n);
  std::vector<double> cosines(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = norm2(grads[i]);
    cosines[i] = cosine_similarity(grads[i], mean).value;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });

  const int buckets = n < 4 ? 1 : 4;
  std::vector<QuartileCosine> out;
  for (int q = 0; q < buckets; ++q) {
    const std::size_t begin = q * n / buckets;
    const std::size_t end = (q + 1) * n / buckets;
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) sum += cosines[order[k]];
    out.push_back({step, q + 1, sum / static_cast<double>(end - begin),
                   end - begin});
  }
  return out;
}

CosineProfile cosine_profile(const ModelSpec& spec, const Dataset& train,
                             const TrainConfig& config, std::int64_t every_k) {
  if (every_k < 1) throw ContractViolation("every_k must be >= 1");
  CosineProfile profile;
  run_training(spec, train, config, nullptr,
               [&](std::int64_t step, const ParamVector&, const StepResult& r) {
                 if (step % every_k != 0 || r.grads.empty()) return;
                 const auto grads = RawGrads(r);
                 if (grads.size() < 4) profile.single_bucket_steps.push_back(step);
                 for (const QuartileCosine& q : quartile_cosines(grads, step)) {
                   profile.records.push_back(q);
                 }
               });
  return profile;
}

double top_beats_bottom_fraction(const CosineProfile& profile,
                                 std::int64_t warmup) {
  std::int64_t measured = 0;
  std::int64_t wins = 0;
  for (std::size_t i = 0; i < profile.records.size();) {
    const std::int64_t step = profile.records[i].step;
    std::size_t j = i;
    while (j < profile.records.size() && profile.records[j].step == step) ++j;
    if (step >= warmup) {
      ++measured;
      if (j - i == 4 && profile.records[i + 3].mean_cosine >
                            profile.records[i].mean_cosine) {
        ++wins;
      }
    }
    i = j;
  }
  return measured == 0 ? 0.0 : static_cast<double>(wins) / measured;
}

double weighted_cosine(std::span<const ParamVector> grads,
                       const ClipStrategy& strategy) {
  if (grads.empty()) throw ContractViolation("weighted_cosine: empty batch");
  ParamVector weighted(grads.front().dim());
  for (const ParamVector& g : grads) {
    axpy(clip_factor(strategy, norm2(g)), g, weighted);
  }
  return cosine_similarity(weighted, Sum(grads)).value;
}

void Histogram::add(double value) {
  if (value < lo) {
    ++below;
    return;
  }
  if (value > hi) {
    ++above;
    return;
  }
  const auto bins = static_cast<std::int64_t>(counts.size());
  auto bin = static_cast<std::int64_t>((value - lo) / (hi - lo) * bins);
  ++counts[std::clamp<std::int64_t>(bin, 0, bins - 1)];
}

std::int64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), below + above);
}

HistogramComparison weighted_cosine_histogram(const ModelSpec& spec,
                                              const Dataset& train,
                                              const TrainConfig& driver,
                                              const ClipStrategy& strategy_a,
                                              const ClipStrategy& strategy_b,
                                              const HistogramOptions& options) {
  if (options.runs < 1 || options.every_k < 1 || options.bins < 1 ||
      !(options.lo < options.hi)) {
    throw ContractViolation("invalid histogram options");
  }
  strategy_a.validate();
  strategy_b.validate();
  HistogramComparison out;
  for (Histogram* h : {&out.a, &out.b}) {
    h->lo = options.lo;
    h->hi = options.hi;
    h->counts.assign(options.bins, 0);
  }
  for (int run = 0; run < options.runs; ++run) {
    TrainConfig config = driver;
    config.seed = derive_seed(driver.seed, static_cast<std::uint64_t>(run));
    run_training(spec, train, config, nullptr,
                 [&](std::int64_t step, const ParamVector&, const StepResult& r) {
                   if (step % options.every_k != 0 || r.grads.empty()) return;
                   const auto grads = RawGrads(r);
                   out.values_a.push_back(weighted_cosine(grads, strategy_a));
                   out.values_b.push_back(weighted_cosine(grads, strategy_b));
                 });
  }
  for (double v : out.values_a) out.a.add(v);
  for (double v : out.values_b) out.b.add(v);
  std::vector<double> pooled = out.values_a;
  pooled.insert(pooled.end(), out.values_b.begin(), out.values_b.end());
  out.pooled_median = Median(std::move(pooled));
  out.mass_above_a = FractionAbove(out.values_a, out.pooled_median);
  out.mass_above_b = FractionAbove(out.values_b, out.pooled_median);
  return out;
}

WeightTable weight_curve(std::span<const ClipStrategy> strategies,
                         std::span<const double> norm_grid) {
  for (std::size_t i = 0; i < norm_grid.size(); ++i) {
    if (!(norm_grid[i] >= 0.0) || (i > 0 && norm_grid[i] < norm_grid[i - 1])) {
      throw ContractViolation("norm grid must be nonnegative and ascending");
    }
  }
  WeightTable table;
  table.norms.assign(norm_grid.begin(), norm_grid.end());
  for (const ClipStrategy& s : strategies) {
    s.validate();
    std::string label(to_string(s.kind));
    if (s.kind == ClipKind::kConstant) {
      label += "_c" + std::to_string(s.c);
    } else if (s.kind == ClipKind::kAutoS || s.kind == ClipKind::kPsac) {
      label += "_r" + std::to_string(s.r);
    }
    table.labels.push_back(std::move(label));
    std::vector<double> row;
    row.reserve(norm_grid.size());
    for (double n : norm_grid) {
      // auto_v is undefined at 0; report infinity there.
      row.push_back(s.kind == ClipKind::kAutoV && n == 0.0
                        ? std::numeric_limits<double>::infinity()
                        : weight(s, n));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw ContractViolation("linspace needs at least one point");
  if (points == 1) return {lo};
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  out.back() = hi;
  return out;
}

LazyRegionCurve lazy_region(std::span<const double> theta_grid,
                            const LazyRegionOptions& options) {
  if (options.n_per_class < 1) throw ContractViolation("n_per_class must be >= 1");
  for (std::size_t i = 1; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > theta_grid[i - 1])) {
      throw ContractViolation("theta grid must be strictly ascending");
    }
  }
  const Dataset data = gen_synthetic(SyntheticKind::kTwoGaussian1d,
                                     options.n_per_class, 1, 0.0, options.seed);
  const ClipStrategy dp_sgd = ClipStrategy::constant(options.c);
  const ClipStrategy auto_s = ClipStrategy::auto_s(options.r);
  const ClipStrategy psac = ClipStrategy::psac(options.r);
  const double n = static_cast<double>(data.size());

  LazyRegionCurve curve;
  curve.theta.assign(theta_grid.begin(), theta_grid.end());
  for (double theta : theta_grid) {
    double raw = 0.0, raw_sq = 0.0, dp = 0.0, as = 0.0, ps = 0.0;
    for (const Example& ex : data.examples) {
      const double y = ex.label == 1 ? 1.0 : -1.0;
      const double g = scalar_logistic_grad(theta, ex.features[0], y);
      const double s = std::abs(g);
      raw += g;
      raw_sq += g * g;
      dp += clip_factor(dp_sgd, s) * g;
      as += clip_factor(auto_s, s) * g;
      ps += clip_factor(psac, s) * g;
    }
    const double mean = raw / n;
    const double var = n > 1 ? std::max(0.0, (raw_sq - n * mean * mean) / (n - 1))
                             : 0.0;
    curve.sgd_raw.push_back(mean);
    curve.sgd_raw_stderr.push_back(std::sqrt(var / n));
    curve.dp_sgd.push_back(dp / n);
    curve.auto_s.push_back(as / n);
    curve.psac.push_back(ps / n);
  }
  return curve;
}

std::size_t HeatmapGrid::best_row() const {
  std::size_t best = 0;
  double best_acc = -1.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (const HeatmapCell& c : cells[i]) {
      if (c.mean_accuracy > best_acc) {
        best_acc = c.mean_accuracy;
        best = i;
      }
    }
  }
  return best;
}

double HeatmapGrid::row_spread(std::size_t row) const {
  const auto& r = cells.at(row);
  if (r.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(
      r.begin(), r.end(), [](const HeatmapCell& a, const HeatmapCell& b) {
        return a.mean_accuracy < b.mean_accuracy;
      });
  return hi->mean_accuracy - lo->mean_accuracy;
}

ClipStrategy family_strategy(ClipKind family, double param) {
  switch (family) {
    case ClipKind::kConstant:
      return ClipStrategy::constant(param);
    case ClipKind::kAutoS:
      return ClipStrategy::auto_s(param);
    case ClipKind::kPsac:
      return ClipStrategy::psac(param);
    default:
      throw UnsupportedStrategy("sweeps cover dpsgd, autos and psac only");
  }
}

std::uint64_t cell_seed(std::uint64_t seed, double learning_rate, double param) {
  return derive_seed(derive_seed(seed, std::bit_cast<std::uint64_t>(learning_rate)),
                     std::bit_cast<std::uint64_t>(param));
}

HeatmapGrid sweep(const ModelSpec& spec, const Dataset& train,
                  const Dataset* test, const SweepOptions& options) {
  if (options.learning_rates.empty() || options.params.empty() ||
      options.seeds.empty()) {
    throw ContractViolation("sweep grids must be nonempty");
  }
  const std::size_t rows = options.learning_rates.size();
  const std::size_t cols = options.params.size();
  const std::size_t seeds = options.seeds.size();
  const double chance = 1.0 / spec.num_classes;

  std::vector<double> acc(rows * cols * seeds, 0.0);
  std::vector<char> diverged(acc.size(), 0);
  parallel_for(acc.size(), options.threads, [&](std::size_t k) {
    const std::size_t i = k / (cols * seeds);
    const std::size_t j = (k / seeds) % cols;
    const std::size_t s = k % seeds;
    TrainConfig config = options.base;
    config.learning_rate = options.learning_rates[i];
    config.strategy = family_strategy(options.family, options.params[j]);
    config.seed = cell_seed(options.seeds[s], options.learning_rates[i],
                            options.params[j]);
    config.threads = 1;
    try {
      const TrainReport report = run_training(spec, train, config, test);
      acc[k] = report.final_eval.accuracy;
    } catch (const DivergedRun&) {
      acc[k] = chance;
      diverged[k] = 1;
    }
  });

  HeatmapGrid grid;
  grid.family = options.family;
  grid.learning_rates = options.learning_rates;
  grid.params = options.params;
  grid.sigma = options.base.sigma();
  grid.cells.assign(rows, std::vector<HeatmapCell>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      HeatmapCell& cell = grid.cells[i][j];
      double sum = 0.0;
      for (std::size_t s = 0; s < seeds; ++s) {
        const std::size_t k = (i * cols + j) * seeds + s;
        cell.accuracies.push_back(acc[k]);
        cell.diverged = cell.diverged || diverged[k];
        sum += acc[k];
      }
      cell.mean_accuracy = sum / static_cast<double>(seeds);
    }
  }
  return grid;
}

}  // namespace psac::experiments
