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

#include "psac/cli.h"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psac/config.h"
#include "psac/engine.h"
#include "psac/error.h"
#include "psac/experiments.h"
#include "psac/privacy.h"
#include "psac/theory.h"

namespace psac {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;
namespace ex = experiments;

// Steps before which the cosine profile is not scored.
constexpr std::int64_t kProfileWarmup = 50;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags bound to RunConfig fields, applied on top of any --config file.
class Overrides {
 public:
  template <typename T, typename Field>
  CLI::Option* option(CLI::App* app, const std::string& name, Field field,
                      const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    if constexpr (std::is_same_v<T, std::vector<double>> ||
                  std::is_same_v<T, std::vector<std::uint64_t>>) {
      opt->delimiter(',');
    }
    fns_.push_back([opt, value, field](RunConfig& c) {
      if (opt->count() > 0) field(c) = *value;
    });
    return opt;
  }

  template <typename Field>
  CLI::Option* flag(CLI::App* app, const std::string& name, Field field,
                    const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(name, *value, help);
    fns_.push_back([opt, value, field](RunConfig& c) {
      if (opt->count() > 0) field(c) = *value;
    });
    return opt;
  }

  void apply(RunConfig& c) const {
    for (const auto& fn : fns_) fn(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> fns_;
};

#define PSAC_FIELD(path) [](RunConfig& c) -> auto& { return c.path; }

std::string Num(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : "nan";
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed for " + path.string());
}

Json ConfigJson(const RunConfig& config) {
  return Json::parse(to_json_line(config));
}

std::string CsvHeader(const RunConfig& config) {
  return "# config=" + to_json_line(config) + "\n";
}

struct Context {
  RunConfig config;
  fs::path out_dir;
  bool timing = false;
  std::chrono::steady_clock::time_point start;
  std::ostream& out;
  std::ostream& err;

  fs::path prepare(const std::string& name) const {
    fs::create_directories(out_dir);
    return out_dir / name;
  }

  // Sidecar metadata. Wall time is opt-in so reruns stay byte-identical.
  void sidecar(const std::string& name, Json extra) const {
    extra["config"] = ConfigJson(config);
    extra["git_describe"] = std::string(git_describe());
    if (timing) {
      extra["wall_time_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
    }
    WriteFile(prepare(name), extra.dump(2) + "\n");
  }
};

std::optional<Dataset> TestSet(const RunConfig& config) {
  if (config.data.test_source.empty()) return std::nullopt;
  return resolve_dataset(config.data, config.data.test_source, Split::kTest);
}

int RunTrain(const Context& ctx) {
  const RunConfig& config = ctx.config;
  const Dataset train = resolve_dataset(config.data, config.data.source, Split::kTrain);
  const std::optional<Dataset> test = TestSet(config);
  const ModelSpec spec = resolve_model(config, train);
  const TrainConfig tc = resolve_train(config, train.size());
  const TrainReport report =
      run_training(spec, train, tc, test ? &*test : nullptr);

  std::string lines;
  lines += Json{{"type", "config"},
                {"config", ConfigJson(config)},
                {"git_describe", std::string(git_describe())}}
               .dump() +
           "\n";
  for (const StepRecord& s : report.steps) {
    lines += Json{{"type", "step"},
                  {"step", s.step},
                  {"batch_size", s.batch_size},
                  {"mean_loss", s.mean_loss},
                  {"grad_norm_min", s.grad_norms.min},
                  {"grad_norm_median", s.grad_norms.median},
                  {"grad_norm_max", s.grad_norms.max},
                  {"update_norm", s.update_norm}}
                 .dump() +
             "\n";
  }
  for (const EvalRecord& e : report.evals) {
    lines += Json{{"type", "eval"},
                  {"step", e.step},
                  {"accuracy", e.accuracy},
                  {"mean_loss", e.mean_loss}}
                 .dump() +
             "\n";
  }
  Json summary{{"type", "summary"},
               {"final_accuracy", report.final_eval.accuracy},
               {"final_loss", report.final_eval.mean_loss},
               {"sigma", report.sigma},
               {"dataset_size", train.size()},
               {"param_dim", spec.param_dim()},
               {"eval_split", test ? "test" : "train"}};
  if (tc.privacy) {
    const EpsilonResult eps = tc.privacy->realized();
    summary["realized_epsilon"] = report.realized_epsilon.value_or(0.0);
    summary["best_order"] = eps.best_order;
    summary["q"] = tc.privacy->q;
  } else {
    summary["realized_epsilon"] = nullptr;
  }
  lines += summary.dump() + "\n";
  WriteFile(ctx.prepare("train.jsonl"), lines);
  ctx.out << summary.dump() << "\n";
  return kExitOk;
}

int RunCalibrate(const Context& ctx, double q) {
  const RunConfig& config = ctx.config;
  if (!(q > 0.0 && q <= 1.0)) throw ContractViolation("--q must lie in (0, 1]");
  const double sigma = calibrate_sigma(q, config.train.steps,
                                       config.privacy.epsilon, config.privacy.delta);
  const EpsilonResult eps =
      epsilon_for(q, sigma, config.train.steps, config.privacy.delta);
  ctx.out << Json{{"sigma", sigma},
                  {"realized_epsilon", eps.epsilon},
                  {"best_order", eps.best_order},
                  {"q", q},
                  {"steps", config.train.steps},
                  {"epsilon", config.privacy.epsilon},
                  {"delta", config.privacy.delta}}
                 .dump()
          << "\n";
  return kExitOk;
}

int RunSweep(const Context& ctx) {
  RunConfig config = ctx.config;
  const ExperimentSection& e = config.experiment;
  const ClipKind family = parse_clip_kind(e.family);
  ex::family_strategy(family, e.param_grid.front());  // rejects other kinds
  const Dataset train = resolve_dataset(config.data, config.data.source, Split::kTrain);
  const std::optional<Dataset> test = TestSet(config);
  const ModelSpec spec = resolve_model(config, train);

  RunConfig base_config = config;
  base_config.train.method = e.family;
  ex::SweepOptions options;
  options.family = family;
  options.learning_rates = e.lr_grid;
  options.params = e.param_grid;
  options.seeds = e.seeds;
  options.base = resolve_train(base_config, train.size());
  options.threads = config.train.threads;
  const ex::HeatmapGrid grid =
      ex::sweep(spec, train, test ? &*test : nullptr, options);

  std::ostringstream csv;
  csv << CsvHeader(config) << "lr,param,mean_accuracy,diverged";
  for (std::uint64_t s : e.seeds) csv << ",acc_seed" << s;
  csv << "\n";
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    for (std::size_t j = 0; j < grid.cells[i].size(); ++j) {
      const ex::HeatmapCell& cell = grid.cells[i][j];
      csv << Num(grid.learning_rates[i]) << "," << Num(grid.params[j]) << ","
          << Num(cell.mean_accuracy) << "," << (cell.diverged ? 1 : 0);
      for (double a : cell.accuracies) csv << "," << Num(a);
      csv << "\n";
    }
  }
  WriteFile(ctx.prepare("sweep.csv"), csv.str());
  const std::size_t best = grid.best_row();
  Json meta{{"outputs", {"sweep.csv"}},
            {"seeds", e.seeds},
            {"family", std::string(to_string(family))},
            {"param_axis", family == ClipKind::kConstant ? "C" : "r"},
            {"sigma", grid.sigma},
            {"best_lr", grid.learning_rates[best]},
            {"best_row_spread", grid.row_spread(best)},
            {"diverged_cells_at_chance", true}};
  ctx.sidecar("sweep.json", meta);
  ctx.out << Json{{"best_lr", grid.learning_rates[best]},
                  {"best_row_spread", grid.row_spread(best)},
                  {"sigma", grid.sigma}}
                 .dump()
          << "\n";
  return kExitOk;
}

int RunLazyRegion(const Context& ctx) {
  const ExperimentSection& e = ctx.config.experiment;
  const std::vector<double> theta = ex::linspace(e.theta_min, e.theta_max, e.theta_points);
  ex::LazyRegionOptions options;
  options.n_per_class = e.lazy_n;
  options.r = e.lazy_r;
  options.c = e.lazy_c;
  options.seed = ctx.config.data.data_seed;
  const ex::LazyRegionCurve curve = ex::lazy_region(theta, options);

  std::ostringstream csv;
  csv << CsvHeader(ctx.config) << "theta,sgd_raw,sgd_raw_stderr,dp_sgd,auto_s,psac\n";
  for (std::size_t i = 0; i < curve.theta.size(); ++i) {
    csv << Num(curve.theta[i]) << "," << Num(curve.sgd_raw[i]) << ","
        << Num(curve.sgd_raw_stderr[i]) << "," << Num(curve.dp_sgd[i]) << ","
        << Num(curve.auto_s[i]) << "," << Num(curve.psac[i]) << "\n";
  }
  WriteFile(ctx.prepare("lazy_region.csv"), csv.str());
  ctx.sidecar("lazy_region.json",
              Json{{"outputs", {"lazy_region.csv"}},
                   {"seeds", {ctx.config.data.data_seed}},
                   {"aggregation", "mean over all 2*n_per_class samples"},
                   {"samples", 2 * e.lazy_n}});
  return kExitOk;
}

int RunDiagnose(const Context& ctx) {
  const RunConfig& config = ctx.config;
  const ExperimentSection& e = config.experiment;
  const Dataset train = resolve_dataset(config.data, config.data.source, Split::kTrain);
  const ModelSpec spec = resolve_model(config, train);
  const TrainConfig tc = resolve_train(config, train.size());

  std::ostringstream profile_csv;
  profile_csv << CsvHeader(config) << "run,step,quartile,mean_cosine,count\n";
  std::vector<std::uint64_t> seeds;
  double wins = 0.0;
  std::size_t fallback_steps = 0;
  for (int run = 0; run < e.runs; ++run) {
    TrainConfig run_config = tc;
    run_config.seed = derive_seed(tc.seed, static_cast<std::uint64_t>(run));
    seeds.push_back(run_config.seed);
    const ex::CosineProfile p = ex::cosine_profile(spec, train, run_config, e.every_k);
    fallback_steps += p.single_bucket_steps.size();
    wins += ex::top_beats_bottom_fraction(p, kProfileWarmup);
    for (const ex::QuartileCosine& q : p.records) {
      profile_csv << run << "," << q.step << "," << q.quartile << ","
                  << Num(q.mean_cosine) << "," << q.count << "\n";
    }
  }
  if (fallback_steps > 0) {
    ctx.err << "warning: " << fallback_steps
            << " measured batches had fewer than 4 samples; reported as one bucket\n";
  }
  WriteFile(ctx.prepare("cosine_profile.csv"), profile_csv.str());

  const ClipStrategy a = resolve_strategy(e.compare_a, config.train.r, config.train.clip_c);
  const ClipStrategy b = resolve_strategy(e.compare_b, config.train.r, config.train.clip_c);
  ex::HistogramOptions hopt;
  hopt.runs = e.runs;
  hopt.every_k = e.every_k;
  hopt.bins = e.bins;
  hopt.lo = e.hist_lo;
  hopt.hi = e.hist_hi;
  const ex::HistogramComparison hist =
      ex::weighted_cosine_histogram(spec, train, tc, a, b, hopt);
  std::ostringstream hist_csv;
  hist_csv << CsvHeader(config) << "bin_lo,bin_hi," << e.compare_a << ","
           << e.compare_b << "\n";
  for (int k = 0; k < e.bins; ++k) {
    const double lo = e.hist_lo + (e.hist_hi - e.hist_lo) * k / e.bins;
    const double hi = e.hist_lo + (e.hist_hi - e.hist_lo) * (k + 1) / e.bins;
    hist_csv << Num(lo) << "," << Num(hi) << "," << hist.a.counts[k] << ","
             << hist.b.counts[k] << "\n";
  }
  WriteFile(ctx.prepare("cosine_histogram.csv"), hist_csv.str());

  const double r = config.train.r;
  const std::vector<ClipStrategy> strategies = {
      ClipStrategy::psac(r), ClipStrategy::auto_s(r), ClipStrategy::auto_v(),
      ClipStrategy::constant(config.train.clip_c)};
  std::vector<double> grid = ex::linspace(0.0, 2.0, 201);
  for (double s : {5.0, 10.0, 20.0, 50.0, 100.0}) grid.push_back(s);
  const ex::WeightTable table = ex::weight_curve(strategies, grid);
  std::ostringstream weight_csv;
  weight_csv << CsvHeader(config) << "norm";
  for (const std::string& label : table.labels) weight_csv << "," << label;
  weight_csv << "\n";
  for (std::size_t i = 0; i < table.norms.size(); ++i) {
    weight_csv << Num(table.norms[i]);
    for (const auto& row : table.rows) weight_csv << "," << Num(row[i]);
    weight_csv << "\n";
  }
  WriteFile(ctx.prepare("weight_curve.csv"), weight_csv.str());

  Json meta{{"outputs", {"cosine_profile.csv", "cosine_histogram.csv", "weight_curve.csv"}},
            {"seeds", seeds},
            {"sigma", tc.sigma()},
            {"profile_warmup", kProfileWarmup},
            {"top_beats_bottom_fraction", wins / e.runs},
            {"pooled_median", hist.pooled_median},
            {"mass_above_median", {{e.compare_a, hist.mass_above_a},
                                   {e.compare_b, hist.mass_above_b}}},
            {"below_range", {{e.compare_a, hist.a.below}, {e.compare_b, hist.b.below}}}};
  ctx.sidecar("diagnose.json", meta);
  ctx.out << Json{{"top_beats_bottom_fraction", wins / e.runs},
                  {"mass_above_median", meta["mass_above_median"]}}
                 .dump()
          << "\n";
  return kExitOk;
}

Json VerificationJson(const theory::VerificationResult& v) {
  Json j{{"passed", v.passed},
         {"trials", v.trials},
         {"violations", v.violations},
         {"rhs", v.rhs},
         {"worst_gap", v.worst_gap}};
  j["counterexample"] = v.counterexample ? Json::parse(*v.counterexample) : Json();
  return j;
}

int RunTheory(const Context& ctx) {
  const RunConfig& config = ctx.config;
  const TheorySection& t = config.theory;
  const theory::BoundInputs in = resolve_bounds(config);
  in.validate();
  Json j;
  j["inputs"] = ConfigJson(config)["theory"];
  j["n_const"] = theory::n_const(in.tau0, in.tau1, in.r);
  j["m_const"] = theory::m_const(in.tau0, in.tau1, in.r);
  j["alpha_const"] = theory::alpha_const(in.tau0, in.tau1, in.r);
  j["nonvanishing_bound"] = theory::nonvanishing_bound(in.tau0, in.tau1, in.r);
  j["lemma2_rhs"] = theory::lemma2_rhs(in.l0, in.l1, in.tau0, in.tau1, in.r);
  j["lemma4_rhs"] = theory::lemma4_rhs(in.tau0, in.tau1, in.r);
  const double t_min = theory::min_iterations(in.l0, in.l1, in.tau0, in.tau1, in.r,
                                              in.dim, in.sigma, in.batch_size);
  j["min_iterations"] = t_min;
  j["min_samples"] = theory::min_samples(in.l0, in.l1, in.tau0, in.tau1, in.r, in.dim,
                                         in.epsilon, in.delta, t.c2);
  j["theorem2_delta"] = theory::theorem2_delta(in);
  j["theorem2_rhs"] = in.steps >= t_min ? Json(theory::theorem2_rhs(in)) : Json();
  bool passed = true;
  if (!t.verify.empty()) {
    Json v = Json::object();
    if (t.verify == "lemma2" || t.verify == "all") {
      const auto res = theory::verify_lemma2(in, t.trials, t.seed);
      passed = passed && res.passed;
      v["lemma2"] = VerificationJson(res);
    }
    if (t.verify == "lemma4" || t.verify == "all") {
      const auto res = theory::verify_lemma4(in, t.trials, t.seed);
      passed = passed && res.passed;
      v["lemma4"] = VerificationJson(res);
    }
    j["verification"] = v;
  }
  ctx.out << j.dump() << "\n";
  return passed ? kExitOk : kExitRuntime;
}

void AddData(Overrides& ov, CLI::App* sub) {
  ov.option<std::string>(sub, "--data", PSAC_FIELD(data.source),
                         "synthetic:KIND | csv:PATH | idx:IMAGES,LABELS");
  ov.option<std::string>(sub, "--test-data", PSAC_FIELD(data.test_source),
                         "Evaluation set, same syntax as --data");
  ov.option<int>(sub, "--n-per-class", PSAC_FIELD(data.n_per_class),
                 "Synthetic examples per class");
  ov.option<int>(sub, "--dim", PSAC_FIELD(data.dim), "Synthetic input dimension");
  ov.option<double>(sub, "--margin", PSAC_FIELD(data.margin), "Synthetic class offset");
  ov.option<std::uint64_t>(sub, "--data-seed", PSAC_FIELD(data.data_seed),
                           "Seed of the synthetic generator");
  ov.option<int>(sub, "--label-column", PSAC_FIELD(data.label_column),
                 "CSV label column; negative counts from the end");
  ov.flag(sub, "--csv-header", PSAC_FIELD(data.csv_header), "CSV has a header row");
  ov.option<bool>(sub, "--normalize", PSAC_FIELD(data.normalize),
                  "Scale IDX pixels to [0, 1]");
  ov.option<int>(sub, "--limit", PSAC_FIELD(data.limit),
                 "Keep only the first N examples of a file");
}

void AddModel(Overrides& ov, CLI::App* sub) {
  ov.option<std::string>(sub, "--model", PSAC_FIELD(model.kind),
                         "logistic_regression | mlp");
  ov.option<int>(sub, "--hidden", PSAC_FIELD(model.hidden), "MLP hidden width");
}

void AddTrain(Overrides& ov, CLI::App* sub) {
  ov.option<std::string>(sub, "--method", PSAC_FIELD(train.method),
                         "dpsgd | autov | autos | psac | none");
  ov.option<double>(sub, "--r", PSAC_FIELD(train.r), "Stability constant r");
  ov.option<double>(sub, "--clip-c", PSAC_FIELD(train.clip_c), "Clipping scale C");
  ov.option<double>(sub, "--lr", PSAC_FIELD(train.lr), "Learning rate");
  ov.option<int>(sub, "--batch", PSAC_FIELD(train.batch), "Nominal batch size");
  ov.option<std::int64_t>(sub, "--steps", PSAC_FIELD(train.steps), "Training steps");
  ov.option<std::string>(sub, "--sampling", PSAC_FIELD(train.sampling),
                         "poisson | with_replacement");
  ov.option<std::uint64_t>(sub, "--seed", PSAC_FIELD(train.seed), "Run seed");
  ov.option<std::int64_t>(sub, "--eval-every", PSAC_FIELD(train.eval_every),
                          "Evaluate every N steps (0: start and end only)");
  ov.option<unsigned>(sub, "--threads", PSAC_FIELD(train.threads),
                      "Worker threads (0: all cores); results do not depend on it");
}

void AddPrivacy(Overrides& ov, CLI::App* sub) {
  ov.option<double>(sub, "--epsilon", PSAC_FIELD(privacy.epsilon), "Privacy epsilon");
  ov.option<double>(sub, "--delta", PSAC_FIELD(privacy.delta), "Privacy delta");
  ov.option<double>(sub, "--sigma", PSAC_FIELD(privacy.sigma),
                    "Fixed noise multiplier (0: calibrate)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Differentially private training with per-sample adaptive clipping",
               "psac"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);
  Overrides ov;
  std::string config_path;
  std::string out_dir;
  bool timing = false;
  double q = 0.0;

  auto common = [&](CLI::App* sub, bool files) {
    sub->add_option("--config", config_path, "RunConfig file or an output of this tool")
        ->check(CLI::ExistingFile);
    if (files) {
      sub->add_option("--out", out_dir, "Output directory");
      sub->add_flag("--timing", timing, "Record wall time in metadata sidecars");
    }
  };

  CLI::App* train = app.add_subcommand("train", "Private training run");
  common(train, true);
  AddData(ov, train);
  AddModel(ov, train);
  AddTrain(ov, train);
  AddPrivacy(ov, train);

  CLI::App* calibrate = app.add_subcommand("calibrate", "Noise multiplier for a budget");
  common(calibrate, false);
  calibrate->add_option("--q", q, "Sampling rate B/N")->required();
  ov.option<std::int64_t>(calibrate, "--steps", PSAC_FIELD(train.steps), "Steps");
  ov.option<double>(calibrate, "--epsilon", PSAC_FIELD(privacy.epsilon), "Epsilon");
  ov.option<double>(calibrate, "--delta", PSAC_FIELD(privacy.delta), "Delta");

  CLI::App* sweep = app.add_subcommand("sweep", "Learning-rate x clipping heatmap");
  common(sweep, true);
  AddData(ov, sweep);
  AddModel(ov, sweep);
  AddTrain(ov, sweep);
  AddPrivacy(ov, sweep);
  ov.option<std::string>(sweep, "--family", PSAC_FIELD(experiment.family),
                         "psac | autos (r axis) or dpsgd (C axis)");
  ov.option<std::vector<double>>(sweep, "--lr-grid", PSAC_FIELD(experiment.lr_grid),
                                 "Comma-separated learning rates");
  ov.option<std::vector<double>>(sweep, "--param-grid",
                                 PSAC_FIELD(experiment.param_grid),
                                 "Comma-separated r or C values");
  ov.option<std::vector<std::uint64_t>>(sweep, "--seeds", PSAC_FIELD(experiment.seeds),
                                        "Comma-separated seeds");

  CLI::App* lazy = app.add_subcommand("lazy-region", "1-D clipped gradient curves");
  common(lazy, true);
  ov.option<int>(lazy, "--n", PSAC_FIELD(experiment.lazy_n), "Samples per class");
  ov.option<double>(lazy, "--r", PSAC_FIELD(experiment.lazy_r), "r of autos and psac");
  ov.option<double>(lazy, "--clip-c", PSAC_FIELD(experiment.lazy_c), "C of dpsgd");
  ov.option<double>(lazy, "--theta-min", PSAC_FIELD(experiment.theta_min), "Grid start");
  ov.option<double>(lazy, "--theta-max", PSAC_FIELD(experiment.theta_max), "Grid end");
  ov.option<int>(lazy, "--theta-points", PSAC_FIELD(experiment.theta_points),
                 "Grid size");
  ov.option<std::uint64_t>(lazy, "--data-seed", PSAC_FIELD(data.data_seed),
                           "Seed of the sample draw");

  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Cosine profile, weighted cosine histograms and weight curves");
  common(diagnose, true);
  AddData(ov, diagnose);
  AddModel(ov, diagnose);
  AddTrain(ov, diagnose);
  AddPrivacy(ov, diagnose);
  ov.option<std::int64_t>(diagnose, "--every-k", PSAC_FIELD(experiment.every_k),
                          "Measure every k steps");
  ov.option<int>(diagnose, "--runs", PSAC_FIELD(experiment.runs), "Repeated runs");
  ov.option<int>(diagnose, "--bins", PSAC_FIELD(experiment.bins), "Histogram bins");
  ov.option<std::string>(diagnose, "--compare-a", PSAC_FIELD(experiment.compare_a),
                         "First weighting compared");
  ov.option<std::string>(diagnose, "--compare-b", PSAC_FIELD(experiment.compare_b),
                         "Second weighting compared");

  CLI::App* theory_cmd = app.add_subcommand("theory", "Bound evaluators and lemma checks");
  common(theory_cmd, false);
  ov.option<double>(theory_cmd, "--l0", PSAC_FIELD(theory.l0), "Smoothness L0");
  ov.option<double>(theory_cmd, "--l1", PSAC_FIELD(theory.l1), "Smoothness L1");
  ov.option<double>(theory_cmd, "--tau0", PSAC_FIELD(theory.tau0), "Deviation tau0");
  ov.option<double>(theory_cmd, "--tau1", PSAC_FIELD(theory.tau1), "Deviation tau1");
  ov.option<double>(theory_cmd, "--r", PSAC_FIELD(theory.r), "Stability constant r");
  ov.option<double>(theory_cmd, "--dim", PSAC_FIELD(theory.dim), "Parameter dimension");
  ov.option<double>(theory_cmd, "--sigma", PSAC_FIELD(theory.sigma), "Noise multiplier");
  ov.option<double>(theory_cmd, "--batch", PSAC_FIELD(theory.batch), "Batch size");
  ov.option<double>(theory_cmd, "--steps", PSAC_FIELD(theory.steps), "Iterations");
  ov.option<double>(theory_cmd, "--num-samples", PSAC_FIELD(theory.num_samples),
                    "Dataset size");
  ov.option<double>(theory_cmd, "--d-f", PSAC_FIELD(theory.d_f), "Objective gap");
  ov.option<double>(theory_cmd, "--c2", PSAC_FIELD(theory.c2), "Privacy constant");
  ov.option<double>(theory_cmd, "--epsilon", PSAC_FIELD(privacy.epsilon), "Epsilon");
  ov.option<double>(theory_cmd, "--delta", PSAC_FIELD(privacy.delta), "Delta");
  ov.option<std::string>(theory_cmd, "--verify", PSAC_FIELD(theory.verify),
                         "lemma2 | lemma4 | all");
  ov.option<std::int64_t>(theory_cmd, "--trials", PSAC_FIELD(theory.trials),
                          "Random draws per verification");
  ov.option<std::uint64_t>(theory_cmd, "--theory-seed", PSAC_FIELD(theory.seed),
                           "Verification seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream sink_out, sink_err;
    const int code = app.exit(e, sink_out, sink_err);
    if (code == 0) {
      out << sink_out.str();
      return kExitOk;
    }
    err << sink_err.str() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == train && config_path.empty() && sub->count("--data") == 0) {
      throw UsageError("train needs --data or --config");
    }
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    ov.apply(config);
    validate(config);

    fs::path dir = out_dir;
    if (dir.empty()) {
      const char* env = std::getenv("PSAC_OUTPUT_DIR");
      dir = env && *env ? fs::path(env) : fs::path(".");
    }
    const Context ctx{config, dir, timing, std::chrono::steady_clock::now(), out, err};
    if (sub == train) return RunTrain(ctx);
    if (sub == calibrate) return RunCalibrate(ctx, q);
    if (sub == sweep) return RunSweep(ctx);
    if (sub == lazy) return RunLazyRegion(ctx);
    if (sub == diagnose) return RunDiagnose(ctx);
    return RunTheory(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedStrategy& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace psac
