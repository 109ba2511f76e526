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

#include "psac/config.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"
#include "psac/error.h"
#include "psac/privacy.h"

namespace psac {
namespace {

using Json = nlohmann::json;

// Field tables shared by the writer and the reader.
template <typename V>
void Fields(V& v, DataConfig& d) {
  v("source", d.source);
  v("test_source", d.test_source);
  v("n_per_class", d.n_per_class);
  v("dim", d.dim);
  v("margin", d.margin);
  v("data_seed", d.data_seed);
  v("label_column", d.label_column);
  v("csv_header", d.csv_header);
  v("normalize", d.normalize);
  v("limit", d.limit);
}

template <typename V>
void Fields(V& v, ModelConfig& m) {
  v("kind", m.kind);
  v("hidden", m.hidden);
}

template <typename V>
void Fields(V& v, TrainSection& t) {
  v("method", t.method);
  v("r", t.r);
  v("clip_c", t.clip_c);
  v("lr", t.lr);
  v("batch", t.batch);
  v("steps", t.steps);
  v("sampling", t.sampling);
  v("seed", t.seed);
  v("eval_every", t.eval_every);
  v("threads", t.threads);
}

template <typename V>
void Fields(V& v, PrivacySection& p) {
  v("epsilon", p.epsilon);
  v("delta", p.delta);
  v("sigma", p.sigma);
}

template <typename V>
void Fields(V& v, ExperimentSection& e) {
  v("family", e.family);
  v("lr_grid", e.lr_grid);
  v("param_grid", e.param_grid);
  v("seeds", e.seeds);
  v("every_k", e.every_k);
  v("runs", e.runs);
  v("bins", e.bins);
  v("hist_lo", e.hist_lo);
  v("hist_hi", e.hist_hi);
  v("compare_a", e.compare_a);
  v("compare_b", e.compare_b);
  v("lazy_n", e.lazy_n);
  v("lazy_r", e.lazy_r);
  v("lazy_c", e.lazy_c);
  v("theta_min", e.theta_min);
  v("theta_max", e.theta_max);
  v("theta_points", e.theta_points);
}

template <typename V>
void Fields(V& v, TheorySection& t) {
  v("l0", t.l0);
  v("l1", t.l1);
  v("tau0", t.tau0);
  v("tau1", t.tau1);
  v("r", t.r);
  v("dim", t.dim);
  v("sigma", t.sigma);
  v("batch", t.batch);
  v("steps", t.steps);
  v("num_samples", t.num_samples);
  v("d_f", t.d_f);
  v("c2", t.c2);
  v("verify", t.verify);
  v("trials", t.trials);
  v("seed", t.seed);
}

template <typename F>
void Sections(RunConfig& c, F&& f) {
  f("data", c.data);
  f("model", c.model);
  f("train", c.train);
  f("privacy", c.privacy);
  f("experiment", c.experiment);
  f("theory", c.theory);
}

struct Writer {
  Json& out;
  template <typename T>
  void operator()(const char* key, const T& value) {
    out[key] = value;
  }
};

struct Reader {
  const Json& in;
  std::string section;
  std::set<std::string> seen;

  template <typename T>
  void operator()(const char* key, T& value) {
    seen.insert(key);
    const auto it = in.find(key);
    if (it == in.end()) return;
    const bool ok = [&] {
      if constexpr (std::is_same_v<T, bool>) return it->is_boolean();
      else if constexpr (std::is_same_v<T, std::string>) return it->is_string();
      else if constexpr (std::is_floating_point_v<T>) return it->is_number();
      else if constexpr (std::is_unsigned_v<T>) return it->is_number_unsigned();
      else if constexpr (std::is_integral_v<T>) return it->is_number_integer();
      else return it->is_array();
    }();
    if (!ok) {
      throw ContractViolation("config key '" + section + "." + key +
                              "' has the wrong type");
    }
    try {
      value = it->template get<T>();
    } catch (const Json::exception& e) {
      throw ContractViolation("config key '" + section + "." + key +
                              "': " + e.what());
    }
  }
};

Json ToJson(const RunConfig& config) {
  RunConfig copy = config;
  Json root = Json::object();
  Sections(copy, [&](const char* name, auto& section) {
    Json obj = Json::object();
    Writer w{obj};
    Fields(w, section);
    root[name] = std::move(obj);
  });
  return root;
}

RunConfig FromJson(const Json& root) {
  if (!root.is_object()) throw ContractViolation("config must be a JSON object");
  RunConfig config;
  std::set<std::string> known;
  Sections(config, [&](const char* name, auto& section) {
    known.insert(name);
    const auto it = root.find(name);
    if (it == root.end()) return;
    if (!it->is_object()) {
      throw ContractViolation(std::string("config section '") + name +
                              "' must be an object");
    }
    Reader r{*it, name, {}};
    Fields(r, section);
    for (const auto& [key, _] : it->items()) {
      if (!r.seen.contains(key)) {
        throw ContractViolation("unknown config key '" + std::string(name) +
                                "." + key + "'");
      }
    }
  });
  for (const auto& [key, _] : root.items()) {
    if (!known.contains(key)) {
      throw ContractViolation("unknown config section '" + key + "'");
    }
  }
  return config;
}

Json ParseJson(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(),
                     static_cast<std::int64_t>(e.byte));
  }
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view FirstLine(std::string_view text) {
  return text.substr(0, text.find('\n'));
}

Dataset Truncate(Dataset ds, int limit) {
  if (limit > 0 && ds.examples.size() > static_cast<std::size_t>(limit)) {
    ds.examples.resize(limit);
  }
  return ds;
}

}  // namespace

std::string to_json(const RunConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

std::string to_json_line(const RunConfig& config) {
  return ToJson(config).dump();
}

RunConfig parse_config(std::string_view text) {
  constexpr std::string_view kCsvPrefix = "# config=";
  if (text.starts_with(kCsvPrefix)) {
    return FromJson(ParseJson(FirstLine(text).substr(kCsvPrefix.size())));
  }
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error&) {
    // Not a single document: a JSON-lines stream carries it on line one.
    root = ParseJson(FirstLine(text));
  }
  if (root.is_object() && root.contains("config")) return FromJson(root["config"]);
  return FromJson(root);
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(ReadText(path));
}

void validate(const RunConfig& c) {
  parse_clip_kind(c.train.method);
  parse_model_kind(c.model.kind);
  parse_sampling(c.train.sampling);
  if (c.model.hidden < 1) throw ContractViolation("model.hidden must be >= 1");
  if (c.train.batch < 1) throw ContractViolation("train.batch must be >= 1");
  if (c.train.steps < 0) throw ContractViolation("train.steps must be >= 0");
  if (!(c.train.lr > 0)) throw ContractViolation("train.lr must be positive");
  if (c.data.n_per_class < 1 || c.data.dim < 1) {
    throw ContractViolation("data.n_per_class and data.dim must be >= 1");
  }
  if (!(c.privacy.epsilon > 0) || !(c.privacy.delta > 0 && c.privacy.delta < 1)) {
    throw ContractViolation("privacy needs epsilon > 0 and delta in (0, 1)");
  }
  if (c.privacy.sigma < 0) throw ContractViolation("privacy.sigma must be >= 0");
  const ExperimentSection& e = c.experiment;
  if (e.lr_grid.empty() || e.param_grid.empty() || e.seeds.empty()) {
    throw ContractViolation("sweep grids and seed list must be nonempty");
  }
  parse_clip_kind(e.family);
  parse_clip_kind(e.compare_a);
  parse_clip_kind(e.compare_b);
  if (e.every_k < 1 || e.runs < 1 || e.bins < 1 || !(e.hist_lo < e.hist_hi)) {
    throw ContractViolation("invalid diagnostic settings");
  }
  if (e.lazy_n < 1 || e.theta_points < 1 || !(e.theta_min <= e.theta_max)) {
    throw ContractViolation("invalid lazy-region settings");
  }
  if (!c.theory.verify.empty() && c.theory.verify != "lemma2" &&
      c.theory.verify != "lemma4" && c.theory.verify != "all") {
    throw ContractViolation("theory.verify must be lemma2, lemma4 or all");
  }
}

Dataset resolve_dataset(const DataConfig& data, std::string_view source,
                        Split split) {
  const std::size_t colon = source.find(':');
  if (colon == std::string_view::npos) {
    throw ContractViolation("data source '" + std::string(source) +
                            "' needs a scheme (synthetic:, csv:, idx:)");
  }
  const std::string_view scheme = source.substr(0, colon);
  const std::string rest(source.substr(colon + 1));
  Dataset ds;
  if (scheme == "synthetic") {
    const std::uint64_t seed =
        split == Split::kTrain ? data.data_seed : derive_seed(data.data_seed, 1);
    ds = gen_synthetic(parse_synthetic_kind(rest), data.n_per_class, data.dim,
                       data.margin, seed);
  } else if (scheme == "csv") {
    ds = Truncate(load_csv(rest, data.label_column, data.csv_header), data.limit);
  } else if (scheme == "idx") {
    const std::size_t comma = rest.find(',');
    if (comma == std::string::npos) {
      throw ContractViolation("idx source needs IMAGES,LABELS");
    }
    ds = Truncate(load_idx(rest.substr(0, comma), rest.substr(comma + 1),
                           data.normalize),
                  data.limit);
  } else {
    throw ContractViolation("unknown data scheme '" + std::string(scheme) + "'");
  }
  ds.split = split;
  return ds;
}

ModelSpec resolve_model(const RunConfig& config, const Dataset& train) {
  const ModelKind kind = parse_model_kind(config.model.kind);
  ModelSpec spec = kind == ModelKind::kMlp
                       ? ModelSpec::mlp(train.input_dim, config.model.hidden,
                                        train.num_classes)
                       : ModelSpec::logistic(train.input_dim, train.num_classes);
  spec.validate();
  return spec;
}

ClipStrategy resolve_strategy(std::string_view method, double r, double clip_c) {
  ClipStrategy s{parse_clip_kind(method), clip_c, r};
  if (s.kind == ClipKind::kNone) s = ClipStrategy::none();
  s.validate();
  return s;
}

TrainConfig resolve_train(const RunConfig& config, std::size_t dataset_size) {
  const TrainSection& t = config.train;
  TrainConfig tc;
  tc.batch_size = t.batch;
  tc.steps = t.steps;
  tc.learning_rate = t.lr;
  tc.strategy = resolve_strategy(t.method, t.r, t.clip_c);
  tc.sampling = parse_sampling(t.sampling);
  tc.seed = t.seed;
  tc.eval_every = t.eval_every;
  tc.threads = t.threads;
  if (tc.strategy.bounded() && t.steps > 0) {
    const double q =
        std::min(1.0, static_cast<double>(t.batch) / static_cast<double>(dataset_size));
    if (config.privacy.sigma > 0) {
      tc.privacy = PrivacySpec{config.privacy.epsilon, config.privacy.delta, q,
                               t.steps, config.privacy.sigma};
    } else {
      tc.privacy = PrivacySpec::calibrated(config.privacy.epsilon,
                                           config.privacy.delta, q, t.steps);
    }
  }
  return tc;
}

theory::BoundInputs resolve_bounds(const RunConfig& config) {
  const TheorySection& t = config.theory;
  theory::BoundInputs in;
  in.l0 = t.l0;
  in.l1 = t.l1;
  in.tau0 = t.tau0;
  in.tau1 = t.tau1;
  in.r = t.r;
  in.batch_size = t.batch;
  in.dim = t.dim;
  in.steps = t.steps;
  in.num_samples = t.num_samples;
  in.sigma = t.sigma;
  in.epsilon = config.privacy.epsilon;
  in.delta = config.privacy.delta;
  in.d_f = t.d_f;
  return in;
}

}  // namespace psac
