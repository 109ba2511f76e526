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

// Command-line front end. Subcommands:
//
//   train        private training run, writes train.jsonl
//   calibrate    noise multiplier for a privacy budget, prints JSON
//   sweep        learning-rate x clipping-parameter heatmap, sweep.csv
//   lazy-region  1-D clipped-gradient curves, lazy_region.csv
//   diagnose     cosine profile, weighted-cosine histograms, weight curves
//   theory       bound evaluators and randomized lemma checks, prints JSON
//
// Every subcommand accepts --config FILE (a RunConfig document, sidecar,
// JSON-lines stream or CSV written by this tool); explicit flags override
// it. Files go to --out, else $PSAC_OUTPUT_DIR, else the working directory.

#ifndef PSAC_CLI_H_
#define PSAC_CLI_H_

#include <ostream>

namespace psac {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace psac

#endif  // PSAC_CLI_H_
