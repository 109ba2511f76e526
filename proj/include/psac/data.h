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

#ifndef PSAC_DATA_H_
#define PSAC_DATA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psac/models.h"

namespace psac {

enum class Split { kTrain, kTest };

struct Dataset {
  std::vector<Example> examples;
  std::string name;
  int input_dim = 0;
  int num_classes = 0;
  Split split = Split::kTrain;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::span<const Example> view() const { return examples; }

  // Nonempty, every example has input_dim finite features and a label in
  // [0, num_classes) (or -1 for binary tasks). Throws ContractViolation.
  void validate() const;
};

// IDX image/label pair (MNIST layout): magic 0x00000803 for images and
// 0x00000801 for labels, big-endian dimensions, unsigned-byte payload. Pixels
// are flattened row-major; with `normalize` they are divided by 255.
// Errors are ParseError with the byte offset of the offending field.
Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels, bool normalize = true);

// Same, from in-memory buffers.
Dataset parse_idx(std::span<const std::uint8_t> images,
                  std::span<const std::uint8_t> labels, bool normalize = true);

// Numeric CSV without quoting. label_column indexes the columns of each row
// (negative counts from the end, so -1 is the last column). num_classes is
// max(label) + 1, at least 2. Errors are ParseError carrying the 1-based
// line number.
Dataset load_csv(const std::filesystem::path& path, int label_column = -1,
                 bool has_header = false);
Dataset parse_csv(std::string_view text, int label_column = -1,
                  bool has_header = false);

enum class SyntheticKind { kTwoGaussian1d, kSeparableNd };

std::string_view to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view name);

// two_gaussian_1d: n_per_class draws from N(+1, 1) labelled 1 followed by
// n_per_class draws from N(-1, 1) labelled 0; dim and margin are ignored.
// separable_nd: blobs N(+margin e_1, I) labelled 1 and N(-margin e_1, I)
// labelled 0 in `dim` dimensions, interleaved (1, 0, 1, 0, ...).
Dataset gen_synthetic(SyntheticKind kind, int n_per_class, int dim,
                      double margin, std::uint64_t seed);

}  // namespace psac

#endif  // PSAC_DATA_H_
