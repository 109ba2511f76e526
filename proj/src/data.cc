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

#include "psac/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "psac/error.h"

namespace psac {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class BigEndianReader {
 public:
  BigEndianReader(std::span<const std::uint8_t> buf, std::string what)
      : buf_(buf), what_(std::move(what)) {}

  std::uint32_t u32(const char* field) {
    if (pos_ + 4 > buf_.size()) {
      throw ParseError(what_ + ": truncated while reading " + field +
                           " at byte offset " + std::to_string(pos_),
                       static_cast<std::int64_t>(pos_));
    }
    const std::uint32_t v = (std::uint32_t{buf_[pos_]} << 24) |
                            (std::uint32_t{buf_[pos_ + 1]} << 16) |
                            (std::uint32_t{buf_[pos_ + 2]} << 8) |
                            std::uint32_t{buf_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  // Remaining payload; must be exactly `expected` bytes long at least.
  std::span<const std::uint8_t> payload(std::uint64_t expected) {
    if (buf_.size() - pos_ < expected) {
      throw ParseError(what_ + ": payload truncated, expected " +
                           std::to_string(expected) + " bytes from offset " +
                           std::to_string(pos_) + ", found " +
                           std::to_string(buf_.size() - pos_),
                       static_cast<std::int64_t>(buf_.size()));
    }
    return buf_.subspan(pos_, expected);
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> buf_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double ParseNumber(std::string_view cell, std::int64_t line, std::size_t col) {
  cell = Trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ", column " +
                         std::to_string(col + 1) + ": non-numeric cell '" +
                         std::string(cell) + "'",
                     line);
  }
  return v;
}

}  // namespace

void Dataset::validate() const {
  if (examples.empty()) throw ContractViolation("dataset '" + name + "' is empty");
  if (input_dim <= 0 || num_classes < 2) {
    throw ContractViolation("dataset '" + name + "' has invalid dimensions");
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    if (ex.features.dim() != static_cast<std::size_t>(input_dim)) {
      throw ContractViolation("example " + std::to_string(i) +
                              " has the wrong feature count");
    }
    if (!ex.features.all_finite()) {
      throw ContractViolation("example " + std::to_string(i) +
                              " has non-finite features");
    }
    const bool binary_alias = num_classes == 2 && ex.label == -1;
    if (!binary_alias && (ex.label < 0 || ex.label >= num_classes)) {
      throw ContractViolation("example " + std::to_string(i) +
                              " has label out of range");
    }
  }
}

Dataset parse_idx(std::span<const std::uint8_t> images,
                  std::span<const std::uint8_t> labels, bool normalize) {
  BigEndianReader img(images, "IDX images");
  if (const auto magic = img.u32("magic"); magic != kIdxImagesMagic) {
    throw ParseError("IDX images: bad magic 0x" +
                         [&] {
                           std::ostringstream os;
                           os << std::hex << magic;
                           return os.str();
                         }() +
                         " at byte offset 0",
                     0);
  }
  const std::uint32_t count = img.u32("image count");
  const std::uint32_t rows = img.u32("row count");
  const std::uint32_t cols = img.u32("column count");
  const std::uint64_t pixels = std::uint64_t{rows} * cols;
  if (pixels == 0 || pixels > (1u << 24)) {
    throw ParseError("IDX images: implausible image size " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         " at byte offset 8",
                     8);
  }
  const auto img_data = img.payload(std::uint64_t{count} * pixels);

  BigEndianReader lab(labels, "IDX labels");
  if (lab.u32("magic") != kIdxLabelsMagic) {
    throw ParseError("IDX labels: bad magic at byte offset 0", 0);
  }
  const std::uint32_t label_count = lab.u32("label count");
  if (label_count != count) {
    throw ParseError("IDX labels: count " + std::to_string(label_count) +
                         " does not match image count " + std::to_string(count) +
                         " (byte offset 4)",
                     4);
  }
  const auto lab_data = lab.payload(count);

  Dataset ds;
  ds.name = "idx";
  ds.input_dim = static_cast<int>(pixels);
  ds.examples.reserve(count);
  int max_label = 1;
  const double pixel_scale = normalize ? 1.0 / 255.0 : 1.0;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::vector<double> features(pixels);
    for (std::uint64_t p = 0; p < pixels; ++p) {
      features[p] = img_data[i * pixels + p] * pixel_scale;
    }
    const int label = lab_data[i];
    max_label = std::max(max_label, label);
    ds.examples.push_back({ParamVector(std::move(features)), label});
  }
  ds.num_classes = max_label + 1;
  if (ds.examples.empty()) throw ParseError("IDX files contain no examples", 4);
  return ds;
}

Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels, bool normalize) {
  const auto img = ReadFile(images);
  const auto lab = ReadFile(labels);
  Dataset ds = parse_idx(img, lab, normalize);
  ds.name = images.filename().string();
  return ds;
}

Dataset parse_csv(std::string_view text, int label_column, bool has_header) {
  Dataset ds;
  ds.name = "csv";
  std::size_t width = 0;
  int max_label = 1;
  std::int64_t line_no = 0;
  bool header_pending = has_header;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (Trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = cells.size();
      if (width < 2) {
        throw ParseError("line " + std::to_string(line_no) +
                             ": need at least one feature and one label column",
                         line_no);
      }
    } else if (cells.size() != width) {
      throw ParseError("line " + std::to_string(line_no) + ": ragged row with " +
                           std::to_string(cells.size()) + " columns, expected " +
                           std::to_string(width),
                       line_no);
    }
    const int w = static_cast<int>(width);
    const int label_idx = label_column < 0 ? w + label_column : label_column;
    if (label_idx < 0 || label_idx >= w) {
      throw ContractViolation("label column " + std::to_string(label_column) +
                              " outside a " + std::to_string(w) + "-column row");
    }
    std::vector<double> features;
    features.reserve(width - 1);
    int label = 0;
    for (std::size_t c = 0; c < width; ++c) {
      const double v = ParseNumber(cells[c], line_no, c);
      if (static_cast<int>(c) == label_idx) {
        if (v != std::floor(v) || v < -1 || v > std::numeric_limits<int>::max()) {
          throw ParseError("line " + std::to_string(line_no) +
                               ": label is not a class index",
                           line_no);
        }
        label = static_cast<int>(v);
      } else {
        features.push_back(v);
      }
    }
    max_label = std::max(max_label, label);
    ds.examples.push_back({ParamVector(std::move(features)), label});
  }
  if (ds.examples.empty()) throw ContractViolation("CSV input holds no examples");
  ds.input_dim = static_cast<int>(width - 1);
  ds.num_classes = max_label + 1;
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, int label_column,
                 bool has_header) {
  const auto bytes = ReadFile(path);
  Dataset ds = parse_csv(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
      label_column, has_header);
  ds.name = path.filename().string();
  return ds;
}

std::string_view to_string(SyntheticKind kind) {
  return kind == SyntheticKind::kTwoGaussian1d ? "two_gaussian_1d"
                                               : "separable_nd";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "two_gaussian_1d") return SyntheticKind::kTwoGaussian1d;
  if (name == "separable_nd") return SyntheticKind::kSeparableNd;
  throw ContractViolation("unknown synthetic dataset '" + std::string(name) + "'");
}

Dataset gen_synthetic(SyntheticKind kind, int n_per_class, int dim,
                      double margin, std::uint64_t seed) {
  if (n_per_class < 1) throw ContractViolation("n_per_class must be >= 1");
  RngState rng(seed, Stream::kData);
  Dataset ds;
  ds.name = std::string(to_string(kind));
  ds.num_classes = 2;
  if (kind == SyntheticKind::kTwoGaussian1d) {
    ds.input_dim = 1;
    ds.examples.reserve(2 * n_per_class);
    for (int i = 0; i < n_per_class; ++i) {
      ds.examples.push_back({ParamVector{1.0 + rng.next_gaussian()}, 1});
    }
    for (int i = 0; i < n_per_class; ++i) {
      ds.examples.push_back({ParamVector{-1.0 + rng.next_gaussian()}, 0});
    }
    return ds;
  }
  if (dim < 1) throw ContractViolation("dim must be >= 1");
  ds.input_dim = dim;
  ds.examples.reserve(2 * n_per_class);
  for (int i = 0; i < n_per_class; ++i) {
    for (int label : {1, 0}) {
      ParamVector x = gaussian_vector(rng, dim, 1.0);
      x[0] += label == 1 ? margin : -margin;
      ds.examples.push_back({std::move(x), label});
    }
  }
  return ds;
}

}  // namespace psac
