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

#ifndef PSAC_ERROR_H_
#define PSAC_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace psac {

// Base of every error raised by the library. The CLI maps ContractViolation
// and UnsupportedStrategy to a usage exit code and everything else to a
// runtime exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was not met (dimension mismatch, out-of-range
// parameter, empty input).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Input for which the operation is mathematically undefined, e.g. normalizing
// a zero vector.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class UnsupportedStrategy : public Error {
 public:
  using Error::Error;
};

class CalibrationFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t offset = -1)
      : Error(what), offset_(offset) {}

  // Byte offset (binary formats) or 1-based row (text formats); -1 if unknown.
  std::int64_t offset() const { return offset_; }

 private:
  std::int64_t offset_;
};

class DivergedRun : public Error {
 public:
  DivergedRun(const std::string& what, std::int64_t step)
      : Error(what), step_(step) {}

  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace psac

#endif  // PSAC_ERROR_H_
