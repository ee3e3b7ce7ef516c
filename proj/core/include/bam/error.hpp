// Copyright 2026 The BAM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BAM_ERROR_HPP_
#define BAM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bam {

// Input that violates a documented precondition (shape mismatch, unnormalized
// transition row, non-finite cost, malformed file).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text that cannot be parsed. Carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line)
      : ValidationError(line > 0 ? "line " + std::to_string(line) + ": " + what
                                 : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// A computation produced a non-finite intermediate value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bam

#endif  // BAM_ERROR_HPP_
