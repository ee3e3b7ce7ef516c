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

#ifndef BAM_TEXT_HPP_
#define BAM_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bam {

// Shortest text that parses back to the same double.
std::string format_double(double value);
// Throws ParseError on malformed input; `line` is reported in the error.
double parse_double(std::string_view text, int line = 0);
long parse_long(std::string_view text, int line = 0);
std::vector<std::string> split_words(std::string_view text);
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace bam

#endif  // BAM_TEXT_HPP_
