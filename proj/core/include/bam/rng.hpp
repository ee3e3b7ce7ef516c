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

#ifndef BAM_RNG_HPP_
#define BAM_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bam {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to turn structured keys into seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent seed from a master seed and a path of keys such as
// (agent, round, role). Different paths give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t k : path) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master,
                    std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

// Uniform double in [0, 1) with 53 random bits. Unlike
// std::uniform_real_distribution the result does not depend on the standard
// library implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; portable across implementations.
inline int uniform_index(Rng& rng, int n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<int>(x % range);
}

// Role tags for derive_seed paths.
enum class StreamRole : std::uint64_t {
  kTeacher = 1,
  kEvaluation = 2,
  kAgentEpisode = 3,
  kFeedback = 4,
  kSession = 5,
  kInitialStates = 6,
};

inline std::uint64_t role(StreamRole r) { return static_cast<std::uint64_t>(r); }

}  // namespace bam

#endif  // BAM_RNG_HPP_
