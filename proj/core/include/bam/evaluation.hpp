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

#ifndef BAM_EVALUATION_HPP_
#define BAM_EVALUATION_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bam/mdp.hpp"
#include "bam/planner.hpp"
#include "bam/rng.hpp"

namespace bam {

using PolicyFn = std::function<int(int state, Rng& rng)>;

PolicyFn as_policy_fn(const DeterministicPolicy& policy);
PolicyFn as_policy_fn(const StochasticPolicy& policy);

struct ReturnEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int episodes = 0;
};

struct EvaluationOptions {
  int episodes = 50;
  int horizon = 100;
  std::uint64_t seed = 0;
  // Episodes end after accumulating the cost of an absorbing state.
  std::vector<int> absorbing;
};

// Monte-Carlo mean of sum_t -C(s_t). Episode e draws its start state first
// from its own stream derive_seed(seed, {e}), so different policies evaluated
// with the same seed share start states.
ReturnEstimate evaluate_policy(const PolicyFn& policy,
                               const TransitionModel& model,
                               std::span<const double> cost,
                               const InitialDistribution& initial,
                               const EvaluationOptions& options);

}  // namespace bam

#endif  // BAM_EVALUATION_HPP_
