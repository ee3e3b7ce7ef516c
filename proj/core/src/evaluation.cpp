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

#include "bam/evaluation.hpp"

#include <algorithm>

#include <cmath>

#include "bam/error.hpp"

namespace bam {

PolicyFn as_policy_fn(const DeterministicPolicy& policy) {
  return [&policy](int s, Rng& rng) { return policy.act(s, rng); };
}

PolicyFn as_policy_fn(const StochasticPolicy& policy) {
  return [&policy](int s, Rng& rng) { return policy.sample(s, rng); };
}

ReturnEstimate evaluate_policy(const PolicyFn& policy,
                               const TransitionModel& model,
                               std::span<const double> cost,
                               const InitialDistribution& initial,
                               const EvaluationOptions& options) {
  if (initial.empty()) throw ValidationError("initial state distribution is empty");
  if (options.horizon < 1) throw ValidationError("horizon must be >= 1");
  if (options.episodes < 1) throw ValidationError("episodes must be >= 1");
  validate_cost(cost, model.num_states());

  std::vector<char> absorbing(model.num_states(), 0);
  for (int s : options.absorbing) absorbing.at(s) = 1;

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int e = 0; e < options.episodes; ++e) {
    Rng rng = make_rng(options.seed, {static_cast<std::uint64_t>(e)});
    int s = initial.sample(rng);
    double ret = 0.0;
    for (int t = 0; t < options.horizon; ++t) {
      ret -= cost[s];
      if (absorbing[s]) break;
      const int a = policy(s, rng);
      s = model.sample(s, a, rng);
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  const double n = options.episodes;
  ReturnEstimate estimate;
  estimate.episodes = options.episodes;
  estimate.mean = sum / n;
  if (options.episodes > 1) {
    const double var = std::max(0.0, (sum_sq - n * estimate.mean * estimate.mean) / (n - 1.0));
    estimate.standard_error = std::sqrt(var / n);
  }
  return estimate;
}

}  // namespace bam
