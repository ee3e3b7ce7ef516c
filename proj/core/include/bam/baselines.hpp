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

#ifndef BAM_BASELINES_HPP_
#define BAM_BASELINES_HPP_

#include <span>
#include <vector>

#include "bam/learner.hpp"
#include "bam/planner.hpp"

namespace bam {

struct MleOptions {
  int max_steps = 2000;
  double gradient_tolerance = 1e-10;  // on the squared gradient norm
};

// Maximum a-posteriori dynamics parameters from observed transitions only.
// `theta` is the starting point and receives the result.
void fit_dynamics_mle(const ParametricModel& domain, std::span<const Transition> transitions,
                      const Priors& priors, std::vector<double>& theta,
                      const MleOptions& options = {});

// Cost-only ascent with dynamics fixed at x.theta.
FitReport ml_irl_fit(const ParametricModel& domain, const TeacherDataset& data,
                     const LearnerConfig& config, Parameters& x,
                     OptimizerState& optimizer);

// As ml_irl_fit, with an extra cost vector shared by all tasks. Requires
// config.model.global_cost.
FitReport global_cost_fit(const ParametricModel& domain, const TeacherDataset& data,
                          const LearnerConfig& config, Parameters& x,
                          OptimizerState& optimizer);

// Per-state action scores interpreted as unnormalized log-probabilities.
struct CloningTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> q;

  static CloningTable zeros(int num_states, int num_actions);
  std::span<const double> row(int s) const {
    return {q.data() + static_cast<std::size_t>(s) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }
  bool operator==(const CloningTable&) const = default;
};

// Maximizes, state by state, the demonstration and feedback likelihoods of
// the rows plus the cost prior. Rows of states absent from `data` are left
// untouched.
void cloning_fit(const TeacherDataset& data, int task, const ModelOptions& options,
                 const Schedule& schedule, CloningTable& table);

DeterministicPolicy cloning_policy(const CloningTable& table);

}  // namespace bam

#endif  // BAM_BASELINES_HPP_
