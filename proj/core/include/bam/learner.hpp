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

#ifndef BAM_LEARNER_HPP_
#define BAM_LEARNER_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "bam/objective.hpp"
#include "bam/planner.hpp"

namespace bam {

// Search direction inside each ascent block. Both use the same Armijo
// backtracking; kLbfgs rescales the gradient with a limited-memory inverse
// Hessian estimate that is rebuilt at the start of every block.
enum class AscentMethod { kGradient, kLbfgs };

const char* ascent_method_name(AscentMethod method);
AscentMethod parse_ascent_method(std::string_view name);

struct Schedule {
  AscentMethod method = AscentMethod::kLbfgs;
  int cost_steps = 25;
  int dynamics_steps = 25;
  int outer_iterations = 20;
  double tolerance = 1e-6;
};

struct OptimizerState {
  double cost_step = 0.01;
  double dynamics_step = 0.01;
  long iterations = 0;   // accepted ascent steps
  long evaluations = 0;  // objective evaluations
  bool operator==(const OptimizerState&) const = default;
};

struct LearnerConfig {
  ModelOptions model;
  Schedule schedule;
};

struct FitReport {
  int outer_iterations = 0;
  double objective = 0.0;
  bool converged = false;
  bool diverged = false;
  int zero_probability_transitions = 0;
  std::string message;
};

struct AscentResult {
  double value = 0.0;
  int accepted = 0;
  bool diverged = false;
};

// Up to `max_steps` gradient-ascent steps on `block` with a backtracking
// (Armijo) line search. `step` is the adaptive step size, carried between
// calls. Accepted iterates never decrease the objective.
AscentResult ascend(const Objective& objective, Parameters& x, unsigned block,
                    int max_steps, double& step, OptimizerState& counters,
                    AscentMethod method = AscentMethod::kGradient);

// Alternates cost and dynamics ascent blocks until the relative objective
// improvement of a full alternation drops below the schedule tolerance.
FitReport alternating_fit(const Objective& objective, Parameters& x,
                          const Schedule& schedule, OptimizerState& optimizer,
                          bool learn_dynamics);

// Joint fit of dynamics and task costs on all of `data`.
FitReport bam_fit(const ParametricModel& domain, const TeacherDataset& data,
                  const LearnerConfig& config, Parameters& x,
                  OptimizerState& optimizer);

// Greedy policy per task under parameters `x`.
std::vector<DeterministicPolicy> model_policies(const ParametricModel& domain,
                                                const ModelOptions& options,
                                                const Parameters& x);

}  // namespace bam

#endif  // BAM_LEARNER_HPP_
