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

#include "bam/simulated_teacher.hpp"

#include <algorithm>

namespace bam {

TeacherModel::TeacherModel(const Environment& env, TeacherOptions options)
    : env_(&env), options_(options) {
  options_.feedback.validate();
  const Domain& domain = *env.domain;
  const int horizon = domain.spec().horizon;
  for (int t = 0; t < domain.num_tasks(); ++t) {
    optimal_plans_.push_back(hard_value_iteration(env.truth, env.true_costs[t], horizon));
    optimal_policies_.push_back(greedy_policy(optimal_plans_.back()));
    if (options_.mode == DemoMode::kBoltzmann) {
      const int steps = options_.soft_steps > 0 ? options_.soft_steps : horizon;
      boltzmann_.push_back(boltzmann_policy(
          soft_value_iteration(env.truth, env.true_costs[t], options_.beta, steps)));
    }
  }
}

Demonstration simulate_demonstration(const TeacherModel& teacher, int task,
                                     Rng& rng, TeacherDataset& data,
                                     std::optional<int> start) {
  const Environment& env = teacher.environment();
  const Domain& domain = *env.domain;
  Demonstration demo;
  demo.task = task;
  int s = start ? *start : domain.initial_distribution().sample(rng);
  const int cap = domain.spec().horizon;
  for (int step = 0; step < cap && !domain.is_goal(task, s); ++step) {
    const int a = teacher.options().mode == DemoMode::kBoltzmann
                      ? teacher.boltzmann(task).sample(s, rng)
                      : teacher.optimal_policy(task).act(s, rng);
    const int next = env.truth.sample(s, a, rng);
    demo.steps.push_back({s, a});
    data.transitions.push_back({s, a, next});
    s = next;
  }
  demo.truncated = !domain.is_goal(task, s);
  const int after = env.truth.sample(s, domain.noop(), rng);
  demo.steps.push_back({s, domain.noop()});
  data.transitions.push_back({s, domain.noop(), after});
  demo.terminal_noop = true;
  data.num_tasks = std::max(data.num_tasks, domain.num_tasks());
  data.demonstrations.push_back(demo);
  return demo;
}

Signal sample_signal(const FeedbackProbabilities& p, Rng& rng) {
  const double u = uniform01(rng);
  if (u < p.positive) return Signal::kPositive;
  if (u < p.positive + p.negative) return Signal::kNegative;
  return Signal::kNone;
}

FeedbackEvent simulate_feedback(const TeacherModel& teacher, int task, int state,
                                int action, long timestamp, Rng& rng) {
  const auto row = teacher.optimal_plan(task).q_row(state);
  const FeedbackProbabilities p =
      feedback_probabilities(advantage(row, action), teacher.options().feedback);
  return {task, state, action, sample_signal(p, rng), timestamp};
}

}  // namespace bam
