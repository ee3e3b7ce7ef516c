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

#ifndef BAM_SIMULATED_TEACHER_HPP_
#define BAM_SIMULATED_TEACHER_HPP_

#include <optional>
#include <vector>

#include "bam/dataset.hpp"
#include "bam/domain.hpp"
#include "bam/planner.hpp"
#include "bam/rng.hpp"
#include "bam/teacher.hpp"

namespace bam {

enum class DemoMode { kGreedyOptimal, kBoltzmann };

struct TeacherOptions {
  DemoMode mode = DemoMode::kGreedyOptimal;
  // Boltzmann mode only.
  double beta = 5.0;
  int soft_steps = 0;  // 0: use the environment horizon
  FeedbackParams feedback;
};

// Ground-truth plans for every task: hard-max value iteration over the
// environment horizon on the true dynamics and costs.
class TeacherModel {
 public:
  TeacherModel(const Environment& env, TeacherOptions options = {});

  const Environment& environment() const { return *env_; }
  const TeacherOptions& options() const { return options_; }
  const SoftPlan& optimal_plan(int task) const { return optimal_plans_.at(task); }
  const DeterministicPolicy& optimal_policy(int task) const {
    return optimal_policies_.at(task);
  }
  // Boltzmann policy over soft value iteration on the truth.
  const StochasticPolicy& boltzmann(int task) const { return boltzmann_.at(task); }

 private:
  const Environment* env_;
  TeacherOptions options_;
  std::vector<SoftPlan> optimal_plans_;
  std::vector<DeterministicPolicy> optimal_policies_;
  std::vector<StochasticPolicy> boltzmann_;
};

// Runs the teacher on the true dynamics from `start` (or a draw from the
// initial distribution) until it stands on a goal of `task`, then appends
// the synthetic no-op. Every step, including the no-op, is appended to
// data.transitions. Demonstrations hitting the horizon are marked truncated
// and still end with the no-op.
Demonstration simulate_demonstration(const TeacherModel& teacher, int task,
                                     Rng& rng, TeacherDataset& data,
                                     std::optional<int> start = std::nullopt);

// Samples the teacher's A-SABL response to the agent taking `action` in
// `state`, using the true Q-values of `task`.
FeedbackEvent simulate_feedback(const TeacherModel& teacher, int task, int state,
                                int action, long timestamp, Rng& rng);

Signal sample_signal(const FeedbackProbabilities& p, Rng& rng);

}  // namespace bam

#endif  // BAM_SIMULATED_TEACHER_HPP_
