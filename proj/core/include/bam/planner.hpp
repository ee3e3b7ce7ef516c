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

#ifndef BAM_PLANNER_HPP_
#define BAM_PLANNER_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bam/mdp.hpp"
#include "bam/rng.hpp"

namespace bam {

// Result of a finite number of (soft) Bellman backups. `q` is row-major
// [state x action]. For hard-max plans beta is +infinity.
struct SoftPlan {
  int num_states = 0;
  int num_actions = 0;
  double beta = 0.0;
  int steps = 0;
  std::vector<double> q;
  std::vector<double> v;

  std::span<const double> q_row(int s) const {
    return {q.data() + static_cast<std::size_t>(s) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }
  double q_at(int s, int a) const {
    return q[static_cast<std::size_t>(s) * num_actions + a];
  }
  bool is_hard() const { return beta == std::numeric_limits<double>::infinity(); }
};

// Soft value iteration from V_0 = 0:
//   Q_t(s,a) = -C(s) + sum_s' T(s,a,s') V_{t-1}(s')
//   V_t(s)   = sum_a pi_t(s,a) Q_t(s,a),  pi_t(s,.) = softmax(beta Q_t(s,.))
// Validates the model and cost first.
SoftPlan soft_value_iteration(const TransitionModel& model,
                              std::span<const double> cost, double beta,
                              int steps);

// Same recursion with V_t(s) = max_a Q_t(s,a).
SoftPlan hard_value_iteration(const TransitionModel& model,
                              std::span<const double> cost, int steps);

namespace detail {
// Writes softmax(beta * row) into `out` with max-shift; returns the
// Boltzmann-weighted mean of `row`.
double boltzmann_row(std::span<const double> row, double beta,
                     std::span<double> out);
// Unvalidated backups used on hot paths.
void soft_backup(const TransitionModel& model, std::span<const double> cost,
                 std::span<const double> v_prev, double beta,
                 std::span<double> q_out, std::span<double> v_out,
                 std::span<double> pi_out);
}  // namespace detail

class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  StochasticPolicy(int num_states, int num_actions, std::vector<double> probs);

  int num_states() const { return states_; }
  int num_actions() const { return actions_; }
  std::span<const double> row(int s) const {
    return {probs_.data() + static_cast<std::size_t>(s) * actions_,
            static_cast<std::size_t>(actions_)};
  }
  int sample(int s, Rng& rng) const;

 private:
  int states_ = 0;
  int actions_ = 0;
  std::vector<double> probs_;
};

StochasticPolicy boltzmann_policy(const SoftPlan& plan);

enum class TieBreak { kUniformRandom, kLowestIndex };

// Per-state set of maximizing actions; execution draws uniformly among them.
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  DeterministicPolicy(int num_actions, std::vector<std::uint32_t> maximizers);

  // Every action is a maximizer in every state.
  static DeterministicPolicy uniform(int num_states, int num_actions);

  int num_states() const { return static_cast<int>(maximizers_.size()); }
  int num_actions() const { return actions_; }
  std::uint32_t maximizers(int s) const { return maximizers_[s]; }
  bool is_tied(int s) const;
  int lowest(int s) const;
  int act(int s, Rng& rng) const;

  bool operator==(const DeterministicPolicy&) const = default;

 private:
  int actions_ = 0;
  std::vector<std::uint32_t> maximizers_;
};

// Q-values within `tolerance * (1 + |max|)` of the row maximum count as tied.
inline constexpr double kTieTolerance = 1e-10;

DeterministicPolicy greedy_policy(const SoftPlan& plan,
                                  TieBreak tie_break = TieBreak::kUniformRandom);

}  // namespace bam

#endif  // BAM_PLANNER_HPP_
