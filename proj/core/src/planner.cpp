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

#include "bam/planner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "bam/error.hpp"

namespace bam {

namespace detail {

double boltzmann_row(std::span<const double> row, double beta,
                     std::span<double> out) {
  const double peak = *std::max_element(row.begin(), row.end());
  double z = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) {
    out[a] = std::exp(beta * (row[a] - peak));
    z += out[a];
  }
  double mean = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) {
    out[a] /= z;
    mean += out[a] * row[a];
  }
  return mean;
}

void soft_backup(const TransitionModel& model, std::span<const double> cost,
                 std::span<const double> v_prev, double beta,
                 std::span<double> q_out, std::span<double> v_out,
                 std::span<double> pi_out) {
  const int num_states = model.num_states();
  const int num_actions = model.num_actions();
  for (int s = 0; s < num_states; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * num_actions;
    for (int a = 0; a < num_actions; ++a) {
      double expected = 0.0;
      for (const Successor& succ : model.successors(s, a)) {
        expected += succ.probability * v_prev[succ.state];
      }
      q_out[base + a] = -cost[s] + expected;
    }
    v_out[s] = boltzmann_row(q_out.subspan(base, num_actions), beta,
                             pi_out.subspan(base, num_actions));
  }
}

}  // namespace detail

namespace {

void check_plan_inputs(const TransitionModel& model,
                       std::span<const double> cost, int steps) {
  if (steps < 1) throw ValidationError("planning needs at least one backup step");
  validate_cost(cost, model.num_states());
  model.validate();
}

}  // namespace

SoftPlan soft_value_iteration(const TransitionModel& model,
                              std::span<const double> cost, double beta,
                              int steps) {
  check_plan_inputs(model, cost, steps);
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("rationality coefficient must be finite and >= 0");
  }
  const int num_states = model.num_states();
  const int num_actions = model.num_actions();
  SoftPlan plan{num_states, num_actions, beta, steps, {}, {}};
  plan.q.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
  plan.v.assign(num_states, 0.0);
  std::vector<double> v_prev(num_states, 0.0);
  std::vector<double> pi(plan.q.size());
  for (int t = 1; t <= steps; ++t) {
    detail::soft_backup(model, cost, v_prev, beta, plan.q, plan.v, pi);
    std::swap(v_prev, plan.v);
  }
  plan.v = std::move(v_prev);
  return plan;
}

SoftPlan hard_value_iteration(const TransitionModel& model,
                              std::span<const double> cost, int steps) {
  check_plan_inputs(model, cost, steps);
  const int num_states = model.num_states();
  const int num_actions = model.num_actions();
  SoftPlan plan{num_states, num_actions,
                std::numeric_limits<double>::infinity(), steps, {}, {}};
  plan.q.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
  std::vector<double> v_prev(num_states, 0.0);
  std::vector<double> v_next(num_states, 0.0);
  for (int t = 1; t <= steps; ++t) {
    for (int s = 0; s < num_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < num_actions; ++a) {
        double expected = 0.0;
        for (const Successor& succ : model.successors(s, a)) {
          expected += succ.probability * v_prev[succ.state];
        }
        const double q = -cost[s] + expected;
        plan.q[static_cast<std::size_t>(s) * num_actions + a] = q;
        best = std::max(best, q);
      }
      v_next[s] = best;
    }
    std::swap(v_prev, v_next);
  }
  plan.v = std::move(v_prev);
  return plan;
}

StochasticPolicy::StochasticPolicy(int num_states, int num_actions,
                                   std::vector<double> probs)
    : states_(num_states), actions_(num_actions), probs_(std::move(probs)) {
  if (probs_.size() != static_cast<std::size_t>(num_states) * num_actions) {
    throw ValidationError("stochastic policy table has the wrong size");
  }
}

int StochasticPolicy::sample(int s, Rng& rng) const {
  const auto p = row(s);
  double u = uniform01(rng);
  for (int a = 0; a < actions_; ++a) {
    u -= p[a];
    if (u < 0.0) return a;
  }
  return actions_ - 1;
}

StochasticPolicy boltzmann_policy(const SoftPlan& plan) {
  std::vector<double> probs(plan.q.size());
  std::span<double> out(probs);
  for (int s = 0; s < plan.num_states; ++s) {
    auto dst = out.subspan(static_cast<std::size_t>(s) * plan.num_actions,
                           plan.num_actions);
    if (plan.is_hard()) {
      const auto row = plan.q_row(s);
      const double peak = *std::max_element(row.begin(), row.end());
      int ties = 0;
      for (int a = 0; a < plan.num_actions; ++a) ties += row[a] == peak;
      for (int a = 0; a < plan.num_actions; ++a) {
        dst[a] = row[a] == peak ? 1.0 / ties : 0.0;
      }
    } else {
      detail::boltzmann_row(plan.q_row(s), plan.beta, dst);
    }
  }
  return StochasticPolicy(plan.num_states, plan.num_actions, std::move(probs));
}

DeterministicPolicy::DeterministicPolicy(int num_actions,
                                         std::vector<std::uint32_t> maximizers)
    : actions_(num_actions), maximizers_(std::move(maximizers)) {
  if (num_actions <= 0 || num_actions > 32) {
    throw ValidationError("deterministic policy supports 1..32 actions");
  }
  for (std::uint32_t m : maximizers_) {
    if (m == 0 || (num_actions < 32 && (m >> num_actions) != 0)) {
      throw ValidationError("deterministic policy has an invalid action set");
    }
  }
}

DeterministicPolicy DeterministicPolicy::uniform(int num_states,
                                                 int num_actions) {
  const std::uint32_t all =
      num_actions == 32 ? ~0u : ((1u << num_actions) - 1u);
  return DeterministicPolicy(num_actions,
                             std::vector<std::uint32_t>(num_states, all));
}

bool DeterministicPolicy::is_tied(int s) const {
  return std::popcount(maximizers_[s]) > 1;
}

int DeterministicPolicy::lowest(int s) const {
  return std::countr_zero(maximizers_[s]);
}

int DeterministicPolicy::act(int s, Rng& rng) const {
  std::uint32_t mask = maximizers_[s];
  const int count = std::popcount(mask);
  if (count == 1) return std::countr_zero(mask);
  int pick = uniform_index(rng, count);
  while (pick-- > 0) mask &= mask - 1;
  return std::countr_zero(mask);
}

DeterministicPolicy greedy_policy(const SoftPlan& plan, TieBreak tie_break) {
  std::vector<std::uint32_t> maximizers(plan.num_states, 0u);
  for (int s = 0; s < plan.num_states; ++s) {
    const auto row = plan.q_row(s);
    const double peak = *std::max_element(row.begin(), row.end());
    const double slack = kTieTolerance * (1.0 + std::abs(peak));
    for (int a = 0; a < plan.num_actions; ++a) {
      if (row[a] >= peak - slack) {
        maximizers[s] |= 1u << a;
        if (tie_break == TieBreak::kLowestIndex) break;
      }
    }
  }
  return DeterministicPolicy(plan.num_actions, std::move(maximizers));
}

}  // namespace bam
