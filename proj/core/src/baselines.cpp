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

#include "bam/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bam/error.hpp"
#include "bam/teacher.hpp"

namespace bam {

void fit_dynamics_mle(const ParametricModel& domain, std::span<const Transition> transitions,
                      const Priors& priors, std::vector<double>& theta,
                      const MleOptions& options) {
  TeacherDataset data;
  data.transitions.assign(transitions.begin(), transitions.end());
  ModelOptions model;
  model.priors = priors;
  const Objective objective(domain, data, model);
  Parameters x = Parameters::zeros(domain, model);
  if (theta.size() == x.theta.size()) x.theta = theta;
  OptimizerState counters;
  double step = 0.1;
  Parameters grad;
  for (int done = 0; done < options.max_steps;) {
    const AscentResult r =
        ascend(objective, x, kThetaBlock, 50, step, counters, AscentMethod::kLbfgs);
    done += std::max(r.accepted, 1);
    if (r.accepted == 0) break;
    objective.value_and_gradient(x, kThetaBlock, grad);
    if (squared_norm(grad, kThetaBlock) < options.gradient_tolerance) break;
  }
  theta = std::move(x.theta);
}

FitReport ml_irl_fit(const ParametricModel& domain, const TeacherDataset& data,
                     const LearnerConfig& config, Parameters& x,
                     OptimizerState& optimizer) {
  const Objective objective(domain, data, config.model);
  return alternating_fit(objective, x, config.schedule, optimizer, false);
}

FitReport global_cost_fit(const ParametricModel& domain, const TeacherDataset& data,
                          const LearnerConfig& config, Parameters& x,
                          OptimizerState& optimizer) {
  if (!config.model.global_cost) {
    throw ValidationError("global-cost fitting needs model.global_cost enabled");
  }
  return ml_irl_fit(domain, data, config, x, optimizer);
}

CloningTable CloningTable::zeros(int num_states, int num_actions) {
  return {num_states, num_actions,
          std::vector<double>(static_cast<std::size_t>(num_states) * num_actions, 0.0)};
}

namespace {

struct RowData {
  std::vector<double> demo_counts;
  std::vector<std::pair<int, Signal>> feedback;
};

double row_objective(std::span<const double> q, const RowData& data,
                     const ModelOptions& options, std::span<double> grad) {
  const int A = static_cast<int>(q.size());
  double value = gaussian_log_prior(q, options.priors.phi_variance);
  const double var = options.priors.phi_variance;
  const bool prior = var > 0.0 && !std::isinf(var);
  for (int a = 0; a < A; ++a) grad[a] = prior ? -q[a] / var : 0.0;
  double total = 0.0;
  for (double c : data.demo_counts) total += c;
  if (total > 0.0) {
    std::vector<double> probs(A);
    const double peak = *std::max_element(q.begin(), q.end());
    double z = 0.0;
    for (int a = 0; a < A; ++a) z += (probs[a] = std::exp(options.beta * (q[a] - peak)));
    for (int a = 0; a < A; ++a) {
      probs[a] /= z;
      if (data.demo_counts[a] > 0.0) {
        value += data.demo_counts[a] * demo_log_likelihood(q, a, options.beta);
      }
    }
    for (int a = 0; a < A; ++a) {
      grad[a] += options.beta * (data.demo_counts[a] - total * probs[a]);
    }
  }
  for (const auto& [action, signal] : data.feedback) {
    value += feedback_log_likelihood(signal, q, action, options.feedback);
    const double slope =
        feedback_log_slope(signal, advantage(q, action), options.feedback);
    for (int a = 0; a < A; ++a) grad[a] += slope * ((a == action ? 1.0 : 0.0) - 1.0 / A);
  }
  return value;
}

}  // namespace

void cloning_fit(const TeacherDataset& data, int task, const ModelOptions& options,
                 const Schedule& schedule, CloningTable& table) {
  const int A = table.num_actions;
  std::map<int, RowData> rows;
  auto row_for = [&](int s) -> RowData& {
    if (s < 0 || s >= table.num_states || A <= 0) {
      throw ValidationError("cloning data refers to a state outside the table");
    }
    RowData& r = rows[s];
    if (r.demo_counts.empty()) r.demo_counts.assign(A, 0.0);
    return r;
  };
  for (const Demonstration& d : data.demonstrations) {
    if (d.task != task) continue;
    for (const StateAction& sa : d.steps) row_for(sa.state).demo_counts.at(sa.action) += 1.0;
  }
  for (const FeedbackEvent& f : data.feedback) {
    if (f.task != task) continue;
    row_for(f.state).feedback.emplace_back(f.action, f.signal);
  }
  const int max_steps = schedule.cost_steps * schedule.outer_iterations;
  std::vector<double> grad(A), trial(A), trial_grad(A);
  for (const auto& [s, rd] : rows) {
    std::span<double> q(table.q.data() + static_cast<std::size_t>(s) * A, A);
    double f = row_objective(q, rd, options, grad);
    double step = 0.1;
    for (int i = 0; i < max_steps; ++i) {
      double gg = 0.0;
      for (double g : grad) gg += g * g;
      if (gg < 1e-20) break;
      bool accepted = false;
      while (step >= 1e-12) {
        for (int a = 0; a < A; ++a) trial[a] = q[a] + step * grad[a];
        const double ft = row_objective(trial, rd, options, trial_grad);
        if (std::isfinite(ft) && ft >= f + 1e-4 * step * gg) {
          std::copy(trial.begin(), trial.end(), q.begin());
          std::swap(grad, trial_grad);
          f = ft;
          step *= 2.0;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
  }
}

DeterministicPolicy cloning_policy(const CloningTable& table) {
  SoftPlan plan;
  plan.num_states = table.num_states;
  plan.num_actions = table.num_actions;
  plan.beta = 1.0;
  plan.steps = 1;
  plan.q = table.q;
  plan.v.assign(table.num_states, 0.0);
  return greedy_policy(plan);
}

}  // namespace bam
