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

#include "bam/objective.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "bam/error.hpp"
#include "bam/gradients.hpp"

namespace bam {

double gaussian_log_prior(std::span<const double> x, double variance) {
  if (!(variance > 0.0) || std::isinf(variance)) return 0.0;
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return -sum / (2.0 * variance);
}

namespace {

void add_prior_gradient(std::span<const double> x, double variance,
                        std::span<double> grad) {
  if (!(variance > 0.0) || std::isinf(variance)) return;
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] -= x[i] / variance;
}

}  // namespace

int planning_steps(const ModelOptions& options, const ParametricModel& family) {
  return options.steps > 0 ? options.steps : family.default_planning_steps();
}

Parameters Parameters::zeros(const ParametricModel& domain, const ModelOptions& options) {
  Parameters p;
  p.theta.assign(domain.theta_dim(), 0.0);
  p.phi.assign(domain.num_tasks(), std::vector<double>(domain.phi_dim(), 0.0));
  if (options.global_cost) p.phi_global.assign(domain.phi_dim(), 0.0);
  return p;
}

double squared_norm(const Parameters& g, unsigned blocks) {
  double sum = 0.0;
  if (blocks & kThetaBlock) {
    for (double v : g.theta) sum += v * v;
  }
  if (blocks & kCostBlock) {
    for (const auto& phi : g.phi) {
      for (double v : phi) sum += v * v;
    }
    for (double v : g.phi_global) sum += v * v;
  }
  return sum;
}

void add_scaled(Parameters& x, double step, const Parameters& g, unsigned blocks) {
  if (blocks & kThetaBlock) {
    for (std::size_t i = 0; i < x.theta.size(); ++i) x.theta[i] += step * g.theta[i];
  }
  if (blocks & kCostBlock) {
    for (std::size_t t = 0; t < x.phi.size(); ++t) {
      for (std::size_t i = 0; i < x.phi[t].size(); ++i) x.phi[t][i] += step * g.phi[t][i];
    }
    for (std::size_t i = 0; i < x.phi_global.size(); ++i) {
      x.phi_global[i] += step * g.phi_global[i];
    }
  }
}

double ObjectiveTerms::total() const {
  double sum = global_prior + transitions + theta_prior;
  for (double v : demonstrations) sum += v;
  for (double v : feedback) sum += v;
  for (double v : cost_prior) sum += v;
  return sum;
}

Objective::Objective(const ParametricModel& domain, const TeacherDataset& data,
                     ModelOptions options)
    : domain_(&domain), options_(options), steps_(planning_steps(options, domain)) {
  options_.feedback.validate();
  if (!(options_.beta >= 0.0) || !std::isfinite(options_.beta)) {
    throw ValidationError("rationality coefficient must be finite and >= 0");
  }
  validate_dataset(data, domain.num_states(), domain.num_actions());
  const int tasks = domain.num_tasks();
  if (data.num_tasks > tasks) {
    throw ValidationError("dataset refers to more tasks than the environment defines");
  }
  std::vector<std::map<std::pair<int, int>, double>> demo_counts(tasks);
  for (const Demonstration& d : data.demonstrations) {
    for (const StateAction& sa : d.steps) demo_counts[d.task][{sa.state, sa.action}] += 1.0;
  }
  std::vector<std::map<std::tuple<int, int, int>, double>> fb_counts(tasks);
  for (const FeedbackEvent& f : data.feedback) {
    fb_counts[f.task][{f.state, f.action, static_cast<int>(f.signal)}] += 1.0;
  }
  std::map<std::tuple<int, int, int>, double> tr_counts;
  for (const Transition& t : data.transitions) tr_counts[{t.state, t.action, t.next}] += 1.0;

  demos_.resize(tasks);
  feedback_.resize(tasks);
  for (int t = 0; t < tasks; ++t) {
    for (const auto& [key, n] : demo_counts[t]) demos_[t].push_back({key.first, key.second, n});
    for (const auto& [key, n] : fb_counts[t]) {
      feedback_[t].push_back({std::get<0>(key), std::get<1>(key),
                              static_cast<Signal>(std::get<2>(key)), n});
    }
  }
  for (const auto& [key, n] : tr_counts) {
    transitions_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  }
}

bool Objective::has_teacher_data(int task) const {
  return !demos_.at(task).empty() || !feedback_.at(task).empty();
}

void Objective::check_shape(const Parameters& x) const {
  const ParametricModel& d = *domain_;
  bool ok = static_cast<int>(x.theta.size()) == d.theta_dim() &&
            static_cast<int>(x.phi.size()) == d.num_tasks() &&
            x.phi_global.size() ==
                (options_.global_cost ? static_cast<std::size_t>(d.phi_dim()) : 0u);
  for (const auto& phi : x.phi) ok = ok && static_cast<int>(phi.size()) == d.phi_dim();
  if (!ok) throw ValidationError("parameter shapes do not match the environment");
}

CostModel Objective::task_cost(const Parameters& x, int task) const {
  if (options_.global_cost) {
    return task_plus_global_cost(*domain_, x.phi.at(task), x.phi_global, options_.link);
  }
  return cell_cost(*domain_, x.phi.at(task), options_.link);
}

ObjectiveTerms Objective::terms(const Parameters& x) const {
  ObjectiveTerms t;
  evaluate(x, 0u, nullptr, &t);
  return t;
}

double Objective::value_and_gradient(const Parameters& x, unsigned blocks,
                                     Parameters& grad) const {
  grad = Parameters::zeros(*domain_, options_);
  return evaluate(x, blocks, &grad, nullptr);
}

double Objective::evaluate(const Parameters& x, unsigned blocks, Parameters* grad,
                           ObjectiveTerms* out) const {
  check_shape(x);
  const ParametricModel& domain = *domain_;
  const int tasks = domain.num_tasks();
  const int S = domain.num_states();
  const int A = domain.num_actions();
  const bool want_theta = grad != nullptr && (blocks & kThetaBlock);
  const bool want_cost = grad != nullptr && (blocks & kCostBlock);

  ObjectiveTerms terms;
  terms.demonstrations.assign(tasks, 0.0);
  terms.feedback.assign(tasks, 0.0);
  terms.cost_prior.assign(tasks, 0.0);

  const TransitionModel model = domain.model(x.theta);

  for (const TransitionCount& tc : transitions_) {
    const int k = model.find_successor(tc.state, tc.action, tc.next);
    const double p =
        k < 0 ? 0.0 : model.successors(tc.state, tc.action)[k].probability;
    if (p < kTransitionFloor) {
      terms.transitions += tc.count * std::log(kTransitionFloor);
      ++terms.zero_probability_transitions;
      continue;
    }
    terms.transitions += tc.count * std::log(p);
    if (want_theta) {
      for (const ParamDerivative& d :
           model.log_derivative(model.row_offset(tc.state, tc.action) + k)) {
        grad->theta[d.index] += tc.count * d.value;
      }
    }
  }
  terms.theta_prior = gaussian_log_prior(x.theta, options_.priors.theta_variance);
  if (want_theta) add_prior_gradient(x.theta, options_.priors.theta_variance, grad->theta);

  std::vector<double> dq(static_cast<std::size_t>(S) * A);
  std::vector<double> grad_cost(S);
  std::vector<double> probs(A);
  for (int task = 0; task < tasks; ++task) {
    terms.cost_prior[task] = gaussian_log_prior(x.phi[task], options_.priors.phi_variance);
    if (want_cost) add_prior_gradient(x.phi[task], options_.priors.phi_variance, grad->phi[task]);
    if (!has_teacher_data(task)) continue;

    const CostModel cost = task_cost(x, task);
    const PlanTrace trace(model, cost.cost, options_.beta, steps_);
    const SoftPlan& plan = trace.plan();
    std::fill(dq.begin(), dq.end(), 0.0);

    for (const PairCount& pc : demos_[task]) {
      const auto row = plan.q_row(pc.state);
      terms.demonstrations[task] +=
          pc.count * demo_log_likelihood(row, pc.action, options_.beta);
      if (grad == nullptr) continue;
      detail::boltzmann_row(row, options_.beta, probs);
      double* g = dq.data() + static_cast<std::size_t>(pc.state) * A;
      for (int a = 0; a < A; ++a) {
        g[a] += pc.count * options_.beta * ((a == pc.action ? 1.0 : 0.0) - probs[a]);
      }
    }
    for (const SignalCount& sc : feedback_[task]) {
      const auto row = plan.q_row(sc.state);
      terms.feedback[task] +=
          sc.count * feedback_log_likelihood(sc.signal, row, sc.action, options_.feedback);
      if (grad == nullptr) continue;
      const double slope =
          sc.count * feedback_log_slope(sc.signal, advantage(row, sc.action), options_.feedback);
      double* g = dq.data() + static_cast<std::size_t>(sc.state) * A;
      for (int a = 0; a < A; ++a) {
        g[a] += slope * ((a == sc.action ? 1.0 : 0.0) - 1.0 / A);
      }
    }
    if (grad == nullptr) continue;

    std::fill(grad_cost.begin(), grad_cost.end(), 0.0);
    trace.backpropagate(dq, want_theta ? std::span<double>(grad->theta) : std::span<double>(),
                        grad_cost);
    if (!want_cost) continue;
    const int J = domain.phi_dim();
    for (int s = 0; s < S; ++s) {
      if (grad_cost[s] == 0.0) continue;
      for (const ParamDerivative& d : cost.gradient(s)) {
        if (d.index < J) {
          grad->phi[task][d.index] += grad_cost[s] * d.value;
        } else {
          grad->phi_global[d.index - J] += grad_cost[s] * d.value;
        }
      }
    }
  }
  terms.global_prior = gaussian_log_prior(x.phi_global, options_.priors.phi_variance);
  if (want_cost) {
    add_prior_gradient(x.phi_global, options_.priors.phi_variance, grad->phi_global);
  }
  if (out != nullptr) *out = terms;
  return terms.total();
}

}  // namespace bam
