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

#include "bam/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bam/error.hpp"
#include "bam/planner.hpp"

namespace bam {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-12;
constexpr double kMaxStep = 1e6;
constexpr double kStationary = 1e-20;
constexpr double kMinQuasiNewtonStep = 1.0 / 64.0;
constexpr double kMaxMove = 4.0;

double try_evaluate(const Objective& objective, const Parameters& x, unsigned block,
                    Parameters& grad, OptimizerState& counters) {
  ++counters.evaluations;
  try {
    return objective.value_and_gradient(x, block, grad);
  } catch (const NumericalError&) {
    return std::nan("");
  }
}

}  // namespace

const char* ascent_method_name(AscentMethod method) {
  return method == AscentMethod::kLbfgs ? "lbfgs" : "gradient";
}

AscentMethod parse_ascent_method(std::string_view name) {
  if (name == "gradient") return AscentMethod::kGradient;
  if (name == "lbfgs") return AscentMethod::kLbfgs;
  throw ValidationError("unknown ascent method '" + std::string(name) + "'");
}

namespace {

void gather(const Parameters& p, unsigned block, std::vector<double>& out) {
  out.clear();
  if (block & kThetaBlock) out.insert(out.end(), p.theta.begin(), p.theta.end());
  if (block & kCostBlock) {
    for (const auto& phi : p.phi) out.insert(out.end(), phi.begin(), phi.end());
    out.insert(out.end(), p.phi_global.begin(), p.phi_global.end());
  }
}

void scatter(const std::vector<double>& v, unsigned block, Parameters& p) {
  std::size_t i = 0;
  if (block & kThetaBlock) {
    for (double& t : p.theta) t = v[i++];
  }
  if (block & kCostBlock) {
    for (auto& phi : p.phi) {
      for (double& t : phi) t = v[i++];
    }
    for (double& t : p.phi_global) t = v[i++];
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// Limited-memory inverse Hessian of -f applied to the ascent gradient.
class Lbfgs {
 public:
  static constexpr std::size_t kMemory = 8;

  bool empty() const { return s_.empty(); }

  void update(std::vector<double> s, std::vector<double> y) {
    // y is the change of the ascent gradient; -y is the change of grad(-f).
    for (double& v : y) v = -v;
    const double sy = dot(s, y);
    if (!(sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)))) return;
    if (s_.size() == kMemory) {
      s_.erase(s_.begin());
      y_.erase(y_.begin());
      rho_.erase(rho_.begin());
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    rho_.push_back(1.0 / sy);
  }

  std::vector<double> direction(const std::vector<double>& g) const {
    std::vector<double> q = g;
    std::vector<double> alpha(s_.size());
    for (std::size_t k = s_.size(); k-- > 0;) {
      alpha[k] = rho_[k] * dot(s_[k], q);
      for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * y_[k][i];
    }
    const double gamma = dot(s_.back(), y_.back()) / dot(y_.back(), y_.back());
    for (double& v : q) v *= gamma;
    for (std::size_t k = 0; k < s_.size(); ++k) {
      const double b = rho_[k] * dot(y_[k], q);
      for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - b) * s_[k][i];
    }
    return q;
  }

 private:
  std::vector<std::vector<double>> s_, y_;
  std::vector<double> rho_;
};

}  // namespace

AscentResult ascend(const Objective& objective, Parameters& x, unsigned block,
                    int max_steps, double& step, OptimizerState& counters,
                    AscentMethod method) {
  AscentResult result;
  Parameters grad;
  double f = try_evaluate(objective, x, block, grad, counters);
  result.value = f;
  if (!std::isfinite(f)) {
    result.diverged = true;
    return result;
  }
  Lbfgs memory;
  std::vector<double> flat_x, flat_g, next_x, next_g, flat_d;
  Parameters trial, trial_grad;
  Parameters direction = grad;
  for (int i = 0; i < max_steps; ++i) {
    const double gg = squared_norm(grad, block);
    if (gg < kStationary) break;
    // Plain gradient steps use the adaptive block step; quasi-Newton steps
    // start from the unit step of the scaled direction.
    bool quasi_newton = method == AscentMethod::kLbfgs && !memory.empty();
    double slope = gg;
    if (quasi_newton) {
      gather(grad, block, flat_g);
      flat_d = memory.direction(flat_g);
      slope = dot(flat_g, flat_d);
      double largest = 0.0;
      for (double v : flat_d) largest = std::max(largest, std::abs(v));
      if (slope > 0.0 && std::isfinite(slope)) {
        // Parameters live on logit scales; no single coordinate moves more
        // than kMaxMove per step.
        if (largest > kMaxMove) {
          for (double& v : flat_d) v *= kMaxMove / largest;
          slope *= kMaxMove / largest;
        }
        scatter(flat_d, block, direction);
      } else {
        memory = Lbfgs{};
        quasi_newton = false;
        slope = gg;
      }
    }
    const Parameters& d = quasi_newton ? direction : grad;
    double t = quasi_newton ? 1.0 : step;
    bool accepted = false;
    while (t >= (quasi_newton ? kMinQuasiNewtonStep : kMinStep)) {
      trial = x;
      add_scaled(trial, t, d, block);
      const double ft = try_evaluate(objective, trial, block, trial_grad, counters);
      if (std::isfinite(ft) && ft >= f + kArmijo * t * slope) {
        if (method == AscentMethod::kLbfgs) {
          gather(x, block, flat_x);
          gather(trial, block, next_x);
          gather(grad, block, flat_g);
          gather(trial_grad, block, next_g);
          for (std::size_t k = 0; k < flat_x.size(); ++k) {
            next_x[k] -= flat_x[k];
            next_g[k] -= flat_g[k];
          }
          memory.update(next_x, next_g);
        }
        std::swap(x, trial);
        std::swap(grad, trial_grad);
        f = ft;
        if (!quasi_newton) step = std::min(t * 2.0, kMaxStep);
        accepted = true;
        break;
      }
      t *= 0.5;
      if (!quasi_newton) step = t;
    }
    if (!accepted && quasi_newton) {
      // Poor curvature model: drop it and retry with a gradient step.
      memory = Lbfgs{};
      --i;
      continue;
    }
    if (!accepted) {
      step = std::max(step, kMinStep);
      break;
    }
    ++result.accepted;
    ++counters.iterations;
  }
  result.value = f;
  return result;
}

FitReport alternating_fit(const Objective& objective, Parameters& x,
                          const Schedule& schedule, OptimizerState& optimizer,
                          bool learn_dynamics) {
  FitReport report;
  double previous = objective.value(x);
  ++optimizer.evaluations;
  if (!std::isfinite(previous)) {
    report.diverged = true;
    report.objective = previous;
    report.message = "objective is not finite at the starting point";
    return report;
  }
  for (int outer = 0; outer < schedule.outer_iterations; ++outer) {
    report.outer_iterations = outer + 1;
    double current = previous;
    const AscentResult cost =
        ascend(objective, x, kCostBlock, schedule.cost_steps, optimizer.cost_step,
               optimizer, schedule.method);
    if (cost.diverged) {
      report.diverged = true;
      break;
    }
    current = cost.value;
    if (learn_dynamics && schedule.dynamics_steps > 0) {
      const AscentResult dyn = ascend(objective, x, kThetaBlock, schedule.dynamics_steps,
                                      optimizer.dynamics_step, optimizer, schedule.method);
      if (dyn.diverged) {
        report.diverged = true;
        break;
      }
      current = dyn.value;
    }
    const double gain = (current - previous) / std::max(1.0, std::abs(previous));
    previous = current;
    if (gain < schedule.tolerance) {
      report.converged = true;
      break;
    }
  }
  report.objective = previous;
  report.zero_probability_transitions = objective.terms(x).zero_probability_transitions;
  if (report.diverged) report.message = "objective became non-finite; kept last finite iterate";
  return report;
}

FitReport bam_fit(const ParametricModel& domain, const TeacherDataset& data,
                  const LearnerConfig& config, Parameters& x,
                  OptimizerState& optimizer) {
  const Objective objective(domain, data, config.model);
  return alternating_fit(objective, x, config.schedule, optimizer, true);
}

std::vector<DeterministicPolicy> model_policies(const ParametricModel& domain,
                                                const ModelOptions& options,
                                                const Parameters& x) {
  const TransitionModel model = domain.model(x.theta);
  const TeacherDataset none;
  const Objective shape(domain, none, options);
  std::vector<DeterministicPolicy> out;
  for (int task = 0; task < domain.num_tasks(); ++task) {
    const CostModel cost = shape.task_cost(x, task);
    out.push_back(greedy_policy(
        soft_value_iteration(model, cost.cost, options.beta, shape.steps())));
  }
  return out;
}

}  // namespace bam
