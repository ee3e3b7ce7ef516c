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

#include "bam/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bam/error.hpp"

namespace bam {

namespace {

void check_inputs(const TransitionModel& model, std::span<const double> cost,
                  double beta, int steps) {
  if (steps < 1) throw ValidationError("planning needs at least one backup step");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("rationality coefficient must be finite and >= 0");
  }
  validate_cost(cost, model.num_states());
  model.validate();
}

void check_finite(std::span<const double> v, int step) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericalError("soft value iteration diverged at step " +
                           std::to_string(step));
    }
  }
}

}  // namespace

PlanWithGradients plan_with_gradients(const TransitionModel& model,
                                      const CostModel& cost, double beta,
                                      int steps) {
  check_inputs(model, cost.cost, beta, steps);
  const int S = model.num_states();
  const int A = model.num_actions();
  const int P = model.param_dim();
  const int J = cost.param_dim;
  const std::size_t SA = static_cast<std::size_t>(S) * A;

  PlanWithGradients out;
  SoftPlan& plan = out.plan;
  plan = {S, A, beta, steps, std::vector<double>(SA, 0.0), {}};
  GradientTensors& g = out.gradients;
  g.num_states = S;
  g.num_actions = A;
  g.theta_dim = P;
  g.phi_dim = J;
  g.dq_dtheta.assign(SA * P, 0.0);
  g.dq_dphi.assign(SA * J, 0.0);

  std::vector<double> v_prev(S, 0.0), v_next(S, 0.0), pi(SA);
  std::vector<double> dv_theta(static_cast<std::size_t>(S) * P, 0.0);
  std::vector<double> dv_phi(static_cast<std::size_t>(S) * J, 0.0);
  std::vector<double> next_theta(dv_theta.size()), next_phi(dv_phi.size());

  for (int t = 1; t <= steps; ++t) {
    detail::soft_backup(model, cost.cost, v_prev, beta, plan.q, v_next, pi);
    check_finite(v_next, t);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::size_t row = static_cast<std::size_t>(s) * A + a;
        double* qt = g.dq_dtheta.data() + row * P;
        double* qp = g.dq_dphi.data() + row * J;
        std::fill(qt, qt + P, 0.0);
        std::fill(qp, qp + J, 0.0);
        for (const ParamDerivative& d : cost.gradient(s)) qp[d.index] -= d.value;
        const auto succ = model.successors(s, a);
        const int offset = model.row_offset(s, a);
        for (std::size_t k = 0; k < succ.size(); ++k) {
          const double p = succ[k].probability;
          const int sn = succ[k].state;
          for (const ParamDerivative& d : model.log_derivative(offset + static_cast<int>(k))) {
            qt[d.index] += p * d.value * v_prev[sn];
          }
          const double* vt = dv_theta.data() + static_cast<std::size_t>(sn) * P;
          for (int i = 0; i < P; ++i) qt[i] += p * vt[i];
          const double* vp = dv_phi.data() + static_cast<std::size_t>(sn) * J;
          for (int i = 0; i < J; ++i) qp[i] += p * vp[i];
        }
      }
      double* nt = next_theta.data() + static_cast<std::size_t>(s) * P;
      double* np = next_phi.data() + static_cast<std::size_t>(s) * J;
      std::fill(nt, nt + P, 0.0);
      std::fill(np, np + J, 0.0);
      for (int a = 0; a < A; ++a) {
        const std::size_t row = static_cast<std::size_t>(s) * A + a;
        const double w = pi[row] * (1.0 + beta * (plan.q[row] - v_next[s]));
        if (w == 0.0) continue;
        const double* qt = g.dq_dtheta.data() + row * P;
        const double* qp = g.dq_dphi.data() + row * J;
        for (int i = 0; i < P; ++i) nt[i] += w * qt[i];
        for (int i = 0; i < J; ++i) np[i] += w * qp[i];
      }
    }
    std::swap(v_prev, v_next);
    std::swap(dv_theta, next_theta);
    std::swap(dv_phi, next_phi);
  }
  plan.v = std::move(v_prev);
  g.dv_dtheta = std::move(dv_theta);
  g.dv_dphi = std::move(dv_phi);
  return out;
}

PlanTrace::PlanTrace(const TransitionModel& model, std::span<const double> cost,
                     double beta, int steps)
    : model_(&model) {
  check_inputs(model, cost, beta, steps);
  const int S = model.num_states();
  const int A = model.num_actions();
  const std::size_t SA = static_cast<std::size_t>(S) * A;
  q_.assign(SA * steps, 0.0);
  pi_.assign(SA * steps, 0.0);
  v_.assign(static_cast<std::size_t>(S) * (steps + 1), 0.0);
  for (int t = 1; t <= steps; ++t) {
    std::span<double> q(q_.data() + SA * (t - 1), SA);
    std::span<double> pi(pi_.data() + SA * (t - 1), SA);
    std::span<const double> v_prev(v_.data() + static_cast<std::size_t>(S) * (t - 1), S);
    std::span<double> v(v_.data() + static_cast<std::size_t>(S) * t, S);
    detail::soft_backup(model, cost, v_prev, beta, q, v, pi);
    check_finite(v, t);
  }
  plan_ = {S, A, beta, steps,
           std::vector<double>(q_.end() - static_cast<std::ptrdiff_t>(SA), q_.end()),
           std::vector<double>(v_.end() - S, v_.end())};
}

void PlanTrace::backpropagate(std::span<const double> dq,
                              std::span<double> grad_theta,
                              std::span<double> grad_cost) const {
  const TransitionModel& model = *model_;
  const int S = plan_.num_states;
  const int A = plan_.num_actions;
  const double beta = plan_.beta;
  const std::size_t SA = static_cast<std::size_t>(S) * A;
  const bool want_theta = !grad_theta.empty() && model.param_dim() > 0;

  std::vector<double> gq(dq.begin(), dq.end());
  std::vector<double> gv(S);
  for (int t = plan_.steps; t >= 1; --t) {
    const double* v_prev = v_.data() + static_cast<std::size_t>(S) * (t - 1);
    std::fill(gv.begin(), gv.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double g = gq[static_cast<std::size_t>(s) * A + a];
        if (g == 0.0) continue;
        grad_cost[s] -= g;
        if (t == 1 && !want_theta) continue;
        const auto succ = model.successors(s, a);
        const int offset = model.row_offset(s, a);
        for (std::size_t k = 0; k < succ.size(); ++k) {
          const double gp = g * succ[k].probability;
          gv[succ[k].state] += gp;
          if (!want_theta || t == 1) continue;
          const double scale = gp * v_prev[succ[k].state];
          for (const ParamDerivative& d : model.log_derivative(offset + static_cast<int>(k))) {
            grad_theta[d.index] += scale * d.value;
          }
        }
      }
    }
    if (t == 1) break;
    const double* q = q_.data() + SA * (t - 2);
    const double* pi = pi_.data() + SA * (t - 2);
    const double* v = v_prev;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::size_t row = static_cast<std::size_t>(s) * A + a;
        gq[row] = gv[s] * pi[row] * (1.0 + beta * (q[row] - v[s]));
      }
    }
  }
}

}  // namespace bam
