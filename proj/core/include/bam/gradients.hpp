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

#ifndef BAM_GRADIENTS_HPP_
#define BAM_GRADIENTS_HPP_

#include <span>
#include <vector>

#include "bam/cost.hpp"
#include "bam/mdp.hpp"
#include "bam/planner.hpp"

namespace bam {

// Dense Jacobians of the final soft Q and V with respect to the dynamics
// parameters (theta) and cost parameters (phi).
struct GradientTensors {
  int num_states = 0;
  int num_actions = 0;
  int theta_dim = 0;
  int phi_dim = 0;
  std::vector<double> dq_dtheta;  // [s][a][k]
  std::vector<double> dq_dphi;    // [s][a][j]
  std::vector<double> dv_dtheta;  // [s][k]
  std::vector<double> dv_dphi;    // [s][j]

  double q_theta(int s, int a, int k) const {
    return dq_dtheta[(static_cast<std::size_t>(s) * num_actions + a) * theta_dim + k];
  }
  double q_phi(int s, int a, int j) const {
    return dq_dphi[(static_cast<std::size_t>(s) * num_actions + a) * phi_dim + j];
  }
  double v_theta(int s, int k) const {
    return dv_dtheta[static_cast<std::size_t>(s) * theta_dim + k];
  }
  double v_phi(int s, int j) const {
    return dv_dphi[static_cast<std::size_t>(s) * phi_dim + j];
  }
};

struct PlanWithGradients {
  SoftPlan plan;
  GradientTensors gradients;
};

// Soft value iteration carrying exact forward-mode derivatives. `model`
// must provide log-derivatives for theta (param_dim() may be 0).
PlanWithGradients plan_with_gradients(const TransitionModel& model,
                                      const CostModel& cost, double beta,
                                      int steps);

// Soft value iteration that keeps every intermediate Q table so that the
// gradient of any scalar function of the final Q can be pulled back in a
// single reverse sweep.
class PlanTrace {
 public:
  // `model` must outlive the trace. Throws NumericalError naming the step
  // at which a value became non-finite.
  PlanTrace(const TransitionModel& model, std::span<const double> cost,
            double beta, int steps);

  const SoftPlan& plan() const { return plan_; }

  // Accumulates dJ/dtheta into grad_theta (skipped when empty) and dJ/dC(s)
  // into grad_cost, given dJ/dQ of the final table.
  void backpropagate(std::span<const double> dq, std::span<double> grad_theta,
                     std::span<double> grad_cost) const;

 private:
  const TransitionModel* model_;
  SoftPlan plan_;
  std::vector<double> q_;   // steps tables of S*A
  std::vector<double> pi_;  // steps tables of S*A
  std::vector<double> v_;   // steps + 1 vectors of S, v_[0] = 0
};

}  // namespace bam

#endif  // BAM_GRADIENTS_HPP_
