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

#ifndef BAM_OBJECTIVE_HPP_
#define BAM_OBJECTIVE_HPP_

#include <span>
#include <vector>

#include "bam/cost.hpp"
#include "bam/dataset.hpp"
#include "bam/parametric.hpp"
#include "bam/teacher.hpp"

namespace bam {

// Zero-mean Gaussian log-priors (unnormalized). A non-positive or infinite
// variance gives a flat prior.
struct Priors {
  double theta_variance = 10.0;
  double phi_variance = 10.0;
};

double gaussian_log_prior(std::span<const double> x, double variance);

struct ModelOptions {
  double beta = 5.0;
  int steps = 0;  // 0: the model family's default
  CostLink link = CostLink::kSoftplus;
  // Every task's cost is C_global + C_task.
  bool global_cost = false;
  Priors priors;
  FeedbackParams feedback;
};

int planning_steps(const ModelOptions& options, const ParametricModel& family);

struct Parameters {
  std::vector<double> theta;
  std::vector<std::vector<double>> phi;  // one vector per task
  std::vector<double> phi_global;        // empty unless global_cost

  static Parameters zeros(const ParametricModel& domain, const ModelOptions& options);
  bool operator==(const Parameters&) const = default;
};

enum Block : unsigned { kThetaBlock = 1u, kCostBlock = 2u, kAllBlocks = 3u };

double squared_norm(const Parameters& g, unsigned blocks);
// x += step * g on the selected blocks.
void add_scaled(Parameters& x, double step, const Parameters& g, unsigned blocks);

inline constexpr double kTransitionFloor = 1e-12;

struct ObjectiveTerms {
  std::vector<double> demonstrations;  // per task
  std::vector<double> feedback;        // per task
  std::vector<double> cost_prior;      // per task
  double global_prior = 0.0;
  double transitions = 0.0;
  double theta_prior = 0.0;
  // Observed transitions whose model probability fell below the floor.
  int zero_probability_transitions = 0;

  double total() const;
};

// The joint log-likelihood of teacher data and observed transitions plus
// log-priors, as a function of dynamics and cost parameters.
class Objective {
 public:
  Objective(const ParametricModel& domain, const TeacherDataset& data, ModelOptions options);

  const ParametricModel& domain() const { return *domain_; }
  const ModelOptions& options() const { return options_; }
  int steps() const { return steps_; }
  bool has_teacher_data(int task) const;

  CostModel task_cost(const Parameters& x, int task) const;

  ObjectiveTerms terms(const Parameters& x) const;
  double value(const Parameters& x) const { return terms(x).total(); }

  // Returns the objective value and writes its gradient on `blocks` into
  // *grad (other blocks are zero). Throws NumericalError if planning
  // diverges.
  double value_and_gradient(const Parameters& x, unsigned blocks, Parameters& grad) const;

 private:
  struct PairCount {
    int state;
    int action;
    double count;
  };
  struct SignalCount {
    int state;
    int action;
    Signal signal;
    double count;
  };
  struct TransitionCount {
    int state;
    int action;
    int next;
    double count;
  };

  double evaluate(const Parameters& x, unsigned blocks, Parameters* grad,
                  ObjectiveTerms* terms) const;
  void check_shape(const Parameters& x) const;

  const ParametricModel* domain_;
  ModelOptions options_;
  int steps_;
  std::vector<std::vector<PairCount>> demos_;
  std::vector<std::vector<SignalCount>> feedback_;
  std::vector<TransitionCount> transitions_;
};

}  // namespace bam

#endif  // BAM_OBJECTIVE_HPP_
