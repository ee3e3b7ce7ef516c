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

#include <gtest/gtest.h>

#include <cmath>

#include "bam/baselines.hpp"
#include "bam/domain.hpp"
#include "bam/error.hpp"
#include "bam/simulated_teacher.hpp"
#include "support.hpp"

namespace bam {
namespace {

using testing::environment_path;
using testing::grid_environment;
using testing::random_dataset;
using testing::small_environment;

constexpr DomainFamily kFamilies[] = {DomainFamily::kNavigation, DomainFamily::kFarming,
                                      DomainFamily::kGravity};

// Property: single accepted steps never lower the objective, for every
// block and both search directions.
TEST(Ascent, AcceptedStepsNeverDecreaseTheObjective) {
  Rng rng = make_rng(51, {});
  for (DomainFamily family : kFamilies) {
    for (int trial = 0; trial < 6; ++trial) {
      const Environment env = small_environment(family, rng);
      const TeacherDataset data = random_dataset(*env.domain, env.truth, rng, 6, 6, 10);
      ModelOptions options;
      options.global_cost = trial % 2 == 1;
      const Objective objective(*env.domain, data, options);
      for (AscentMethod method : {AscentMethod::kGradient, AscentMethod::kLbfgs}) {
        Parameters x = Parameters::zeros(*env.domain, options);
        OptimizerState counters;
        double step = 0.01;
        double previous = objective.value(x);
        for (int k = 0; k < 30; ++k) {
          const unsigned block = k % 2 == 0 ? kCostBlock : kThetaBlock;
          const AscentResult r = ascend(objective, x, block, 3, step, counters, method);
          ASSERT_FALSE(r.diverged);
          const double now = objective.value(x);
          EXPECT_EQ(now, r.value);
          EXPECT_GE(now, previous - 1e-12);
          previous = now;
        }
        EXPECT_GT(counters.iterations, 0);
      }
    }
  }
}

// Bernoulli MAP of one logit with a Gaussian prior, by bisection on the
// stationarity condition fails * (1 - p) - successes * p - theta / var = 0.
double bernoulli_map(int fails, int successes, double var) {
  double lo = -50.0, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double p = 1.0 / (1.0 + std::exp(-mid));
    const double g = fails * (1 - p) - successes * p - mid / var;
    (g > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(Fit, TransitionsOnlyRecoversBernoulliMap) {
  const Environment env = grid_environment("navigation", {"...", "..."}, {"a 2,0"});
  const Domain& d = *env.domain;
  TeacherDataset data;
  data.num_tasks = d.num_tasks();
  // Moving right from cell 0 into cell 1: 3 failures, 7 successes.
  for (int i = 0; i < 3; ++i) data.transitions.push_back({0, kRight, 0});
  for (int i = 0; i < 7; ++i) data.transitions.push_back({0, kRight, 1});
  // Into cell 4 from above: 9 failures, 1 success.
  for (int i = 0; i < 9; ++i) data.transitions.push_back({1, kDown, 1});
  data.transitions.push_back({1, kDown, 4});
  LearnerConfig config;
  Parameters x = Parameters::zeros(d, config.model);
  OptimizerState optimizer;
  const FitReport report = bam_fit(d, data, config, x, optimizer);
  EXPECT_TRUE(report.converged);
  EXPECT_NEAR(x.theta[1], bernoulli_map(3, 7, 10.0), 1e-4);
  EXPECT_NEAR(x.theta[4], bernoulli_map(9, 1, 10.0), 1e-4);
  // Unobserved cells stay at the prior mode.
  EXPECT_NEAR(x.theta[5], 0.0, 1e-8);
  // The teacher has said nothing about costs, so they stay at the prior mode.
  for (double v : x.phi[0]) EXPECT_NEAR(v, 0.0, 1e-8);
}

TEST(Fit, WarmStartContinuesFromCheckpointedState) {
  const Environment env = load_environment(environment_path("wall"));
  const TeacherModel teacher(env);
  TeacherDataset data;
  Rng rng = make_rng(52, {});
  for (int t = 0; t < env.domain->num_tasks(); ++t) simulate_demonstration(teacher, t, rng, data);
  LearnerConfig config;
  Parameters x = Parameters::zeros(*env.domain, config.model);
  OptimizerState optimizer;
  const FitReport first = bam_fit(*env.domain, data, config, x, optimizer);
  const long evaluations = optimizer.evaluations;
  const FitReport again = bam_fit(*env.domain, data, config, x, optimizer);
  // Refitting on the same data from the optimum converges at once.
  EXPECT_TRUE(again.converged);
  EXPECT_GE(again.objective, first.objective - 1e-9);
  EXPECT_LT(optimizer.evaluations - evaluations, evaluations);
}

TEST(Fit, GradientMethodIsAvailableAndAgrees) {
  const Environment env = load_environment(environment_path("wall"));
  const TeacherModel teacher(env);
  TeacherDataset data;
  Rng rng = make_rng(53, {});
  for (int t = 0; t < env.domain->num_tasks(); ++t) simulate_demonstration(teacher, t, rng, data);
  LearnerConfig plain;
  plain.schedule.method = AscentMethod::kGradient;
  LearnerConfig quasi;
  Parameters a = Parameters::zeros(*env.domain, plain.model);
  Parameters b = a;
  OptimizerState sa, sb;
  const FitReport ra = bam_fit(*env.domain, data, plain, a, sa);
  const FitReport rb = bam_fit(*env.domain, data, quasi, b, sb);
  EXPECT_FALSE(ra.diverged);
  // Both ascend from the same start; the quasi-Newton fit gets at least as far.
  EXPECT_GE(rb.objective, ra.objective - 1e-3 * std::abs(ra.objective));
  EXPECT_EQ(parse_ascent_method(ascent_method_name(AscentMethod::kGradient)),
            AscentMethod::kGradient);
  EXPECT_THROW(parse_ascent_method("newton"), ValidationError);
}

// Doorway after one round of demonstrations for all four tasks: the wall
// cells next to the demonstrated paths are believed to block, the doorway is
// believed to be passable.
TEST(Fit, DoorwayIsIdentifiedFromDemonstrations) {
  const Environment env = load_environment(environment_path("doorway"));
  const Domain& d = *env.domain;
  const TeacherModel teacher(env);
  TeacherDataset data;
  Rng rng = make_rng(54, {});
  for (int t = 0; t < d.num_tasks(); ++t) simulate_demonstration(teacher, t, rng, data);
  LearnerConfig config;
  Parameters x = Parameters::zeros(d, config.model);
  OptimizerState optimizer;
  bam_fit(d, data, config, x, optimizer);
  const GridSpec& g = d.spec();
  int door = -1;
  for (int c = 0; c < g.num_cells(); ++c) {
    if (g.cell_y(c) == 3 && g.at(c) == cell::kOpen) door = c;
  }
  ASSERT_GE(door, 0);
  EXPECT_LT(sigmoid(x.theta[door]), 0.5) << "doorway failure probability";
  // Wall cells beside the door, which every path passes.
  for (int dx : {-1, 1}) {
    const int wall = door + dx;
    if (g.cell_x(wall) < 0 || g.at(wall) != cell::kObstacle) continue;
    EXPECT_GT(sigmoid(x.theta[wall]), 0.5) << "wall cell " << wall;
  }
}

TEST(Fit, ShiftingCostsLeavesGreedyPoliciesUnchanged) {
  const Environment env = load_environment(environment_path("two_rooms"));
  Rng rng = make_rng(55, {});
  const auto theta = testing::random_vector(rng, env.domain->theta_dim(), 2.0);
  const TransitionModel m = env.domain->model(theta);
  const int steps = env.domain->default_planning_steps();
  auto cost = testing::random_vector(rng, env.domain->num_states(), 1.0);
  const auto base = greedy_policy(soft_value_iteration(m, cost, 5.0, steps),
                                  TieBreak::kLowestIndex);
  for (double& c : cost) c += 3.0;
  const auto shifted = greedy_policy(soft_value_iteration(m, cost, 5.0, steps),
                                     TieBreak::kLowestIndex);
  EXPECT_EQ(base, shifted);
}

TEST(Fit, ModelPoliciesOneGreedyPolicyPerTask) {
  const Environment env = load_environment(environment_path("three_rooms"));
  ModelOptions options;
  const Parameters x = Parameters::zeros(*env.domain, options);
  const auto policies = model_policies(*env.domain, options, x);
  ASSERT_EQ(policies.size(), 3u);
  // With nothing learned every action is tied everywhere.
  for (const auto& p : policies) {
    for (int s = 0; s < p.num_states(); ++s) ASSERT_TRUE(p.is_tied(s));
  }
}

}  // namespace
}  // namespace bam
