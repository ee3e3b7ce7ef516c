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

#include <gtest/gtest.h>

#include <cmath>

#include "bam/cost.hpp"
#include "bam/error.hpp"
#include "bam/planner.hpp"
#include "support.hpp"

namespace bam {
namespace {

using testing::central_difference;
using testing::close;
using testing::random_vector;
using testing::small_environment;

struct Case {
  Environment env;
  std::vector<double> theta;
  std::vector<double> phi;
  double beta;
  int steps;
};

Case random_case(DomainFamily family, Rng& rng) {
  Case c{small_environment(family, rng), {}, {}, 0.5 + 4.5 * uniform01(rng),
         2 + uniform_index(rng, 6)};
  c.theta = random_vector(rng, c.env.domain->theta_dim(), 2.0);
  c.phi = random_vector(rng, c.env.domain->phi_dim(), 2.0);
  return c;
}

class GradientFamilies : public ::testing::TestWithParam<DomainFamily> {};

TEST_P(GradientFamilies, ForwardTensorsMatchFiniteDifferences) {
  Rng rng = make_rng(11, {static_cast<std::uint64_t>(GetParam())});
  for (int trial = 0; trial < 8; ++trial) {
    const Case c = random_case(GetParam(), rng);
    const Domain& d = *c.env.domain;
    const auto pg = plan_with_gradients(d.model(c.theta),
                                        cell_cost(d, c.phi, CostLink::kSoftplus), c.beta,
                                        c.steps);
    for (int s = 0; s < d.num_states(); ++s) {
      for (int a = 0; a < d.num_actions(); ++a) {
        auto q_theta = [&](const std::vector<double>& th) {
          return soft_value_iteration(d.model(th), cell_cost(d, c.phi, CostLink::kSoftplus).cost,
                                      c.beta, c.steps)
              .q_at(s, a);
        };
        auto q_phi = [&](const std::vector<double>& ph) {
          return soft_value_iteration(d.model(c.theta),
                                      cell_cost(d, ph, CostLink::kSoftplus).cost, c.beta,
                                      c.steps)
              .q_at(s, a);
        };
        for (int k = 0; k < d.theta_dim(); ++k) {
          const double fd = central_difference(q_theta, c.theta, k);
          ASSERT_TRUE(close(pg.gradients.q_theta(s, a, k), fd, 1e-4, 1e-7))
              << "dQ/dtheta s=" << s << " a=" << a << " k=" << k << " analytic "
              << pg.gradients.q_theta(s, a, k) << " fd " << fd;
        }
        for (int j = 0; j < d.phi_dim(); ++j) {
          const double fd = central_difference(q_phi, c.phi, j);
          ASSERT_TRUE(close(pg.gradients.q_phi(s, a, j), fd, 1e-4, 1e-7))
              << "dQ/dphi s=" << s << " a=" << a << " j=" << j;
        }
      }
    }
  }
}

TEST_P(GradientFamilies, ReverseSweepAgreesWithForwardTensors) {
  Rng rng = make_rng(12, {static_cast<std::uint64_t>(GetParam())});
  for (int trial = 0; trial < 8; ++trial) {
    const Case c = random_case(GetParam(), rng);
    const Domain& d = *c.env.domain;
    const TransitionModel model = d.model(c.theta);
    const CostModel cost = cell_cost(d, c.phi, CostLink::kLinear);
    const auto pg = plan_with_gradients(model, cost, c.beta, c.steps);
    const PlanTrace trace(model, cost.cost, c.beta, c.steps);
    ASSERT_EQ(trace.plan().q, pg.plan.q);
    ASSERT_EQ(trace.plan().v, pg.plan.v);

    const int S = d.num_states(), A = d.num_actions();
    const auto w = random_vector(rng, S * A, 1.0);
    std::vector<double> g_theta(d.theta_dim(), 0.0), g_cost(S, 0.0);
    trace.backpropagate(w, g_theta, g_cost);
    for (int k = 0; k < d.theta_dim(); ++k) {
      double expected = 0.0;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) expected += w[s * A + a] * pg.gradients.q_theta(s, a, k);
      }
      EXPECT_NEAR(g_theta[k], expected, 1e-9 * (1.0 + std::abs(expected)));
    }
    // Linear link: dC(s)/dphi_j = [cell(s) == j].
    for (int j = 0; j < d.phi_dim(); ++j) {
      double expected = 0.0, pulled = 0.0;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) expected += w[s * A + a] * pg.gradients.q_phi(s, a, j);
        if (d.cell_of(s) == j) pulled += g_cost[s];
      }
      EXPECT_NEAR(pulled, expected, 1e-9 * (1.0 + std::abs(expected)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, GradientFamilies,
                         ::testing::Values(DomainFamily::kNavigation, DomainFamily::kFarming,
                                           DomainFamily::kGravity));

TEST(PlanWithGradients, FixedDynamicsHasEmptyThetaJacobian) {
  Rng rng = make_rng(3, {});
  const Environment env = small_environment(DomainFamily::kNavigation, rng);
  const Domain& d = *env.domain;
  const auto phi = random_vector(rng, d.phi_dim(), 1.0);
  const auto pg = plan_with_gradients(env.truth, cell_cost(d, phi, CostLink::kSoftplus), 2.0, 5);
  EXPECT_EQ(pg.gradients.theta_dim, 0);
  EXPECT_TRUE(pg.gradients.dq_dtheta.empty());
  EXPECT_EQ(pg.gradients.dq_dphi.size(),
            static_cast<std::size_t>(d.num_states() * d.num_actions() * d.phi_dim()));
}

TEST(PlanWithGradients, ZeroBetaAveragesUniformly) {
  Rng rng = make_rng(4, {});
  const Environment env = small_environment(DomainFamily::kGravity, rng);
  const Domain& d = *env.domain;
  const auto theta = random_vector(rng, d.theta_dim(), 1.0);
  const auto phi = random_vector(rng, d.phi_dim(), 1.0);
  const auto pg = plan_with_gradients(d.model(theta), cell_cost(d, phi, CostLink::kSoftplus),
                                      0.0, 4);
  const int A = d.num_actions();
  for (int s = 0; s < d.num_states(); ++s) {
    double mean = 0.0;
    for (int a = 0; a < A; ++a) mean += pg.plan.q_at(s, a) / A;
    EXPECT_NEAR(pg.plan.v[s], mean, 1e-12);
    for (int j = 0; j < d.phi_dim(); ++j) {
      double dmean = 0.0;
      for (int a = 0; a < A; ++a) dmean += pg.gradients.q_phi(s, a, j) / A;
      EXPECT_NEAR(pg.gradients.v_phi(s, j), dmean, 1e-12);
    }
  }
}

TEST(PlanTrace, ReportsTheDivergingStep) {
  TransitionBuilder b(1, 1, 0);
  b.add(0, 1.0);
  b.end_row();
  const TransitionModel loop = std::move(b).build();
  const std::vector<double> cost = {1e308};
  try {
    PlanTrace trace(loop, cost, 1.0, 3);
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace bam
