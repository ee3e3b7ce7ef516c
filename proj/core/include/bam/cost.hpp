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

#ifndef BAM_COST_HPP_
#define BAM_COST_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "bam/parametric.hpp"
#include "bam/mdp.hpp"

namespace bam {

// Map from a cost parameter to a cost. Softplus keeps costs >= 0 so
// undiscounted soft backups stay bounded; linear is the raw parameter.
enum class CostLink { kSoftplus, kLinear };

const char* link_name(CostLink link);
CostLink parse_link(std::string_view name);

double link_value(CostLink link, double x);
double link_derivative(CostLink link, double x);

// State costs with a sparse Jacobian w.r.t. the cost parameters.
struct CostModel {
  int param_dim = 0;
  std::vector<double> cost;
  std::vector<int> jac_begin;  // size num_states + 1
  std::vector<ParamDerivative> jac;

  std::span<const ParamDerivative> gradient(int s) const {
    return {jac.data() + jac_begin[s],
            static_cast<std::size_t>(jac_begin[s + 1] - jac_begin[s])};
  }
};

// C(s) = g(phi[cell(s)]). Throws ValidationError on a dimension mismatch.
CostModel cell_cost(const ParametricModel& domain, std::span<const double> phi,
                    CostLink link);

// C(s) = g(phi_task[cell(s)]) + g(phi_global[cell(s)]); parameters are
// ordered [phi_task..., phi_global...]. An empty phi_global reduces to
// cell_cost.
CostModel task_plus_global_cost(const ParametricModel& domain,
                                std::span<const double> phi_task,
                                std::span<const double> phi_global,
                                CostLink link);

}  // namespace bam

#endif  // BAM_COST_HPP_
