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

#include "bam/cost.hpp"

#include <cmath>
#include <string>

#include "bam/domain.hpp"
#include "bam/error.hpp"

namespace bam {

const char* link_name(CostLink link) {
  return link == CostLink::kSoftplus ? "softplus" : "linear";
}

CostLink parse_link(std::string_view name) {
  if (name == "softplus") return CostLink::kSoftplus;
  if (name == "linear") return CostLink::kLinear;
  throw ValidationError("unknown cost link '" + std::string(name) + "'");
}

double link_value(CostLink link, double x) {
  if (link == CostLink::kLinear) return x;
  // log(1 + e^x) without overflow.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double link_derivative(CostLink link, double x) {
  return link == CostLink::kLinear ? 1.0 : sigmoid(x);
}

namespace {

void check_phi(const ParametricModel& domain, std::span<const double> phi,
               const char* what) {
  if (static_cast<int>(phi.size()) != domain.phi_dim()) {
    throw ValidationError(std::string(what) + " has " + std::to_string(phi.size()) +
                          " entries, expected " + std::to_string(domain.phi_dim()));
  }
  for (double x : phi) {
    if (!std::isfinite(x)) throw ValidationError(std::string("non-finite ") + what);
  }
}

}  // namespace

CostModel cell_cost(const ParametricModel& domain, std::span<const double> phi,
                    CostLink link) {
  return task_plus_global_cost(domain, phi, {}, link);
}

CostModel task_plus_global_cost(const ParametricModel& domain,
                                std::span<const double> phi_task,
                                std::span<const double> phi_global,
                                CostLink link) {
  check_phi(domain, phi_task, "cost parameter vector");
  const bool global = !phi_global.empty();
  if (global) check_phi(domain, phi_global, "global cost parameter vector");
  const int cells = domain.phi_dim();
  CostModel out;
  out.param_dim = global ? 2 * cells : cells;
  out.cost.resize(domain.num_states());
  out.jac_begin.reserve(domain.num_states() + 1);
  out.jac_begin.push_back(0);
  for (int s = 0; s < domain.num_states(); ++s) {
    const int c = domain.cost_index(s);
    out.cost[s] = link_value(link, phi_task[c]);
    out.jac.push_back({c, link_derivative(link, phi_task[c])});
    if (global) {
      out.cost[s] += link_value(link, phi_global[c]);
      out.jac.push_back({cells + c, link_derivative(link, phi_global[c])});
    }
    out.jac_begin.push_back(static_cast<int>(out.jac.size()));
  }
  return out;
}

}  // namespace bam
