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

#ifndef BAM_PARAMETRIC_HPP_
#define BAM_PARAMETRIC_HPP_

#include <span>

#include "bam/mdp.hpp"

namespace bam {

// A tabular MDP family with differentiable dynamics T_theta and one cost
// parameter per cost class, shared by a fixed number of tasks.
class ParametricModel {
 public:
  virtual ~ParametricModel() = default;

  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual int theta_dim() const = 0;
  virtual int phi_dim() const = 0;
  virtual int num_tasks() const = 0;
  // The cost parameter that prices state `s`.
  virtual int cost_index(int s) const = 0;
  // Backup count used when no explicit value is configured.
  virtual int default_planning_steps() const = 0;
  // Throws ValidationError on a dimension mismatch.
  virtual TransitionModel model(std::span<const double> theta) const = 0;
};

}  // namespace bam

#endif  // BAM_PARAMETRIC_HPP_
