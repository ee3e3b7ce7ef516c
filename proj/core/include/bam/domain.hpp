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

#ifndef BAM_DOMAIN_HPP_
#define BAM_DOMAIN_HPP_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bam/grid.hpp"
#include "bam/mdp.hpp"
#include "bam/parametric.hpp"

namespace bam {

// Farming implements carried by the agent (state feature).
enum Implement : int { kNoImplement = 0, kPlow = 1, kSprinkler = 2, kHarvester = 3 };
inline constexpr int kNumImplements = 3;
inline constexpr int kNumFieldTypes = 3;
inline constexpr int kNumGravityDirections = 4;

const char* implement_name(int implement);

struct StateInfo {
  int cell;
  int feature;  // implement (farming), gravity direction (gravity), 0 otherwise
};

// A grid environment family: the state space, the parametric space of
// dynamics models the learners search, the ground-truth dynamics, and the
// per-task ground-truth costs (-1 at goal states, 0 elsewhere).
//
// States are numbered cell * num_features() + feature.
class Domain : public ParametricModel {
 public:
  explicit Domain(GridSpec spec);
  virtual ~Domain() = default;

  const GridSpec& spec() const { return spec_; }
  DomainFamily family() const { return spec_.family; }

  int num_cells() const { return spec_.num_cells(); }
  virtual int num_features() const = 0;
  int num_states() const override { return num_cells() * num_features(); }
  int num_actions() const override { return kNumGridActions; }
  int noop() const { return kNoOp; }

  int state_of(int cell, int feature) const { return cell * num_features() + feature; }
  StateInfo info(int state) const {
    return {state / num_features(), state % num_features()};
  }
  int cell_of(int state) const { return state / num_features(); }

  // Feature value of a freshly reset agent.
  virtual int initial_feature() const { return 0; }

  // Cell reached by moving from `cell` in direction `action` if the move
  // succeeds, or -1 when the action cannot change the cell (no-op, grid
  // edge).
  int neighbor(int cell, int action) const;

  // Cost parameters: one per cell, shared by every state over that cell.
  int phi_dim() const override { return num_cells(); }
  int cost_index(int s) const override { return cell_of(s); }
  int default_planning_steps() const override {
    return 2 * (spec_.width + spec_.height);
  }

  // Ground-truth dynamics, without parameter derivatives.
  virtual TransitionModel true_model() const = 0;
  // Finite parameters whose model approximates the ground truth with
  // logits of size `magnitude`.
  virtual std::vector<double> saturated_true_theta(double magnitude = 20.0) const = 0;

  int num_tasks() const override { return static_cast<int>(spec_.tasks.size()); }
  const std::vector<int>& goal_states(int task) const { return goal_states_.at(task); }
  bool is_goal(int task, int state) const;
  std::vector<double> true_cost(int task) const;

  InitialDistribution initial_distribution() const;
  std::string describe_state(int state) const;

 protected:
  void check_theta(std::span<const double> theta) const;

  GridSpec spec_;
  std::vector<std::vector<int>> goal_states_;
  std::vector<std::vector<char>> goal_mask_;

  void index_goals();
};

class NavigationDomain final : public Domain {
 public:
  explicit NavigationDomain(GridSpec spec);
  int num_features() const override { return 1; }
  int theta_dim() const override { return num_cells(); }
  TransitionModel model(std::span<const double> theta) const override;
  TransitionModel true_model() const override;
  std::vector<double> saturated_true_theta(double magnitude) const override;

  // Rows built from explicit failure probabilities; derivatives are emitted
  // only when `with_derivatives` (logit parameterization).
  TransitionModel model_from_failure(std::span<const double> fail,
                                     bool with_derivatives) const;
};

class FarmingDomain final : public Domain {
 public:
  explicit FarmingDomain(GridSpec spec);
  int num_features() const override { return 4; }
  int initial_feature() const override { return kNoImplement; }
  // logits[implement - 1][field type], row-major.
  int theta_dim() const override { return kNumImplements * kNumFieldTypes; }
  TransitionModel model(std::span<const double> theta) const override;
  TransitionModel true_model() const override;
  std::vector<double> saturated_true_theta(double magnitude) const override;

  // success[implement - 1][field type]; derivatives require the softmax
  // form.
  TransitionModel model_from_success(std::span<const double> success,
                                     bool with_derivatives) const;

  static int field_type(char code);  // -1 if not a field
  static int pickup_implement(char code);  // -1 if not a pickup
};

class GravityDomain final : public Domain {
 public:
  explicit GravityDomain(GridSpec spec);
  int num_features() const override { return kNumGravityDirections; }
  int initial_feature() const override { return spec_.initial_gravity; }
  int num_colors() const { return static_cast<int>(spec_.color_directions.size()); }
  // logits[color][direction], row-major.
  int theta_dim() const override { return num_colors() * kNumGravityDirections; }
  TransitionModel model(std::span<const double> theta) const override;
  TransitionModel true_model() const override;
  std::vector<double> saturated_true_theta(double magnitude) const override;

  TransitionModel model_from_redirect(std::span<const double> redirect,
                                      bool with_derivatives) const;

  static int opposite(int direction);
};

std::unique_ptr<Domain> make_domain(GridSpec spec);

// Ground truth loaded from an environment file.
struct Environment {
  std::shared_ptr<const Domain> domain;
  TransitionModel truth;
  std::vector<std::vector<double>> true_costs;
  // Non-fatal findings, e.g. a goal unreachable under the true dynamics.
  std::vector<std::string> warnings;

  const GridSpec& spec() const { return domain->spec(); }
};

Environment make_environment(GridSpec spec);
Environment load_environment(const std::filesystem::path& path);

double sigmoid(double x);
// Numerically stable softmax of `logits` into `out`.
void softmax(std::span<const double> logits, std::span<double> out);

}  // namespace bam

#endif  // BAM_DOMAIN_HPP_
