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

#include "bam/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "bam/error.hpp"

namespace bam {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    z += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= z;
}

const char* implement_name(int implement) {
  switch (implement) {
    case kNoImplement: return "none";
    case kPlow: return "plow";
    case kSprinkler: return "sprinkler";
    case kHarvester: return "harvester";
    default: return "?";
  }
}

Domain::Domain(GridSpec spec) : spec_(std::move(spec)) { validate_grid(spec_); }

void Domain::index_goals() {
  goal_states_.assign(spec_.tasks.size(), {});
  goal_mask_.assign(spec_.tasks.size(), std::vector<char>(num_states(), 0));
  for (std::size_t t = 0; t < spec_.tasks.size(); ++t) {
    for (int c : spec_.tasks[t].goal_cells) {
      for (int f = 0; f < num_features(); ++f) {
        const int s = state_of(c, f);
        if (!goal_mask_[t][s]) goal_states_[t].push_back(s);
        goal_mask_[t][s] = 1;
      }
    }
    std::sort(goal_states_[t].begin(), goal_states_[t].end());
  }
}

int Domain::neighbor(int cell, int action) const {
  int x = spec_.cell_x(cell);
  int y = spec_.cell_y(cell);
  switch (action) {
    case kUp: --y; break;
    case kDown: ++y; break;
    case kLeft: --x; break;
    case kRight: ++x; break;
    default: return -1;
  }
  if (x < 0 || y < 0 || x >= spec_.width || y >= spec_.height) return -1;
  return spec_.cell_index(x, y);
}

bool Domain::is_goal(int task, int state) const {
  return goal_mask_.at(task)[state] != 0;
}

std::vector<double> Domain::true_cost(int task) const {
  std::vector<double> cost(num_states(), 0.0);
  for (int s : goal_states(task)) cost[s] = -1.0;
  return cost;
}

InitialDistribution Domain::initial_distribution() const {
  std::vector<int> states;
  for (int c : spec_.initial_cells()) states.push_back(state_of(c, initial_feature()));
  return InitialDistribution::uniform(std::move(states));
}

std::string Domain::describe_state(int state) const {
  const StateInfo si = info(state);
  std::string out = "(" + std::to_string(spec_.cell_x(si.cell)) + "," +
                    std::to_string(spec_.cell_y(si.cell)) + ")";
  if (family() == DomainFamily::kFarming) {
    out += std::string(" carrying ") + implement_name(si.feature);
  } else if (family() == DomainFamily::kGravity) {
    out += std::string(" gravity ") + grid_action_name(si.feature);
  }
  return out;
}

void Domain::check_theta(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != theta_dim()) {
    throw ValidationError("dynamics parameters have " + std::to_string(theta.size()) +
                          " entries, expected " + std::to_string(theta_dim()));
  }
  for (double x : theta) {
    if (!std::isfinite(x)) throw ValidationError("non-finite dynamics parameter");
  }
}

// --- navigation -------------------------------------------------------------

NavigationDomain::NavigationDomain(GridSpec spec) : Domain(std::move(spec)) {
  index_goals();
}

TransitionModel NavigationDomain::model_from_failure(std::span<const double> fail,
                                                     bool with_derivatives) const {
  TransitionBuilder builder(num_states(), num_actions(),
                            with_derivatives ? theta_dim() : 0);
  for (int s = 0; s < num_states(); ++s) {
    for (int a = 0; a < num_actions(); ++a) {
      const int target = neighbor(s, a);
      if (target < 0) {
        builder.add(s, 1.0);
      } else if (with_derivatives) {
        // p_fail = sigmoid(theta): d ln(1 - p)/d theta = -p, d ln p / d theta = 1 - p.
        const ParamDerivative ok[] = {{target, -fail[target]}};
        const ParamDerivative bad[] = {{target, 1.0 - fail[target]}};
        builder.add(target, 1.0 - fail[target], ok);
        builder.add(s, fail[target], bad);
      } else {
        builder.add(target, 1.0 - fail[target]);
        builder.add(s, fail[target]);
      }
      builder.end_row();
    }
  }
  return std::move(builder).build();
}

TransitionModel NavigationDomain::model(std::span<const double> theta) const {
  check_theta(theta);
  std::vector<double> fail(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) fail[i] = sigmoid(theta[i]);
  return model_from_failure(fail, true);
}

TransitionModel NavigationDomain::true_model() const {
  std::vector<double> fail(num_cells(), 0.0);
  for (int c = 0; c < num_cells(); ++c) {
    if (spec_.at(c) == cell::kObstacle) fail[c] = 1.0;
  }
  return model_from_failure(fail, false);
}

std::vector<double> NavigationDomain::saturated_true_theta(double magnitude) const {
  std::vector<double> theta(num_cells());
  for (int c = 0; c < num_cells(); ++c) {
    theta[c] = spec_.at(c) == cell::kObstacle ? magnitude : -magnitude;
  }
  return theta;
}

// --- farming ----------------------------------------------------------------

FarmingDomain::FarmingDomain(GridSpec spec) : Domain(std::move(spec)) {
  index_goals();
}

int FarmingDomain::field_type(char code) {
  switch (code) {
    case cell::kDirt: return 0;
    case cell::kImmature: return 1;
    case cell::kGrown: return 2;
    default: return -1;
  }
}

int FarmingDomain::pickup_implement(char code) {
  switch (code) {
    case cell::kPlow: return kPlow;
    case cell::kSprinkler: return kSprinkler;
    case cell::kHarvester: return kHarvester;
    default: return -1;
  }
}

TransitionModel FarmingDomain::model_from_success(std::span<const double> success,
                                                  bool with_derivatives) const {
  TransitionBuilder builder(num_states(), num_actions(),
                            with_derivatives ? theta_dim() : 0);
  std::vector<ParamDerivative> ok(kNumFieldTypes);
  std::vector<ParamDerivative> bad(kNumFieldTypes);
  for (int s = 0; s < num_states(); ++s) {
    const StateInfo si = info(s);
    const int implement = si.feature;
    for (int a = 0; a < num_actions(); ++a) {
      const int target = neighbor(si.cell, a);
      const char code = target < 0 ? cell::kObstacle : spec_.at(target);
      const int field = field_type(code);
      const int pickup = pickup_implement(code);
      if (target < 0 || code == cell::kObstacle) {
        builder.add(s, 1.0);
      } else if (pickup >= 0) {
        builder.add(state_of(target, pickup), 1.0);
      } else if (field >= 0) {
        if (implement == kNoImplement) {
          builder.add(s, 1.0);
        } else {
          const int row = (implement - 1) * kNumFieldTypes;
          const double p = success[row + field];
          if (with_derivatives) {
            // p = softmax(logits[row])[field].
            for (int m = 0; m < kNumFieldTypes; ++m) {
              const double dlogp = (m == field ? 1.0 : 0.0) - success[row + m];
              ok[m] = {row + m, dlogp};
              bad[m] = {row + m, -p * dlogp / (1.0 - p)};
            }
            builder.add(state_of(target, implement), p, ok);
            builder.add(s, 1.0 - p, bad);
          } else {
            builder.add(state_of(target, implement), p);
            builder.add(s, 1.0 - p);
          }
        }
      } else {
        builder.add(state_of(target, implement), 1.0);
      }
      builder.end_row();
    }
  }
  return std::move(builder).build();
}

TransitionModel FarmingDomain::model(std::span<const double> theta) const {
  check_theta(theta);
  std::vector<double> success(theta.size());
  for (int j = 0; j < kNumImplements; ++j) {
    softmax(theta.subspan(j * kNumFieldTypes, kNumFieldTypes),
            std::span<double>(success).subspan(j * kNumFieldTypes, kNumFieldTypes));
  }
  return model_from_success(success, true);
}

TransitionModel FarmingDomain::true_model() const {
  // Each implement works on exactly its own field type.
  std::vector<double> success(theta_dim(), 0.0);
  for (int j = 0; j < kNumImplements; ++j) success[j * kNumFieldTypes + j] = 1.0;
  return model_from_success(success, false);
}

std::vector<double> FarmingDomain::saturated_true_theta(double magnitude) const {
  std::vector<double> theta(theta_dim(), 0.0);
  for (int j = 0; j < kNumImplements; ++j) theta[j * kNumFieldTypes + j] = magnitude;
  return theta;
}

// --- gravity ----------------------------------------------------------------

GravityDomain::GravityDomain(GridSpec spec) : Domain(std::move(spec)) {
  index_goals();
}

int GravityDomain::opposite(int direction) {
  switch (direction) {
    case kUp: return kDown;
    case kDown: return kUp;
    case kLeft: return kRight;
    case kRight: return kLeft;
    default: return -1;
  }
}

TransitionModel GravityDomain::model_from_redirect(std::span<const double> redirect,
                                                   bool with_derivatives) const {
  TransitionBuilder builder(num_states(), num_actions(),
                            with_derivatives ? theta_dim() : 0);
  std::vector<ParamDerivative> d(kNumGravityDirections);
  for (int s = 0; s < num_states(); ++s) {
    const StateInfo si = info(s);
    const int gravity = si.feature;
    for (int a = 0; a < num_actions(); ++a) {
      const int target = a == opposite(gravity) ? -1 : neighbor(si.cell, a);
      const char code = target < 0 ? cell::kObstacle : spec_.at(target);
      if (target < 0 || code == cell::kObstacle) {
        builder.add(s, 1.0);
      } else if (code >= '0' && code <= '9') {
        const int row = (code - '0') * kNumGravityDirections;
        for (int g = 0; g < kNumGravityDirections; ++g) {
          if (with_derivatives) {
            for (int m = 0; m < kNumGravityDirections; ++m) {
              d[m] = {row + m, (m == g ? 1.0 : 0.0) - redirect[row + m]};
            }
            builder.add(state_of(target, g), redirect[row + g], d);
          } else {
            builder.add(state_of(target, g), redirect[row + g]);
          }
        }
      } else {
        builder.add(state_of(target, gravity), 1.0);
      }
      builder.end_row();
    }
  }
  return std::move(builder).build();
}

TransitionModel GravityDomain::model(std::span<const double> theta) const {
  check_theta(theta);
  std::vector<double> redirect(theta.size());
  for (int k = 0; k < num_colors(); ++k) {
    softmax(theta.subspan(k * kNumGravityDirections, kNumGravityDirections),
            std::span<double>(redirect).subspan(k * kNumGravityDirections,
                                                kNumGravityDirections));
  }
  return model_from_redirect(redirect, true);
}

TransitionModel GravityDomain::true_model() const {
  std::vector<double> redirect(theta_dim(), 0.0);
  for (int k = 0; k < num_colors(); ++k) {
    redirect[k * kNumGravityDirections + spec_.color_directions[k]] = 1.0;
  }
  return model_from_redirect(redirect, false);
}

std::vector<double> GravityDomain::saturated_true_theta(double magnitude) const {
  std::vector<double> theta(theta_dim(), 0.0);
  for (int k = 0; k < num_colors(); ++k) {
    theta[k * kNumGravityDirections + spec_.color_directions[k]] = magnitude;
  }
  return theta;
}

// --- loading ----------------------------------------------------------------

std::unique_ptr<Domain> make_domain(GridSpec spec) {
  switch (spec.family) {
    case DomainFamily::kNavigation:
      return std::make_unique<NavigationDomain>(std::move(spec));
    case DomainFamily::kFarming:
      return std::make_unique<FarmingDomain>(std::move(spec));
    case DomainFamily::kGravity:
      return std::make_unique<GravityDomain>(std::move(spec));
  }
  throw ValidationError("unknown domain family");
}

Environment make_environment(GridSpec spec) {
  Environment env;
  env.domain = make_domain(std::move(spec));
  const Domain& domain = *env.domain;
  env.truth = domain.true_model();
  for (int t = 0; t < domain.num_tasks(); ++t) env.true_costs.push_back(domain.true_cost(t));

  // Reachability of each task's goal from the start states.
  std::vector<char> seen(domain.num_states(), 0);
  std::deque<int> frontier;
  const InitialDistribution initial = domain.initial_distribution();
  for (int s : initial.states()) {
    if (!seen[s]) frontier.push_back(s);
    seen[s] = 1;
  }
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < domain.num_actions(); ++a) {
      for (const Successor& succ : env.truth.successors(s, a)) {
        if (!seen[succ.state]) {
          seen[succ.state] = 1;
          frontier.push_back(succ.state);
        }
      }
    }
  }
  for (int t = 0; t < domain.num_tasks(); ++t) {
    const auto& goals = domain.goal_states(t);
    const bool reachable =
        std::any_of(goals.begin(), goals.end(), [&](int s) { return seen[s] != 0; });
    if (!reachable) {
      env.warnings.push_back("goal of task '" + domain.spec().tasks[t].name +
                             "' is unreachable from the start states");
    }
  }
  return env;
}

Environment load_environment(const std::filesystem::path& path) {
  return make_environment(read_environment_file(path));
}

}  // namespace bam
