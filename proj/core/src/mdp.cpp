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

#include "bam/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bam/error.hpp"

namespace bam {

ActionSpace grid_action_space() {
  return ActionSpace{{"up", "down", "left", "right", "noop"}, kNoOp};
}

int parse_grid_action(const std::string& text) {
  static const char* const kNames[] = {"up", "down", "left", "right", "noop"};
  for (int a = 0; a < kNumGridActions; ++a) {
    if (text == kNames[a]) return a;
  }
  if (text.size() == 1 && text[0] >= '0' && text[0] < '0' + kNumGridActions) {
    return text[0] - '0';
  }
  return -1;
}

const char* grid_action_name(int action) {
  switch (action) {
    case kUp: return "up";
    case kDown: return "down";
    case kLeft: return "left";
    case kRight: return "right";
    case kNoOp: return "noop";
    default: return "?";
  }
}

double TransitionModel::probability(int s, int a, int next) const {
  const int k = find_successor(s, a, next);
  return k < 0 ? 0.0 : successors(s, a)[k].probability;
}

int TransitionModel::find_successor(int s, int a, int next) const {
  const auto row = successors(s, a);
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k].state == next) return static_cast<int>(k);
  }
  return -1;
}

int TransitionModel::sample(int s, int a, Rng& rng) const {
  const auto row = successors(s, a);
  double u = uniform01(rng);
  for (const Successor& succ : row) {
    u -= succ.probability;
    if (u < 0.0) return succ.state;
  }
  return row.back().state;
}

void TransitionModel::validate(double tolerance) const {
  for (int s = 0; s < states_; ++s) {
    for (int a = 0; a < actions_; ++a) {
      double total = 0.0;
      for (const Successor& succ : successors(s, a)) {
        if (!(succ.probability >= 0.0 && succ.probability <= 1.0)) {
          throw ValidationError("transition probability out of [0,1] at state " +
                                std::to_string(s) + ", action " +
                                std::to_string(a));
        }
        total += succ.probability;
      }
      if (std::abs(total - 1.0) > tolerance) {
        throw ValidationError("transition row not normalized at state " +
                              std::to_string(s) + ", action " +
                              std::to_string(a) + " (sum " +
                              std::to_string(total) + ")");
      }
    }
  }
}

TransitionBuilder::TransitionBuilder(int num_states, int num_actions,
                                     int param_dim) {
  if (num_states <= 0 || num_actions <= 0 || param_dim < 0) {
    throw ValidationError("transition model needs positive state/action counts");
  }
  model_.states_ = num_states;
  model_.actions_ = num_actions;
  model_.param_dim_ = param_dim;
  model_.row_begin_.reserve(static_cast<std::size_t>(num_states) * num_actions + 1);
  model_.row_begin_.push_back(0);
  if (param_dim > 0) model_.deriv_begin_.push_back(0);
}

void TransitionBuilder::add(int next, double probability,
                            std::span<const ParamDerivative> log_derivative) {
  if (next < 0 || next >= model_.states_) {
    throw ValidationError("successor state " + std::to_string(next) +
                          " out of range");
  }
  if (probability == 0.0) return;
  for (Pending& p : row_) {
    if (p.next != next) continue;
    // ln(p1 + p2) has gradient (p1 g1 + p2 g2) / (p1 + p2).
    const double total = p.probability + probability;
    std::vector<ParamDerivative> merged;
    for (const ParamDerivative& d : p.dlogp) {
      merged.push_back({d.index, d.value * p.probability / total});
    }
    for (const ParamDerivative& d : log_derivative) {
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const ParamDerivative& m) { return m.index == d.index; });
      if (it == merged.end()) {
        merged.push_back({d.index, d.value * probability / total});
      } else {
        it->value += d.value * probability / total;
      }
    }
    p.probability = total;
    p.dlogp = std::move(merged);
    return;
  }
  row_.push_back({next, probability,
                  std::vector<ParamDerivative>(log_derivative.begin(),
                                               log_derivative.end())});
}

void TransitionBuilder::end_row() {
  if (rows_done_ >= model_.states_ * model_.actions_) {
    throw ValidationError("too many transition rows");
  }
  for (Pending& p : row_) {
    model_.succ_.push_back({p.next, p.probability});
    if (model_.param_dim_ > 0) {
      for (const ParamDerivative& d : p.dlogp) {
        if (d.index < 0 || d.index >= model_.param_dim_) {
          throw ValidationError("parameter derivative index out of range");
        }
        model_.deriv_.push_back(d);
      }
      model_.deriv_begin_.push_back(static_cast<int>(model_.deriv_.size()));
    }
  }
  model_.row_begin_.push_back(static_cast<int>(model_.succ_.size()));
  row_.clear();
  ++rows_done_;
}

TransitionModel TransitionBuilder::build() && {
  if (!row_.empty() || rows_done_ != model_.states_ * model_.actions_) {
    throw ValidationError("transition model incomplete: " +
                          std::to_string(rows_done_) + " rows of " +
                          std::to_string(model_.states_ * model_.actions_));
  }
  return std::move(model_);
}

InitialDistribution::InitialDistribution(std::vector<int> states,
                                         std::vector<double> weights)
    : states_(std::move(states)), weights_(std::move(weights)) {
  if (states_.size() != weights_.size()) {
    throw ValidationError("initial distribution: states/weights size mismatch");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("initial distribution: invalid weight");
    }
    total += w;
  }
  if (!states_.empty() && total <= 0.0) {
    throw ValidationError("initial distribution: weights sum to zero");
  }
  double running = 0.0;
  for (double& w : weights_) {
    w /= total;
    running += w;
    cumulative_.push_back(running);
  }
}

InitialDistribution InitialDistribution::uniform(std::vector<int> states) {
  std::vector<double> w(states.size(), 1.0);
  return InitialDistribution(std::move(states), std::move(w));
}

int InitialDistribution::sample(Rng& rng) const {
  if (states_.empty()) throw ValidationError("initial distribution is empty");
  const double u = uniform01(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return states_.back();
  return states_[static_cast<std::size_t>(it - cumulative_.begin())];
}

void validate_cost(std::span<const double> cost, int num_states) {
  if (static_cast<int>(cost.size()) != num_states) {
    throw ValidationError("cost has " + std::to_string(cost.size()) +
                          " entries, expected " + std::to_string(num_states));
  }
  for (std::size_t s = 0; s < cost.size(); ++s) {
    if (!std::isfinite(cost[s])) {
      throw ValidationError("non-finite cost at state " + std::to_string(s));
    }
  }
}

}  // namespace bam
