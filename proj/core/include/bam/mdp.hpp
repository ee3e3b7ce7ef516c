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

#ifndef BAM_MDP_HPP_
#define BAM_MDP_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bam/rng.hpp"

namespace bam {

// Actions shared by every grid domain. Indices are stable and appear in
// dataset and session files.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kNoOp = 4 };
inline constexpr int kNumGridActions = 5;

struct ActionSpace {
  std::vector<std::string> labels;
  int noop = 0;

  int size() const { return static_cast<int>(labels.size()); }
};

ActionSpace grid_action_space();

// Parses "up"/"down"/"left"/"right"/"noop" (or a decimal index).
// Returns -1 when the text names no action.
int parse_grid_action(const std::string& text);
const char* grid_action_name(int action);

struct Successor {
  int state;
  double probability;
};

// One entry of the sparse gradient of ln T(s, a, s') w.r.t. the dynamics
// parameters.
struct ParamDerivative {
  int index;
  double value;
};

// Sparse tabular transition model. Rows are (state, action) pairs stored in
// state-major order; each row lists successors with nonzero probability and,
// for parametric models, the gradient of the log-probability of every
// successor.
class TransitionModel {
 public:
  TransitionModel() = default;

  int num_states() const { return states_; }
  int num_actions() const { return actions_; }
  int param_dim() const { return param_dim_; }

  std::span<const Successor> successors(int s, int a) const {
    const int row = s * actions_ + a;
    return {succ_.data() + row_begin_[row],
            static_cast<std::size_t>(row_begin_[row + 1] - row_begin_[row])};
  }

  // Global index of the first successor of (s, a); successor k of that row
  // has index row_offset(s, a) + k in log_derivative().
  int row_offset(int s, int a) const { return row_begin_[s * actions_ + a]; }

  std::span<const ParamDerivative> log_derivative(int successor_index) const {
    if (deriv_begin_.empty()) return {};
    return {deriv_.data() + deriv_begin_[successor_index],
            static_cast<std::size_t>(deriv_begin_[successor_index + 1] -
                                     deriv_begin_[successor_index])};
  }

  double probability(int s, int a, int next) const;

  // Index of `next` within successors(s, a), or -1 if it has zero probability.
  int find_successor(int s, int a, int next) const;

  int sample(int s, int a, Rng& rng) const;

  // Throws ValidationError naming the first (state, action) whose row is not
  // a distribution within `tolerance`.
  void validate(double tolerance = 1e-9) const;

  std::size_t nonzeros() const { return succ_.size(); }

 private:
  friend class TransitionBuilder;

  int states_ = 0;
  int actions_ = 0;
  int param_dim_ = 0;
  std::vector<int> row_begin_;
  std::vector<Successor> succ_;
  std::vector<int> deriv_begin_;
  std::vector<ParamDerivative> deriv_;
};

// Appends rows in (state, action) order. Duplicate successors within a row
// are merged and zero-probability outcomes dropped.
class TransitionBuilder {
 public:
  TransitionBuilder(int num_states, int num_actions, int param_dim);

  void add(int next, double probability,
           std::span<const ParamDerivative> log_derivative = {});
  void end_row();

  TransitionModel build() &&;

 private:
  struct Pending {
    int next;
    double probability;
    std::vector<ParamDerivative> dlogp;
  };

  TransitionModel model_;
  std::vector<Pending> row_;
  int rows_done_ = 0;
};

// Distribution over start states.
class InitialDistribution {
 public:
  InitialDistribution() = default;
  InitialDistribution(std::vector<int> states, std::vector<double> weights);
  static InitialDistribution uniform(std::vector<int> states);

  bool empty() const { return states_.empty(); }
  std::span<const int> states() const { return states_; }
  std::span<const double> weights() const { return weights_; }
  int sample(Rng& rng) const;

 private:
  std::vector<int> states_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// Throws ValidationError naming the first non-finite entry or a size
// mismatch.
void validate_cost(std::span<const double> cost, int num_states);

}  // namespace bam

#endif  // BAM_MDP_HPP_
