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

#ifndef BAM_TEACHER_HPP_
#define BAM_TEACHER_HPP_

#include <span>

namespace bam {

enum class Signal { kPositive, kNegative, kNone };

// A-SABL feedback model parameters.
//   mu_plus / mu_minus: probability the teacher withholds explicit feedback
//   epsilon: teacher error rate, in [0, 0.5)
//   alpha: advantage scale
struct FeedbackParams {
  double mu_plus = 0.2;
  double mu_minus = 0.2;
  double epsilon = 0.05;
  double alpha = 1.0;

  void validate() const;  // throws ValidationError
};

struct FeedbackProbabilities {
  double positive;
  double negative;
  double none;

  double of(Signal s) const {
    return s == Signal::kPositive ? positive : s == Signal::kNegative ? negative : none;
  }
};

// ln softmax(beta * q_row)[action], max-shifted.
double demo_log_likelihood(std::span<const double> q_row, int action, double beta);

// Q(s,a) minus the uniform mean of the row.
double advantage(std::span<const double> q_row, int action);

FeedbackProbabilities feedback_probabilities(double delta,
                                             const FeedbackParams& params);

// d/d delta of each branch probability.
FeedbackProbabilities feedback_probability_slopes(double delta,
                                                  const FeedbackParams& params);

// ln p(signal | advantage(q_row, action)). Returns -inf for a signal the
// parameters make impossible (e.g. explicit feedback with mu = 1).
double feedback_log_likelihood(Signal signal, std::span<const double> q_row,
                               int action, const FeedbackParams& params);

// d ln p(signal | delta) / d delta; zero for impossible signals.
double feedback_log_slope(Signal signal, double delta, const FeedbackParams& params);

}  // namespace bam

#endif  // BAM_TEACHER_HPP_
