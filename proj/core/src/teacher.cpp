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

#include "bam/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bam/domain.hpp"
#include "bam/error.hpp"

namespace bam {

void FeedbackParams::validate() const {
  if (!(mu_plus >= 0.0 && mu_plus <= 1.0) || !(mu_minus >= 0.0 && mu_minus <= 1.0)) {
    throw ValidationError("feedback dropout mu must lie in [0, 1]");
  }
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw ValidationError("feedback error rate epsilon must lie in [0, 0.5)");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("feedback scale alpha must be positive");
  }
}

double demo_log_likelihood(std::span<const double> q_row, int action, double beta) {
  const double peak = *std::max_element(q_row.begin(), q_row.end());
  double z = 0.0;
  for (double q : q_row) z += std::exp(beta * (q - peak));
  return beta * (q_row[action] - peak) - std::log(z);
}

double advantage(std::span<const double> q_row, int action) {
  double mean = 0.0;
  for (double q : q_row) mean += q;
  mean /= static_cast<double>(q_row.size());
  return q_row[action] - mean;
}

FeedbackProbabilities feedback_probabilities(double delta,
                                             const FeedbackParams& params) {
  const double up = sigmoid(params.alpha * delta);
  const double down = sigmoid(-params.alpha * delta);
  const double scale = 1.0 - 2.0 * params.epsilon;
  const double correct = scale * up + params.epsilon;
  const double incorrect = scale * down + params.epsilon;
  // correct + incorrect = 1, so the no-feedback mass is the withheld part.
  return {(1.0 - params.mu_plus) * correct, (1.0 - params.mu_minus) * incorrect,
          params.mu_plus * correct + params.mu_minus * incorrect};
}

FeedbackProbabilities feedback_probability_slopes(double delta,
                                                  const FeedbackParams& params) {
  const double ad = params.alpha * delta;
  const double slope =
      (1.0 - 2.0 * params.epsilon) * params.alpha * sigmoid(ad) * sigmoid(-ad);
  const double positive = (1.0 - params.mu_plus) * slope;
  const double negative = -(1.0 - params.mu_minus) * slope;
  return {positive, negative, -(positive + negative)};
}

double feedback_log_likelihood(Signal signal, std::span<const double> q_row,
                               int action, const FeedbackParams& params) {
  const double p = feedback_probabilities(advantage(q_row, action), params).of(signal);
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

double feedback_log_slope(Signal signal, double delta, const FeedbackParams& params) {
  const double p = feedback_probabilities(delta, params).of(signal);
  if (!(p > 0.0)) return 0.0;
  return feedback_probability_slopes(delta, params).of(signal) / p;
}

}  // namespace bam
