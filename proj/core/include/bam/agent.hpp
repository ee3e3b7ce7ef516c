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

#ifndef BAM_AGENT_HPP_
#define BAM_AGENT_HPP_

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bam/baselines.hpp"
#include "bam/dataset.hpp"
#include "bam/domain.hpp"
#include "bam/learner.hpp"
#include "bam/planner.hpp"

namespace bam {

enum class Algorithm { kBam, kModelBasedIrl, kGlobalCostIrl, kCloning, kMlIrl };

const char* algorithm_tag(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view tag);

// Everything needed to rebuild an agent, written as versioned text.
struct Checkpoint {
  Algorithm algorithm = Algorithm::kBam;
  std::string environment;
  LearnerConfig config;
  OptimizerState optimizer;
  Parameters params;
  std::vector<CloningTable> tables;  // cloning: one per task
  // Dynamics fixed from outside (ML-IRL style); BAM only.
  bool frozen_dynamics = false;
  long updates = 0;

  bool operator==(const Checkpoint&) const;
};

// FNV-1a over the canonical text of the learner configuration.
std::string config_fingerprint(const LearnerConfig& config);

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
std::string checkpoint_to_string(const Checkpoint& checkpoint);
// Throws ParseError (format) or ValidationError (fingerprint mismatch).
Checkpoint read_checkpoint(std::istream& in);
Checkpoint checkpoint_from_string(const std::string& text);

// A learner that refits on a growing dataset and acts greedily per task.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Algorithm algorithm() const = 0;
  // Refits on the whole dataset, warm-started from the current parameters.
  virtual FitReport update(const TeacherDataset& data) = 0;
  const DeterministicPolicy& policy(int task) const { return policies_.at(task); }
  const std::vector<DeterministicPolicy>& policies() const { return policies_; }
  virtual Checkpoint checkpoint() const = 0;
  virtual std::unique_ptr<Agent> clone() const = 0;
  const Domain& domain() const { return *domain_; }

 protected:
  explicit Agent(std::shared_ptr<const Domain> domain) : domain_(std::move(domain)) {}
  std::shared_ptr<const Domain> domain_;
  std::vector<DeterministicPolicy> policies_;
};

std::unique_ptr<Agent> make_agent(Algorithm algorithm,
                                  std::shared_ptr<const Domain> domain,
                                  const LearnerConfig& config);
// BAM with dynamics parameters fixed at `theta`.
std::unique_ptr<Agent> make_frozen_bam_agent(std::shared_ptr<const Domain> domain,
                                             const LearnerConfig& config,
                                             std::vector<double> theta);
// ML-IRL with dynamics fixed at `theta` (no transition model fitting).
std::unique_ptr<Agent> make_ml_irl_agent(std::shared_ptr<const Domain> domain,
                                         const LearnerConfig& config,
                                         std::vector<double> theta);
std::unique_ptr<Agent> restore_agent(const Checkpoint& checkpoint,
                                     std::shared_ptr<const Domain> domain);

}  // namespace bam

#endif  // BAM_AGENT_HPP_
