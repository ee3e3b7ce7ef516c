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

#ifndef BAM_EXPERIMENT_HPP_
#define BAM_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bam/agent.hpp"
#include "bam/dataset.hpp"
#include "bam/domain.hpp"
#include "bam/simulated_teacher.hpp"

namespace bam {

enum class Protocol { kDemosOnly, kDemosAndFeedback, kFeedbackOnly };

const char* protocol_name(Protocol protocol);
Protocol parse_protocol(std::string_view name);

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path environment;
  std::vector<Algorithm> algorithms = {Algorithm::kBam, Algorithm::kModelBasedIrl,
                                       Algorithm::kCloning};
  Protocol protocol = Protocol::kDemosOnly;
  int rounds = 10;
  int agents = 50;
  int evaluation_episodes = 50;
  int demos_per_task = 1;
  std::uint64_t seed = 1;
  int jobs = 1;  // does not affect results
  LearnerConfig learner;
  TeacherOptions teacher;
};

// Parses the JSON config format; relative environment paths are resolved
// against `base_dir`. Throws ValidationError on unknown keys or bad values.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Canonical JSON with every default spelled out. `jobs` is omitted.
std::string experiment_config_json(const ExperimentConfig& config);
std::string experiment_fingerprint(const ExperimentConfig& config);

struct ResultRow {
  std::string environment;
  std::string algorithm;
  int agent = 0;
  int round = 0;
  double total_return = 0.0;
  double optimal_return = 0.0;
  double percent_optimal = 0.0;
  long demo_pairs = 0;
  long feedback_events = 0;
  long transitions = 0;
  std::string status = "ok";  // ok, diverged, failed
  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::string fingerprint;
  std::vector<ResultRow> rows;
  // Agents whose run aborted, with the reason.
  std::vector<std::string> failures;
};

void write_results_csv(std::ostream& out, const ResultTable& table);
ResultTable read_results_csv(std::istream& in);

struct SummaryRow {
  std::string environment;
  std::string algorithm;
  int round = 0;
  int agents = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

// Mean and standard error of percent_optimal per (environment, algorithm,
// round), in first-appearance order of (environment, algorithm).
std::vector<SummaryRow> summarize(const ResultTable& table);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
const SummaryRow* find_summary(const std::vector<SummaryRow>& summary,
                               std::string_view environment, std::string_view algorithm,
                               int round);

struct Learner {
  std::unique_ptr<Agent> agent;
  TeacherDataset data;
  FitReport last_fit;
  std::string status = "ok";
};

std::vector<Learner> make_learners(const std::vector<Algorithm>& algorithms,
                                   const Environment& env, const LearnerConfig& config);

struct RoundContext {
  const Environment* env = nullptr;
  const TeacherModel* teacher = nullptr;
  Protocol protocol = Protocol::kDemosOnly;
  int demos_per_task = 1;
  std::uint64_t seed = 0;
  int agent = 0;
};

// Appends one round of simulated teaching to every learner's dataset and
// refits. Demonstrations are shared across learners; agent-controlled
// episodes use the same random streams for every learner.
void run_round(const RoundContext& context, std::vector<Learner>& learners, int round);

// Total return of each learner's greedy policies and of the optimal
// policies on the same evaluation streams. Learner datasets are untouched.
std::vector<ResultRow> evaluate_learners(const std::vector<Learner>& learners,
                                         const RoundContext& context, int episodes,
                                         int round);

using ProgressFn = std::function<void(int agent, int round)>;

ResultTable run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace bam

#endif  // BAM_EXPERIMENT_HPP_
