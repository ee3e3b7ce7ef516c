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

#include "bam/experiment.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "bam/error.hpp"
#include "support.hpp"

namespace bam {
namespace {

using testing::environment_path;

std::string small_config(const std::string& extra = "") {
  return R"({"name": "t", "environment": ")" + environment_path("wall") +
         R"(", "algorithms": ["bam", "cloning"], "rounds": 2, "agents": 2,
            "evaluation_episodes": 5, "seed": 11)" + extra + "}";
}

TEST(Config, ParsesEverySection) {
  const ExperimentConfig c = parse_experiment_config(R"({
    "name": "full", "environment": "envs/x.env",
    "algorithms": ["bam", "model-based-irl", "cloning", "global-cost-irl", "ml-irl"],
    "protocol": "demos+feedback", "rounds": 3, "agents": 4, "evaluation_episodes": 6,
    "demos_per_task": 2, "seed": 99, "jobs": 2,
    "model": {"beta": 2.5, "steps": 12, "link": "linear", "theta_prior_variance": 4,
              "phi_prior_variance": 3},
    "feedback": {"mu_plus": 0.1, "mu_minus": 0.3, "epsilon": 0.02, "alpha": 2},
    "schedule": {"method": "gradient", "cost_steps": 5, "dynamics_steps": 6,
                 "outer_iterations": 7, "tolerance": 1e-3},
    "teacher": {"mode": "boltzmann", "beta": 8, "steps": 30}})", "/base");
  EXPECT_EQ(c.name, "full");
  EXPECT_EQ(c.environment, std::filesystem::path("/base/envs/x.env"));
  EXPECT_EQ(c.algorithms.size(), 5u);
  EXPECT_EQ(c.algorithms[4], Algorithm::kMlIrl);
  EXPECT_EQ(c.protocol, Protocol::kDemosAndFeedback);
  EXPECT_EQ(c.rounds, 3);
  EXPECT_EQ(c.agents, 4);
  EXPECT_EQ(c.evaluation_episodes, 6);
  EXPECT_EQ(c.demos_per_task, 2);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.jobs, 2);
  EXPECT_EQ(c.learner.model.beta, 2.5);
  EXPECT_EQ(c.learner.model.steps, 12);
  EXPECT_EQ(c.learner.model.priors.theta_variance, 4.0);
  EXPECT_EQ(c.learner.model.priors.phi_variance, 3.0);
  EXPECT_EQ(c.learner.model.feedback.mu_minus, 0.3);
  EXPECT_EQ(c.learner.model.feedback.alpha, 2.0);
  EXPECT_EQ(c.teacher.feedback.epsilon, 0.02);
  EXPECT_EQ(c.learner.schedule.method, AscentMethod::kGradient);
  EXPECT_EQ(c.learner.schedule.cost_steps, 5);
  EXPECT_EQ(c.learner.schedule.dynamics_steps, 6);
  EXPECT_EQ(c.learner.schedule.outer_iterations, 7);
  EXPECT_EQ(c.learner.schedule.tolerance, 1e-3);
  EXPECT_EQ(c.teacher.mode, DemoMode::kBoltzmann);
  EXPECT_EQ(c.teacher.beta, 8.0);
  EXPECT_EQ(c.teacher.soft_steps, 30);
}

TEST(Config, DefaultsWhenOptionalKeysAreAbsent) {
  const ExperimentConfig c = parse_experiment_config(R"({"environment": "a.env"})");
  EXPECT_EQ(c.protocol, Protocol::kDemosOnly);
  EXPECT_EQ(c.agents, 50);
  EXPECT_EQ(c.rounds, 10);
  EXPECT_EQ(c.evaluation_episodes, 50);
  EXPECT_EQ(c.learner.schedule.method, AscentMethod::kLbfgs);
  EXPECT_EQ(c.teacher.mode, DemoMode::kGreedyOptimal);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto rejects = [](const std::string& text, const std::string& fragment) {
    try {
      parse_experiment_config(text);
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos)
          << e.what() << " should mention " << fragment;
      return;
    }
    ADD_FAILURE() << "accepted: " << text;
  };
  rejects(R"({"environment": "a", "round": 3})", "round");
  rejects(R"({"environment": "a", "model": {"gamma": 1}})", "gamma");
  rejects(R"({"environment": "a", "schedule": {"steps": 1}})", "steps");
  rejects(R"({"environment": "a", "rounds": 0})", "rounds");
  rejects(R"({"environment": "a", "agents": -1})", "agents");
  rejects(R"({"environment": "a", "algorithms": []})", "algorithm");
  rejects(R"({"environment": "a", "algorithms": ["dagger"]})", "dagger");
  rejects(R"({"environment": "a", "protocol": "interactive"})", "interactive");
  rejects(R"({"environment": "a", "feedback": {"epsilon": 0.7}})", "epsilon");
  rejects(R"({"environment": "a", "teacher": {"mode": "noisy"}})", "teacher.mode");
  rejects(R"({"environment": "a", "model": {"beta": -1}})", "beta");
  rejects(R"({"rounds": 2})", "environment");
  rejects(R"({"environment": "a", "rounds": "two"})", "rounds");
  rejects("{not json", "JSON");
}

TEST(Config, CanonicalJsonRoundTrips) {
  const ExperimentConfig c = parse_experiment_config(small_config(R"(, "jobs": 3,
      "protocol": "demos+feedback", "model": {"beta": 3}, "schedule": {"method": "gradient"})"));
  const std::string text = experiment_config_json(c);
  const ExperimentConfig back = parse_experiment_config(text);
  EXPECT_EQ(experiment_config_json(back), text);
  EXPECT_EQ(back.learner.schedule.method, AscentMethod::kGradient);
}

TEST(Config, FingerprintIgnoresJobsOnly) {
  const auto a = experiment_fingerprint(parse_experiment_config(small_config()));
  const auto b = experiment_fingerprint(parse_experiment_config(small_config(R"(, "jobs": 4)")));
  const auto c = experiment_fingerprint(parse_experiment_config(small_config(R"(, "model": {"beta": 4})")));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.size(), 16u);
}

TEST(Protocol, NamesRoundTrip) {
  for (Protocol p : {Protocol::kDemosOnly, Protocol::kDemosAndFeedback, Protocol::kFeedbackOnly}) {
    EXPECT_EQ(parse_protocol(protocol_name(p)), p);
  }
  EXPECT_EQ(parse_protocol("global-cost-comparison"), Protocol::kDemosOnly);
}

ResultRow random_row(Rng& rng, int i) {
  ResultRow r;
  r.environment = i % 2 ? "wall" : "two_fields";
  r.algorithm = i % 3 ? "bam" : "cloning";
  r.agent = static_cast<int>(uniform_index(rng, 50));
  r.round = static_cast<int>(uniform_index(rng, 10));
  r.total_return = 400.0 * uniform01(rng) - 10.0;
  r.optimal_return = 1.0 / (uniform01(rng) + 1e-9);
  r.percent_optimal = 100.0 * r.total_return / r.optimal_return;
  r.demo_pairs = static_cast<long>(uniform_index(rng, 1000));
  r.feedback_events = static_cast<long>(uniform_index(rng, 1000));
  r.transitions = static_cast<long>(uniform_index(rng, 1000));
  r.status = i % 7 == 0 ? "diverged" : "ok";
  return r;
}

TEST(ResultsCsv, RandomTablesRoundTripExactly) {
  Rng rng = make_rng(91, {});
  for (int trial = 0; trial < 20; ++trial) {
    ResultTable t;
    t.fingerprint = "0123456789abcdef";
    const int n = static_cast<int>(uniform_index(rng, 30));
    for (int i = 0; i < n; ++i) t.rows.push_back(random_row(rng, i));
    std::stringstream buf;
    write_results_csv(buf, t);
    const ResultTable back = read_results_csv(buf);
    EXPECT_EQ(back.fingerprint, t.fingerprint);
    EXPECT_EQ(back.rows, t.rows);
  }
}

TEST(ResultsCsv, RejectsMalformedInput) {
  std::istringstream empty("");
  EXPECT_THROW(read_results_csv(empty), ParseError);
  ResultTable t;
  Rng rng = make_rng(92, {});
  t.rows.push_back(random_row(rng, 1));
  std::stringstream buf;
  write_results_csv(buf, t);
  std::string text = buf.str();
  text += "wall,bam,1,2\n";
  std::istringstream in(text);
  try {
    read_results_csv(in);
    ADD_FAILURE() << "short row accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("12 fields"), std::string::npos);
  }
}

TEST(Summary, MatchesDirectMeanAndStandardError) {
  Rng rng = make_rng(93, {});
  ResultTable t;
  for (int i = 0; i < 60; ++i) t.rows.push_back(random_row(rng, i));
  const auto summary = summarize(t);
  for (const SummaryRow& s : summary) {
    std::vector<double> xs;
    for (const ResultRow& r : t.rows) {
      if (r.environment == s.environment && r.algorithm == s.algorithm && r.round == s.round) {
        xs.push_back(r.percent_optimal);
      }
    }
    ASSERT_EQ(static_cast<int>(xs.size()), s.agents);
    double mean = 0.0;
    for (double x : xs) mean += x / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double se = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1) / xs.size()) : 0.0;
    EXPECT_NEAR(s.mean, mean, 1e-9 * std::max(1.0, std::abs(mean)));
    EXPECT_NEAR(s.standard_error, se, 1e-9 * std::max(1.0, se));
    EXPECT_EQ(find_summary(summary, s.environment, s.algorithm, s.round), &s);
  }
  EXPECT_EQ(find_summary(summary, "nowhere", "bam", 0), nullptr);
  int total = 0;
  for (const SummaryRow& s : summary) total += s.agents;
  EXPECT_EQ(total, 60);
}

TEST(RunExperiment, GridIsCompleteAndDeterministic) {
  ExperimentConfig c = parse_experiment_config(small_config());
  const ResultTable a = run_experiment(c);
  EXPECT_TRUE(a.failures.empty());
  ASSERT_EQ(a.rows.size(), 2u * 2u * 2u);
  for (const ResultRow& r : a.rows) {
    EXPECT_EQ(r.environment, "wall");
    EXPECT_EQ(r.status, "ok");
    EXPECT_EQ(r.demo_pairs > 0, true);
    EXPECT_EQ(r.feedback_events, 0);
    EXPECT_LE(r.percent_optimal, 100.0 + 1e-9 + 30.0);
  }
  EXPECT_EQ(a.fingerprint, experiment_fingerprint(c));
  c.jobs = 2;
  const ResultTable b = run_experiment(c);
  EXPECT_EQ(a.rows, b.rows);
  std::stringstream sa, sb;
  write_results_csv(sa, a);
  write_results_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(RunExperiment, FeedbackProtocolAddsAgentEpisodes) {
  const ExperimentConfig c = parse_experiment_config(small_config(R"(,
      "protocol": "demos+feedback")"));
  const ResultTable t = run_experiment(c);
  ASSERT_FALSE(t.rows.empty());
  ExperimentConfig demos = c;
  demos.protocol = Protocol::kDemosOnly;
  const ResultTable d = run_experiment(demos);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_GT(t.rows[i].feedback_events, 0);
    EXPECT_GT(t.rows[i].transitions, d.rows[i].transitions);
    // Demonstrations are drawn from the same streams under both protocols.
    EXPECT_EQ(t.rows[i].demo_pairs, d.rows[i].demo_pairs);
  }
}

TEST(RunExperiment, ProgressIsReportedPerRound) {
  const ExperimentConfig c = parse_experiment_config(small_config());
  std::atomic<int> calls = 0;
  run_experiment(c, [&](int, int) { ++calls; });
  EXPECT_EQ(calls.load(), 4);
}

TEST(RunExperiment, MissingEnvironmentIsAnError) {
  ExperimentConfig c = parse_experiment_config(small_config());
  c.environment = "/nonexistent/x.env";
  EXPECT_ANY_THROW(run_experiment(c));
}

}  // namespace
}  // namespace bam
