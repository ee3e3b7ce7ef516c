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

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bam/error.hpp"
#include "bam/evaluation.hpp"
#include "bam/rng.hpp"
#include "bam/text.hpp"

namespace bam {

using nlohmann::json;

const char* protocol_name(Protocol protocol) {
  switch (protocol) {
    case Protocol::kDemosOnly: return "demos-only";
    case Protocol::kDemosAndFeedback: return "demos+feedback";
    case Protocol::kFeedbackOnly: return "feedback-only";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "demos-only" || name == "global-cost-comparison") return Protocol::kDemosOnly;
  if (name == "demos+feedback") return Protocol::kDemosAndFeedback;
  if (name == "feedback-only") return Protocol::kFeedbackOnly;
  throw ValidationError("unknown protocol '" + std::string(name) + "'");
}

namespace {

void check_keys(const json& object, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw ValidationError(std::string(where) + " must be an object");
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (std::string_view k : allowed) known = known || key == k;
    if (!known) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& out) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

void require_positive(int value, const char* what) {
  if (value < 1) throw ValidationError(std::string(what) + " must be >= 1");
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"name", "environment", "algorithms", "protocol", "rounds", "agents",
              "evaluation_episodes", "demos_per_task", "seed", "jobs", "model", "feedback",
              "schedule", "teacher"});
  ExperimentConfig c;
  read(root, "name", c.name);
  std::string env;
  read(root, "environment", env);
  if (env.empty()) throw ValidationError("config needs an 'environment'");
  c.environment = std::filesystem::path(env);
  if (c.environment.is_relative() && !base_dir.empty()) c.environment = base_dir / c.environment;
  if (root.contains("algorithms")) {
    std::vector<std::string> tags;
    read(root, "algorithms", tags);
    if (tags.empty()) throw ValidationError("config needs at least one algorithm");
    c.algorithms.clear();
    for (const auto& t : tags) c.algorithms.push_back(parse_algorithm(t));
  }
  if (root.contains("protocol")) {
    std::string p;
    read(root, "protocol", p);
    c.protocol = parse_protocol(p);
  }
  read(root, "rounds", c.rounds);
  read(root, "agents", c.agents);
  read(root, "evaluation_episodes", c.evaluation_episodes);
  read(root, "demos_per_task", c.demos_per_task);
  read(root, "seed", c.seed);
  read(root, "jobs", c.jobs);
  require_positive(c.rounds, "rounds");
  require_positive(c.agents, "agents");
  require_positive(c.evaluation_episodes, "evaluation_episodes");
  require_positive(c.demos_per_task, "demos_per_task");
  if (c.jobs < 0) throw ValidationError("jobs must be >= 0");

  ModelOptions& m = c.learner.model;
  if (root.contains("model")) {
    const json& j = root.at("model");
    check_keys(j, "model", {"beta", "steps", "link", "theta_prior_variance",
                            "phi_prior_variance"});
    read(j, "beta", m.beta);
    read(j, "steps", m.steps);
    if (j.contains("link")) m.link = parse_link(j.at("link").get<std::string>());
    read(j, "theta_prior_variance", m.priors.theta_variance);
    read(j, "phi_prior_variance", m.priors.phi_variance);
  }
  if (!(m.beta >= 0.0) || !std::isfinite(m.beta)) {
    throw ValidationError("model.beta must be finite and >= 0");
  }
  if (m.steps < 0) throw ValidationError("model.steps must be >= 0");
  if (root.contains("feedback")) {
    const json& j = root.at("feedback");
    check_keys(j, "feedback", {"mu_plus", "mu_minus", "epsilon", "alpha"});
    read(j, "mu_plus", m.feedback.mu_plus);
    read(j, "mu_minus", m.feedback.mu_minus);
    read(j, "epsilon", m.feedback.epsilon);
    read(j, "alpha", m.feedback.alpha);
  }
  m.feedback.validate();
  c.teacher.feedback = m.feedback;
  Schedule& s = c.learner.schedule;
  if (root.contains("schedule")) {
    const json& j = root.at("schedule");
    check_keys(j, "schedule", {"method", "cost_steps", "dynamics_steps", "outer_iterations",
                             "tolerance"});
    if (j.contains("method")) s.method = parse_ascent_method(j.at("method").get<std::string>());
    read(j, "cost_steps", s.cost_steps);
    read(j, "dynamics_steps", s.dynamics_steps);
    read(j, "outer_iterations", s.outer_iterations);
    read(j, "tolerance", s.tolerance);
  }
  if (s.cost_steps < 0 || s.dynamics_steps < 0 || s.outer_iterations < 1) {
    throw ValidationError("schedule step counts must be non-negative");
  }
  if (root.contains("teacher")) {
    const json& j = root.at("teacher");
    check_keys(j, "teacher", {"mode", "beta", "steps"});
    std::string mode = "optimal";
    read(j, "mode", mode);
    if (mode == "optimal") {
      c.teacher.mode = DemoMode::kGreedyOptimal;
    } else if (mode == "boltzmann") {
      c.teacher.mode = DemoMode::kBoltzmann;
    } else {
      throw ValidationError("teacher.mode must be 'optimal' or 'boltzmann'");
    }
    read(j, "beta", c.teacher.beta);
    read(j, "steps", c.teacher.soft_steps);
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path.parent_path());
}

std::string experiment_config_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["environment"] = c.environment.generic_string();
  std::vector<std::string> tags;
  for (Algorithm a : c.algorithms) tags.emplace_back(algorithm_tag(a));
  j["algorithms"] = tags;
  j["protocol"] = protocol_name(c.protocol);
  j["rounds"] = c.rounds;
  j["agents"] = c.agents;
  j["evaluation_episodes"] = c.evaluation_episodes;
  j["demos_per_task"] = c.demos_per_task;
  j["seed"] = c.seed;
  const ModelOptions& m = c.learner.model;
  j["model"] = {{"beta", m.beta},
                {"steps", m.steps},
                {"link", link_name(m.link)},
                {"theta_prior_variance", m.priors.theta_variance},
                {"phi_prior_variance", m.priors.phi_variance}};
  j["feedback"] = {{"mu_plus", m.feedback.mu_plus},
                   {"mu_minus", m.feedback.mu_minus},
                   {"epsilon", m.feedback.epsilon},
                   {"alpha", m.feedback.alpha}};
  const Schedule& s = c.learner.schedule;
  j["schedule"] = {{"method", ascent_method_name(s.method)},
                   {"cost_steps", s.cost_steps},
                   {"dynamics_steps", s.dynamics_steps},
                   {"outer_iterations", s.outer_iterations},
                   {"tolerance", s.tolerance}};
  j["teacher"] = {{"mode", c.teacher.mode == DemoMode::kBoltzmann ? "boltzmann" : "optimal"},
                  {"beta", c.teacher.beta},
                  {"steps", c.teacher.soft_steps}};
  return j.dump(2);
}

std::string experiment_fingerprint(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  // Only the file name matters, not where the checkout lives.
  c.environment = c.environment.filename();
  return hex64(fnv1a(experiment_config_json(c)));
}

// --- results ----------------------------------------------------------------

namespace {

constexpr const char* kResultHeader =
    "config,environment,algorithm,agent,round,total_return,optimal_return,"
    "percent_optimal,demo_pairs,feedback_events,transitions,status";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_results_csv(std::ostream& out, const ResultTable& table) {
  out << kResultHeader << '\n';
  for (const ResultRow& r : table.rows) {
    out << table.fingerprint << ',' << r.environment << ',' << r.algorithm << ',' << r.agent
        << ',' << r.round << ',' << format_double(r.total_return) << ','
        << format_double(r.optimal_return) << ',' << format_double(r.percent_optimal) << ','
        << r.demo_pairs << ',' << r.feedback_events << ',' << r.transitions << ',' << r.status
        << '\n';
  }
}

ResultTable read_results_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line != kResultHeader) {
    throw ParseError("results file does not start with the expected header", 1);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw ParseError("results row needs 12 fields", line_no);
    if (table.fingerprint.empty()) table.fingerprint = f[0];
    ResultRow r;
    r.environment = f[1];
    r.algorithm = f[2];
    r.agent = static_cast<int>(parse_long(f[3], line_no));
    r.round = static_cast<int>(parse_long(f[4], line_no));
    r.total_return = parse_double(f[5], line_no);
    r.optimal_return = parse_double(f[6], line_no);
    r.percent_optimal = parse_double(f[7], line_no);
    r.demo_pairs = parse_long(f[8], line_no);
    r.feedback_events = parse_long(f[9], line_no);
    r.transitions = parse_long(f[10], line_no);
    r.status = f[11];
    table.rows.push_back(std::move(r));
  }
  return table;
}

std::vector<SummaryRow> summarize(const ResultTable& table) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
  for (const ResultRow& r : table.rows) {
    const std::pair<std::string, std::string> key{r.environment, r.algorithm};
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
    groups[{r.environment, r.algorithm, r.round}].push_back(r.percent_optimal);
  }
  std::vector<SummaryRow> out;
  for (const auto& [env, alg] : order) {
    for (const auto& [key, values] : groups) {
      if (std::get<0>(key) != env || std::get<1>(key) != alg) continue;
      SummaryRow s{env, alg, std::get<2>(key), static_cast<int>(values.size()), 0.0, 0.0};
      for (double v : values) s.mean += v;
      s.mean /= static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1)) /
                           std::sqrt(static_cast<double>(values.size()));
      }
      out.push_back(s);
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "environment,algorithm,round,agents,mean_percent_optimal,standard_error\n";
  for (const SummaryRow& s : summary) {
    out << s.environment << ',' << s.algorithm << ',' << s.round << ',' << s.agents << ','
        << format_double(s.mean) << ',' << format_double(s.standard_error) << '\n';
  }
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& summary,
                               std::string_view environment, std::string_view algorithm,
                               int round) {
  for (const SummaryRow& s : summary) {
    if (s.environment == environment && s.algorithm == algorithm && s.round == round) return &s;
  }
  return nullptr;
}

// --- protocol ---------------------------------------------------------------

std::vector<Learner> make_learners(const std::vector<Algorithm>& algorithms,
                                   const Environment& env, const LearnerConfig& config) {
  std::vector<Learner> learners;
  for (Algorithm a : algorithms) {
    Learner l;
    l.agent = make_agent(a, env.domain, config);
    l.data.num_tasks = env.domain->num_tasks();
    learners.push_back(std::move(l));
  }
  return learners;
}

void run_round(const RoundContext& ctx, std::vector<Learner>& learners, int round) {
  const Environment& env = *ctx.env;
  const Domain& domain = *env.domain;
  const auto r = static_cast<std::uint64_t>(round);
  const auto agent = static_cast<std::uint64_t>(ctx.agent);

  if (ctx.protocol != Protocol::kFeedbackOnly) {
    TeacherDataset shared;
    for (int task = 0; task < domain.num_tasks(); ++task) {
      for (int k = 0; k < ctx.demos_per_task; ++k) {
        Rng rng = make_rng(ctx.seed, {agent, r, role(StreamRole::kTeacher),
                                      static_cast<std::uint64_t>(task),
                                      static_cast<std::uint64_t>(k)});
        simulate_demonstration(*ctx.teacher, task, rng, shared);
      }
    }
    for (Learner& l : learners) {
      l.data.demonstrations.insert(l.data.demonstrations.end(), shared.demonstrations.begin(),
                                   shared.demonstrations.end());
      l.data.transitions.insert(l.data.transitions.end(), shared.transitions.begin(),
                                shared.transitions.end());
    }
  }

  if (ctx.protocol != Protocol::kDemosOnly) {
    const int horizon = domain.spec().horizon;
    for (Learner& l : learners) {
      long timestamp = static_cast<long>(l.data.feedback.size());
      for (int task = 0; task < domain.num_tasks(); ++task) {
        const auto t = static_cast<std::uint64_t>(task);
        Rng episode = make_rng(ctx.seed, {agent, r, role(StreamRole::kAgentEpisode), t});
        Rng feedback = make_rng(ctx.seed, {agent, r, role(StreamRole::kFeedback), t});
        const DeterministicPolicy& policy = l.agent->policy(task);
        int s = domain.initial_distribution().sample(episode);
        for (int step = 0; step < horizon && !domain.is_goal(task, s); ++step) {
          const int a = policy.act(s, episode);
          const int next = env.truth.sample(s, a, episode);
          l.data.transitions.push_back({s, a, next});
          l.data.feedback.push_back(
              simulate_feedback(*ctx.teacher, task, s, a, timestamp++, feedback));
          s = next;
        }
      }
    }
  }

  for (Learner& l : learners) {
    try {
      l.last_fit = l.agent->update(l.data);
      l.status = l.last_fit.diverged ? "diverged" : "ok";
    } catch (const std::exception& e) {
      l.last_fit = FitReport{};
      l.last_fit.message = e.what();
      l.status = "failed";
    }
  }
}

std::vector<ResultRow> evaluate_learners(const std::vector<Learner>& learners,
                                         const RoundContext& ctx, int episodes, int round) {
  const Environment& env = *ctx.env;
  const Domain& domain = *env.domain;
  const InitialDistribution initial = domain.initial_distribution();
  auto options_for = [&](int task) {
    EvaluationOptions o;
    o.episodes = episodes;
    o.horizon = domain.spec().horizon;
    o.seed = derive_seed(ctx.seed, {static_cast<std::uint64_t>(ctx.agent),
                                    static_cast<std::uint64_t>(round),
                                    role(StreamRole::kEvaluation),
                                    static_cast<std::uint64_t>(task)});
    return o;
  };
  double optimal = 0.0;
  for (int task = 0; task < domain.num_tasks(); ++task) {
    optimal += evaluate_policy(as_policy_fn(ctx.teacher->optimal_policy(task)), env.truth,
                               env.true_costs[task], initial, options_for(task))
                   .mean;
  }
  std::vector<ResultRow> rows;
  for (const Learner& l : learners) {
    ResultRow row;
    row.environment = domain.spec().name;
    row.algorithm = algorithm_tag(l.agent->algorithm());
    row.agent = ctx.agent;
    row.round = round;
    for (int task = 0; task < domain.num_tasks(); ++task) {
      row.total_return += evaluate_policy(as_policy_fn(l.agent->policy(task)), env.truth,
                                          env.true_costs[task], initial, options_for(task))
                              .mean;
    }
    row.optimal_return = optimal;
    row.percent_optimal = optimal != 0.0 ? 100.0 * row.total_return / optimal : 0.0;
    row.demo_pairs = static_cast<long>(l.data.demo_pairs());
    row.feedback_events = static_cast<long>(l.data.feedback.size());
    row.transitions = static_cast<long>(l.data.transitions.size());
    row.status = l.status;
    rows.push_back(std::move(row));
  }
  return rows;
}

ResultTable run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  const Environment env = load_environment(config.environment);
  const TeacherModel teacher(env, config.teacher);
  ResultTable table;
  table.fingerprint = experiment_fingerprint(config);

  std::vector<std::vector<ResultRow>> per_agent(config.agents);
  std::vector<std::string> errors(config.agents);
  std::atomic<int> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (int a = next++; a < config.agents; a = next++) {
      try {
        RoundContext ctx{&env, &teacher, config.protocol, config.demos_per_task, config.seed, a};
        auto learners = make_learners(config.algorithms, env, config.learner);
        for (int round = 0; round < config.rounds; ++round) {
          run_round(ctx, learners, round);
          auto rows = evaluate_learners(learners, ctx, config.evaluation_episodes, round);
          per_agent[a].insert(per_agent[a].end(), rows.begin(), rows.end());
          if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(a, round);
          }
        }
      } catch (const std::exception& e) {
        errors[a] = e.what();
      }
    }
  };
  const int jobs = config.jobs > 0
                       ? config.jobs
                       : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (int j = 1; j < std::min(jobs, config.agents); ++j) pool.emplace_back(worker);
    worker();
  }
  for (int a = 0; a < config.agents; ++a) {
    table.rows.insert(table.rows.end(), per_agent[a].begin(), per_agent[a].end());
    if (!errors[a].empty()) {
      table.failures.push_back("agent " + std::to_string(a) + ": " + errors[a]);
    }
  }
  return table;
}

}  // namespace bam
