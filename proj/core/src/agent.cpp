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

#include "bam/agent.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "bam/error.hpp"
#include "bam/text.hpp"

namespace bam {

const char* algorithm_tag(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kBam: return "bam";
    case Algorithm::kModelBasedIrl: return "model-based-irl";
    case Algorithm::kGlobalCostIrl: return "global-cost-irl";
    case Algorithm::kCloning: return "cloning";
    case Algorithm::kMlIrl: return "ml-irl";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view tag) {
  for (Algorithm a : {Algorithm::kBam, Algorithm::kModelBasedIrl, Algorithm::kGlobalCostIrl,
                      Algorithm::kCloning, Algorithm::kMlIrl}) {
    if (tag == algorithm_tag(a)) return a;
  }
  throw ValidationError("unknown algorithm '" + std::string(tag) + "'");
}

namespace {

void write_vector(std::ostream& out, std::span<const double> v) {
  out << v.size();
  for (double x : v) out << ' ' << format_double(x);
}

void check_tasks(const TeacherDataset& data, const Domain& domain) {
  if (data.num_tasks != domain.num_tasks()) {
    throw ValidationError("dataset has " + std::to_string(data.num_tasks) +
                          " tasks, environment has " + std::to_string(domain.num_tasks()));
  }
}

std::string canonical_config(const LearnerConfig& c) {
  std::ostringstream out;
  out << "beta " << format_double(c.model.beta) << '\n'
      << "steps " << c.model.steps << '\n'
      << "link " << link_name(c.model.link) << '\n'
      << "global_cost " << (c.model.global_cost ? 1 : 0) << '\n'
      << "priors " << format_double(c.model.priors.theta_variance) << ' '
      << format_double(c.model.priors.phi_variance) << '\n'
      << "feedback " << format_double(c.model.feedback.mu_plus) << ' '
      << format_double(c.model.feedback.mu_minus) << ' '
      << format_double(c.model.feedback.epsilon) << ' '
      << format_double(c.model.feedback.alpha) << '\n'
      << "schedule " << ascent_method_name(c.schedule.method) << ' ' << c.schedule.cost_steps
      << ' ' << c.schedule.dynamics_steps << ' '
      << c.schedule.outer_iterations << ' ' << format_double(c.schedule.tolerance) << '\n';
  return out.str();
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line split into words; the first must equal `key`.
  std::vector<std::string> expect(const std::string& key, std::size_t min_words = 2) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      auto words = split_words(text);
      if (words.empty()) continue;
      if (words[0] != key) {
        throw ParseError("expected '" + key + "', got '" + words[0] + "'", line_);
      }
      if (words.size() < min_words) throw ParseError("'" + key + "' is incomplete", line_);
      return words;
    }
    throw ParseError("checkpoint ends before '" + key + "'", line_);
  }
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

std::vector<double> read_vector(const std::vector<std::string>& words, std::size_t first,
                                int line) {
  const long n = parse_long(words.at(first), line);
  if (n < 0 || words.size() != first + 1 + static_cast<std::size_t>(n)) {
    throw ParseError("vector length does not match its values", line);
  }
  std::vector<double> v;
  for (long i = 0; i < n; ++i) v.push_back(parse_double(words[first + 1 + i], line));
  return v;
}

}  // namespace

std::string config_fingerprint(const LearnerConfig& config) {
  return hex64(fnv1a(canonical_config(config)));
}

bool Checkpoint::operator==(const Checkpoint& o) const {
  return algorithm == o.algorithm && environment == o.environment &&
         canonical_config(config) == canonical_config(o.config) &&
         optimizer == o.optimizer && params == o.params && tables == o.tables &&
         frozen_dynamics == o.frozen_dynamics && updates == o.updates;
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out << "bam-checkpoint 1\n"
      << "algorithm " << algorithm_tag(c.algorithm) << '\n'
      << "environment " << (c.environment.empty() ? "-" : c.environment) << '\n'
      << "fingerprint " << config_fingerprint(c.config) << '\n'
      << canonical_config(c.config)
      << "optimizer " << format_double(c.optimizer.cost_step) << ' '
      << format_double(c.optimizer.dynamics_step) << ' ' << c.optimizer.iterations << ' '
      << c.optimizer.evaluations << '\n'
      << "frozen " << (c.frozen_dynamics ? 1 : 0) << '\n'
      << "updates " << c.updates << '\n';
  out << "theta ";
  write_vector(out, c.params.theta);
  out << "\ntasks " << c.params.phi.size() << '\n';
  for (std::size_t t = 0; t < c.params.phi.size(); ++t) {
    out << "phi ";
    write_vector(out, c.params.phi[t]);
    out << '\n';
  }
  out << "phi_global ";
  write_vector(out, c.params.phi_global);
  out << "\ntables " << c.tables.size() << '\n';
  for (const CloningTable& t : c.tables) {
    out << "table " << t.num_states << ' ' << t.num_actions;
    for (double v : t.q) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "end\n";
}

std::string checkpoint_to_string(const Checkpoint& checkpoint) {
  std::ostringstream out;
  write_checkpoint(out, checkpoint);
  return out.str();
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader r(in);
  Checkpoint c;
  auto header = r.expect("bam-checkpoint");
  if (header[1] != "1") throw ParseError("unsupported checkpoint version " + header[1], r.line());
  c.algorithm = parse_algorithm(r.expect("algorithm")[1]);
  c.environment = r.expect("environment")[1];
  if (c.environment == "-") c.environment.clear();
  const std::string fingerprint = r.expect("fingerprint")[1];
  c.config.model.beta = parse_double(r.expect("beta")[1], r.line());
  c.config.model.steps = static_cast<int>(parse_long(r.expect("steps")[1], r.line()));
  c.config.model.link = parse_link(r.expect("link")[1]);
  c.config.model.global_cost = parse_long(r.expect("global_cost")[1], r.line()) != 0;
  auto pr = r.expect("priors", 3);
  c.config.model.priors = {parse_double(pr[1], r.line()), parse_double(pr[2], r.line())};
  auto fb = r.expect("feedback", 5);
  c.config.model.feedback = {parse_double(fb[1], r.line()), parse_double(fb[2], r.line()),
                             parse_double(fb[3], r.line()), parse_double(fb[4], r.line())};
  auto sc = r.expect("schedule", 6);
  c.config.schedule = {parse_ascent_method(sc[1]), static_cast<int>(parse_long(sc[2], r.line())),
                       static_cast<int>(parse_long(sc[3], r.line())),
                       static_cast<int>(parse_long(sc[4], r.line())),
                       parse_double(sc[5], r.line())};
  if (fingerprint != config_fingerprint(c.config)) {
    throw ValidationError("checkpoint configuration does not match its fingerprint");
  }
  auto op = r.expect("optimizer", 5);
  c.optimizer = {parse_double(op[1], r.line()), parse_double(op[2], r.line()),
                 parse_long(op[3], r.line()), parse_long(op[4], r.line())};
  c.frozen_dynamics = parse_long(r.expect("frozen")[1], r.line()) != 0;
  c.updates = parse_long(r.expect("updates")[1], r.line());
  c.params.theta = read_vector(r.expect("theta"), 1, r.line());
  const long tasks = parse_long(r.expect("tasks")[1], r.line());
  for (long t = 0; t < tasks; ++t) c.params.phi.push_back(read_vector(r.expect("phi"), 1, r.line()));
  c.params.phi_global = read_vector(r.expect("phi_global"), 1, r.line());
  const long tables = parse_long(r.expect("tables")[1], r.line());
  for (long t = 0; t < tables; ++t) {
    auto w = r.expect("table", 3);
    CloningTable table;
    table.num_states = static_cast<int>(parse_long(w[1], r.line()));
    table.num_actions = static_cast<int>(parse_long(w[2], r.line()));
    const std::size_t n = static_cast<std::size_t>(table.num_states) * table.num_actions;
    if (w.size() != 3 + n) throw ParseError("table size does not match its values", r.line());
    for (std::size_t i = 0; i < n; ++i) table.q.push_back(parse_double(w[3 + i], r.line()));
    c.tables.push_back(std::move(table));
  }
  r.expect("end", 1);
  return c;
}

Checkpoint checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_checkpoint(in);
}

namespace {

class ModelAgent final : public Agent {
 public:
  ModelAgent(Algorithm algorithm, std::shared_ptr<const Domain> domain, LearnerConfig config,
             bool frozen)
      : Agent(std::move(domain)), algorithm_(algorithm), config_(config), frozen_(frozen) {
    config_.model.global_cost = algorithm == Algorithm::kGlobalCostIrl;
    params_ = Parameters::zeros(*domain_, config_.model);
    refresh();
  }

  Algorithm algorithm() const override { return algorithm_; }

  FitReport update(const TeacherDataset& data) override {
    check_tasks(data, *domain_);
    FitReport report;
    switch (algorithm_) {
      case Algorithm::kBam: {
        const Objective objective(*domain_, data, config_.model);
        report = alternating_fit(objective, params_, config_.schedule, optimizer_, !frozen_);
        break;
      }
      case Algorithm::kMlIrl:
        report = ml_irl_fit(*domain_, data, config_, params_, optimizer_);
        break;
      case Algorithm::kModelBasedIrl:
        fit_dynamics_mle(*domain_, data.transitions, config_.model.priors, params_.theta);
        report = ml_irl_fit(*domain_, data, config_, params_, optimizer_);
        break;
      case Algorithm::kGlobalCostIrl:
        fit_dynamics_mle(*domain_, data.transitions, config_.model.priors, params_.theta);
        report = global_cost_fit(*domain_, data, config_, params_, optimizer_);
        break;
      case Algorithm::kCloning:
        throw ValidationError("model agent cannot run cloning");
    }
    ++updates_;
    refresh();
    return report;
  }

  Checkpoint checkpoint() const override {
    Checkpoint c;
    c.algorithm = algorithm_;
    c.environment = domain_->spec().name;
    c.config = config_;
    c.optimizer = optimizer_;
    c.params = params_;
    c.frozen_dynamics = frozen_;
    c.updates = updates_;
    return c;
  }

  std::unique_ptr<Agent> clone() const override {
    return std::make_unique<ModelAgent>(*this);
  }

  void restore(const Checkpoint& c) {
    const Parameters shape = Parameters::zeros(*domain_, config_.model);
    bool ok = c.params.theta.size() == shape.theta.size() &&
              c.params.phi.size() == shape.phi.size() &&
              c.params.phi_global.size() == shape.phi_global.size();
    for (std::size_t t = 0; ok && t < shape.phi.size(); ++t) {
      ok = c.params.phi[t].size() == shape.phi[t].size();
    }
    if (!ok) throw ValidationError("checkpoint parameters do not fit the environment");
    params_ = c.params;
    optimizer_ = c.optimizer;
    updates_ = c.updates;
    refresh();
  }

  void set_theta(std::vector<double> theta) {
    if (static_cast<int>(theta.size()) != domain_->theta_dim()) {
      throw ValidationError("dynamics parameter vector has the wrong dimension");
    }
    params_.theta = std::move(theta);
    refresh();
  }

 private:
  void refresh() { policies_ = model_policies(*domain_, config_.model, params_); }

  Algorithm algorithm_;
  LearnerConfig config_;
  bool frozen_;
  Parameters params_;
  OptimizerState optimizer_;
  long updates_ = 0;
};

class CloningAgent final : public Agent {
 public:
  CloningAgent(std::shared_ptr<const Domain> domain, LearnerConfig config)
      : Agent(std::move(domain)), config_(config) {
    tables_.assign(domain_->num_tasks(),
                   CloningTable::zeros(domain_->num_states(), domain_->num_actions()));
    refresh();
  }

  Algorithm algorithm() const override { return Algorithm::kCloning; }

  FitReport update(const TeacherDataset& data) override {
    check_tasks(data, *domain_);
    validate_dataset(data, domain_->num_states(), domain_->num_actions());
    for (int t = 0; t < domain_->num_tasks(); ++t) {
      cloning_fit(data, t, config_.model, config_.schedule, tables_[t]);
    }
    ++updates_;
    refresh();
    FitReport report;
    report.converged = true;
    return report;
  }

  Checkpoint checkpoint() const override {
    Checkpoint c;
    c.algorithm = Algorithm::kCloning;
    c.environment = domain_->spec().name;
    c.config = config_;
    c.tables = tables_;
    c.updates = updates_;
    return c;
  }

  std::unique_ptr<Agent> clone() const override {
    return std::make_unique<CloningAgent>(*this);
  }

  void restore(const Checkpoint& c) {
    if (c.tables.size() != tables_.size()) {
      throw ValidationError("checkpoint has the wrong number of cloning tables");
    }
    for (const CloningTable& t : c.tables) {
      if (t.num_states != domain_->num_states() || t.num_actions != domain_->num_actions()) {
        throw ValidationError("cloning table does not fit the environment");
      }
    }
    tables_ = c.tables;
    updates_ = c.updates;
    refresh();
  }

 private:
  void refresh() {
    policies_.clear();
    for (const CloningTable& t : tables_) policies_.push_back(cloning_policy(t));
  }

  LearnerConfig config_;
  std::vector<CloningTable> tables_;
  long updates_ = 0;
};

}  // namespace

std::unique_ptr<Agent> make_agent(Algorithm algorithm, std::shared_ptr<const Domain> domain,
                                  const LearnerConfig& config) {
  if (algorithm == Algorithm::kCloning) {
    return std::make_unique<CloningAgent>(std::move(domain), config);
  }
  return std::make_unique<ModelAgent>(algorithm, std::move(domain), config, false);
}

std::unique_ptr<Agent> make_frozen_bam_agent(std::shared_ptr<const Domain> domain,
                                             const LearnerConfig& config,
                                             std::vector<double> theta) {
  auto agent = std::make_unique<ModelAgent>(Algorithm::kBam, std::move(domain), config, true);
  agent->set_theta(std::move(theta));
  return agent;
}

std::unique_ptr<Agent> make_ml_irl_agent(std::shared_ptr<const Domain> domain,
                                         const LearnerConfig& config,
                                         std::vector<double> theta) {
  auto agent =
      std::make_unique<ModelAgent>(Algorithm::kMlIrl, std::move(domain), config, false);
  agent->set_theta(std::move(theta));
  return agent;
}

std::unique_ptr<Agent> restore_agent(const Checkpoint& checkpoint,
                                     std::shared_ptr<const Domain> domain) {
  if (!checkpoint.environment.empty() && checkpoint.environment != domain->spec().name) {
    throw ValidationError("checkpoint was written for environment '" +
                          checkpoint.environment + "'");
  }
  if (checkpoint.algorithm == Algorithm::kCloning) {
    auto agent = std::make_unique<CloningAgent>(std::move(domain), checkpoint.config);
    agent->restore(checkpoint);
    return agent;
  }
  auto agent = std::make_unique<ModelAgent>(checkpoint.algorithm, std::move(domain),
                                            checkpoint.config, checkpoint.frozen_dynamics);
  agent->restore(checkpoint);
  return agent;
}

}  // namespace bam
