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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bam/agent.hpp"
#include "bam/error.hpp"
#include "bam/evaluation.hpp"
#include "bam/experiment.hpp"
#include "bam/rng.hpp"
#include "bam/simulated_teacher.hpp"
#include "bam/text.hpp"

#ifdef BAM_WITH_SERVICE
#include "bam/teaching/server.hpp"
#endif

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string config;
  std::string out = "results";
  long long seed = -1;
  int jobs = 0;
  bool quiet = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string environment;
  int episodes = 50;
  std::uint64_t seed = 1;
};

struct ExportArgs {
  std::string results;
  std::string out;
  std::string delimiter = ",";
  bool summary = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bam::ValidationError("cannot write " + path.string());
  out << text;
}

int run(const RunArgs& args) {
  bam::ExperimentConfig config = bam::load_experiment_config(args.config);
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  if (args.jobs > 0) config.jobs = args.jobs;
  fs::create_directories(args.out);

  bam::ProgressFn progress;
  if (!args.quiet) {
    progress = [&](int agent, int round) {
      std::fprintf(stderr, "agent %d round %d done\n", agent, round);
    };
  }
  const bam::ResultTable table = bam::run_experiment(config, progress);

  std::ostringstream results;
  bam::write_results_csv(results, table);
  write_file(fs::path(args.out) / "results.csv", results.str());
  std::ostringstream summary;
  bam::write_summary_csv(summary, bam::summarize(table));
  write_file(fs::path(args.out) / "summary.csv", summary.str());
  write_file(fs::path(args.out) / "config.json", bam::experiment_config_json(config) + "\n");

  for (const std::string& f : table.failures) std::fprintf(stderr, "failure: %s\n", f.c_str());
  std::printf("%zu rows, fingerprint %s, written to %s\n", table.rows.size(),
              table.fingerprint.c_str(), args.out.c_str());
  return table.failures.empty() ? 0 : 2;
}

int eval(const EvalArgs& args) {
  std::ifstream in(args.checkpoint);
  if (!in) throw bam::ValidationError("cannot open checkpoint " + args.checkpoint);
  const bam::Checkpoint checkpoint = bam::read_checkpoint(in);
  const bam::Environment env = bam::load_environment(args.environment);
  if (env.spec().name != checkpoint.environment) {
    throw bam::ValidationError("checkpoint was trained on '" + checkpoint.environment +
                               "', not '" + env.spec().name + "'");
  }
  const auto agent = bam::restore_agent(checkpoint, env.domain);
  const bam::TeacherModel teacher(env, bam::TeacherOptions{});
  const bam::InitialDistribution initial = env.domain->initial_distribution();

  double total = 0.0;
  double optimal = 0.0;
  std::printf("task,return,standard_error,optimal_return\n");
  for (int task = 0; task < env.domain->num_tasks(); ++task) {
    bam::EvaluationOptions options;
    options.episodes = args.episodes;
    options.horizon = env.spec().horizon;
    options.seed = bam::derive_seed(args.seed, {static_cast<std::uint64_t>(task)});
    const auto learned = bam::evaluate_policy(bam::as_policy_fn(agent->policy(task)), env.truth,
                                              env.true_costs[task], initial, options);
    const auto best = bam::evaluate_policy(bam::as_policy_fn(teacher.optimal_policy(task)),
                                           env.truth, env.true_costs[task], initial, options);
    total += learned.mean;
    optimal += best.mean;
    std::printf("%s,%s,%s,%s\n", env.spec().tasks[task].name.c_str(),
                bam::format_double(learned.mean).c_str(),
                bam::format_double(learned.standard_error).c_str(),
                bam::format_double(best.mean).c_str());
  }
  std::printf("total,%s,,%s\n", bam::format_double(total).c_str(),
              bam::format_double(optimal).c_str());
  std::printf("percent_optimal,%s,,\n",
              bam::format_double(optimal != 0.0 ? 100.0 * total / optimal : 0.0).c_str());
  return 0;
}

std::string redelimit(const std::string& csv, const std::string& delimiter) {
  if (delimiter == ",") return csv;
  std::string out;
  for (char c : csv) {
    if (c == ',') {
      out += delimiter;
    } else {
      out += c;
    }
  }
  return out;
}

int export_results(const ExportArgs& args) {
  std::ifstream in(args.results);
  if (!in) throw bam::ValidationError("cannot open results " + args.results);
  const bam::ResultTable table = bam::read_results_csv(in);
  std::ostringstream text;
  if (args.summary) {
    bam::write_summary_csv(text, bam::summarize(table));
  } else {
    bam::write_results_csv(text, table);
  }
  const std::string delimiter = args.delimiter == "tab" ? "\t" : args.delimiter;
  const std::string body = redelimit(text.str(), delimiter);
  if (args.out.empty()) {
    std::cout << body;
  } else {
    write_file(args.out, body);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior aware modeling: experiments, evaluation and live teaching"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a simulated-teacher experiment");
  run_cmd->add_option("config", run_args.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--out", run_args.out, "Output directory");
  run_cmd->add_option("-s,--seed", run_args.seed, "Override the master seed");
  run_cmd->add_option("-j,--jobs", run_args.jobs, "Worker threads (0 = config or all cores)");
  run_cmd->add_flag("-q,--quiet", run_args.quiet, "No progress output");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint against the true model");
  eval_cmd->add_option("checkpoint", eval_args.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-e,--environment", eval_args.environment)
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("-n,--episodes", eval_args.episodes)->check(CLI::PositiveNumber);
  eval_cmd->add_option("-s,--seed", eval_args.seed);

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Convert a results table for plotting");
  export_cmd->add_option("results", export_args.results)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("-o,--out", export_args.out, "Output file (default stdout)");
  export_cmd->add_option("-d,--delimiter", export_args.delimiter, "Field delimiter or 'tab'");
  export_cmd->add_flag("--summary", export_args.summary, "Mean and standard error per round");

#ifdef BAM_WITH_SERVICE
  bam::teaching::ServerOptions serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live teaching sessions");
  serve_cmd->add_option("-a,--address", serve_args.address);
  serve_cmd->add_option("-p,--port", serve_args.port);
  serve_cmd->add_option("-e,--environments", serve_args.environment_dir)
      ->check(CLI::ExistingDirectory);
  serve_cmd->add_option("-d,--data", serve_args.data_dir, "Session storage directory");
  serve_cmd->add_option("--algorithm", serve_args.algorithm);
  serve_cmd->add_option("-j,--threads", serve_args.threads);
  serve_cmd->add_option("--tick-ms", serve_args.tick_ms, "Agent step interval, 0 for client ticks");
#endif

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(run_args);
    if (*eval_cmd) return eval(eval_args);
    if (*export_cmd) return export_results(export_args);
#ifdef BAM_WITH_SERVICE
    if (*serve_cmd) return bam::teaching::serve(serve_args);
#endif
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bam: %s\n", e.what());
    return 1;
  }
  return 0;
}
