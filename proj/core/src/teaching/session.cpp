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

#include "bam/teaching/session.hpp"

#include <deque>
#include <fstream>
#include <sstream>
#include <stop_token>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "bam/error.hpp"
#include "bam/rng.hpp"

namespace bam::teaching {

using json = nlohmann::json;

namespace {

constexpr const char* kEventNames[] = {
    "select_task",      "start_demo",        "teacher_action",    "end_demo",
    "start_agent_episode", "agent_tick",     "feedback_positive", "feedback_negative",
    "reset",            "place_agent",       "end_session",
};

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    throw ValidationError(std::string(what) + " is not valid JSON");
  }
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw ValidationError(std::string(what) + " needs '" + key + "'");
  const json& v = j.at(key);
  const ValidationError bad(std::string(what) + " has a bad '" + key + "'");
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_unsigned()) throw bad;
  }
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw bad;
  }
}

LearnerConfig config_for(Algorithm algorithm) {
  LearnerConfig c;
  c.model.global_cost = algorithm == Algorithm::kGlobalCostIrl;
  return c;
}

bool enterable_on_placement(char code) {
  return code != cell::kObstacle && code != cell::kDirt && code != cell::kImmature &&
         code != cell::kGrown;
}

}  // namespace

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kIdle: return "idle";
    case Mode::kTeacherControl: return "teacher-control";
    case Mode::kAgentControl: return "agent-control";
    case Mode::kClosed: return "closed";
  }
  return "?";
}

const char* event_kind_name(EventKind kind) { return kEventNames[static_cast<int>(kind)]; }

EventKind parse_event_kind(std::string_view name) {
  for (int k = 0; k < static_cast<int>(std::size(kEventNames)); ++k) {
    if (name == kEventNames[k]) return static_cast<EventKind>(k);
  }
  throw ValidationError("unknown event kind '" + std::string(name) + "'");
}

SessionEvent parse_event_message(std::string_view text, const Domain& domain) {
  const json j = parse_json(text, "message");
  if (!j.is_object()) throw ValidationError("message must be a JSON object");
  if (j.contains("v") && j.at("v") != kProtocolVersion) {
    throw ValidationError("unsupported protocol version");
  }
  if (field<std::string>(j, "type", "message") != "event") {
    throw ValidationError("expected a message of type 'event'");
  }
  SessionEvent e;
  e.kind = parse_event_kind(field<std::string>(j, "kind", "event"));
  if (j.contains("seq")) e.seq = field<std::uint64_t>(j, "seq", "event");
  switch (e.kind) {
    case EventKind::kSelectTask: {
      if (!j.contains("task")) throw ValidationError("select_task needs 'task'");
      const json& t = j.at("task");
      if (t.is_string()) {
        const auto& tasks = domain.spec().tasks;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          if (tasks[i].name == t.get<std::string>()) e.value = static_cast<int>(i);
        }
        if (e.value < 0) throw ValidationError("unknown task '" + t.get<std::string>() + "'");
      } else {
        e.value = field<int>(j, "task", "select_task");
      }
      break;
    }
    case EventKind::kTeacherAction: {
      if (!j.contains("action")) throw ValidationError("teacher_action needs 'action'");
      const json& a = j.at("action");
      e.value = a.is_string() ? parse_grid_action(a.get<std::string>())
                              : field<int>(j, "action", "teacher_action");
      if (e.value < 0) throw ValidationError("unknown action");
      break;
    }
    case EventKind::kPlaceAgent: {
      const auto xy = field<std::vector<int>>(j, "cell", "place_agent");
      const GridSpec& g = domain.spec();
      if (xy.size() != 2 || xy[0] < 0 || xy[1] < 0 || xy[0] >= g.width || xy[1] >= g.height) {
        throw ValidationError("place_agent cell is outside the grid");
      }
      e.value = g.cell_index(xy[0], xy[1]);
      break;
    }
    default:
      break;
  }
  return e;
}

std::string log_line(const SessionEvent& event, long index) {
  json j;
  j["i"] = index;
  j["kind"] = event_kind_name(event.kind);
  if (event.value >= 0) j["value"] = event.value;
  if (event.seq) j["seq"] = *event.seq;
  if (event.policy_version) j["policy_version"] = *event.policy_version;
  if (event.ends_episode) j["ends_episode"] = true;
  return j.dump();
}

SessionEvent parse_log_line(std::string_view line) {
  const json j = parse_json(line, "log line");
  SessionEvent e;
  e.kind = parse_event_kind(field<std::string>(j, "kind", "log line"));
  if (j.contains("value")) e.value = field<int>(j, "value", "log line");
  if (j.contains("seq")) e.seq = field<std::uint64_t>(j, "seq", "log line");
  if (j.contains("policy_version")) e.policy_version = field<int>(j, "policy_version", "log line");
  if (j.contains("ends_episode")) e.ends_episode = field<bool>(j, "ends_episode", "log line");
  return e;
}

std::string session_info_json(const SessionInfo& info) {
  json j;
  j["v"] = kProtocolVersion;
  j["id"] = info.id;
  j["environment"] = info.environment;
  j["algorithm"] = algorithm_tag(info.algorithm);
  j["seed"] = info.seed;
  return j.dump(2) + "\n";
}

SessionInfo parse_session_info(std::string_view text) {
  const json j = parse_json(text, "session file");
  SessionInfo info;
  info.id = field<std::string>(j, "id", "session file");
  info.environment = field<std::string>(j, "environment", "session file");
  info.algorithm = parse_algorithm(field<std::string>(j, "algorithm", "session file"));
  info.seed = field<std::uint64_t>(j, "seed", "session file");
  return info;
}

std::string snapshot_message(const Snapshot& s, const Domain& domain) {
  const GridSpec& g = domain.spec();
  const StateInfo si = domain.info(s.state);
  json j;
  j["v"] = kProtocolVersion;
  j["type"] = "snapshot";
  j["session"] = s.info.id;
  j["environment"] = s.info.environment;
  j["algorithm"] = algorithm_tag(s.info.algorithm);
  j["mode"] = mode_name(s.mode);
  j["task"] = s.task;
  json tasks = json::array();
  for (const TaskSpec& t : g.tasks) tasks.push_back(t.name);
  j["tasks"] = tasks;
  j["state"] = s.state;
  j["cell"] = {g.cell_x(si.cell), g.cell_y(si.cell)};
  if (domain.family() == DomainFamily::kFarming) j["implement"] = implement_name(si.feature);
  if (domain.family() == DomainFamily::kGravity) j["gravity"] = grid_action_name(si.feature);
  const char* episode = s.episode == EpisodeKind::kDemo    ? "demo"
                        : s.episode == EpisodeKind::kAgent ? "agent"
                                                           : "none";
  j["episode"] = {{"kind", episode}, {"steps", s.episode_steps}};
  j["last_outcome"] = s.last_outcome;
  j["events"] = s.events;
  if (s.last_seq) j["last_seq"] = *s.last_seq;
  j["counts"] = {{"demo_pairs", s.demo_pairs},
                 {"feedback", s.feedback_events},
                 {"transitions", s.transitions}};
  j["learner"] = {{"requested", s.refits_requested},
                  {"completed", s.refits_completed},
                  {"version", s.policy_version}};
  if (!s.read_only_reason.empty()) j["read_only"] = s.read_only_reason;
  return j.dump();
}

std::string error_message(std::string_view reason, std::optional<std::uint64_t> seq) {
  json j;
  j["v"] = kProtocolVersion;
  j["type"] = "error";
  j["reason"] = reason;
  if (seq) j["seq"] = *seq;
  return j.dump();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Refits one learner per finished episode, in order, on a worker thread.
struct Session::Refitter {
  Refitter(Algorithm algorithm, std::shared_ptr<const Domain> domain, std::filesystem::path file)
      : working(make_agent(algorithm, std::move(domain), config_for(algorithm))),
        checkpoint_file(std::move(file)) {
    versions.push_back(std::shared_ptr<const Agent>(working->clone()));
    latest = checkpoint_to_string(working->checkpoint());
    worker = std::jthread([this](std::stop_token stop) { run(stop); });
  }

  void enqueue(TeacherDataset data) {
    {
      std::lock_guard lock(mutex);
      queue.push_back(std::move(data));
    }
    cv.notify_all();
  }

  int completed() const {
    std::lock_guard lock(mutex);
    return static_cast<int>(versions.size()) - 1;
  }

  std::shared_ptr<const Agent> wait_for(int version) {
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return static_cast<int>(versions.size()) > version; });
    return versions[version];
  }

  void run(std::stop_token stop) {
    for (;;) {
      TeacherDataset data;
      {
        std::unique_lock lock(mutex);
        if (!cv.wait(lock, stop, [&] { return !queue.empty(); })) return;
        data = std::move(queue.front());
        queue.pop_front();
      }
      try {
        working->update(data);
      } catch (const std::exception&) {
        // The version still counts; it keeps the previous parameters.
      }
      auto snapshot = std::shared_ptr<const Agent>(working->clone());
      std::string text = checkpoint_to_string(working->checkpoint());
      std::string failure;
      if (!checkpoint_file.empty()) {
        try {
          write_file_atomic(checkpoint_file, text);
        } catch (const std::exception& e) {
          failure = e.what();
        }
      }
      {
        std::lock_guard lock(mutex);
        versions.push_back(std::move(snapshot));
        latest = std::move(text);
        if (!failure.empty() && storage_error.empty()) storage_error = failure;
      }
      cv.notify_all();
    }
  }

  std::unique_ptr<Agent> working;
  std::filesystem::path checkpoint_file;
  mutable std::mutex mutex;
  std::condition_variable_any cv;
  std::deque<TeacherDataset> queue;
  std::vector<std::shared_ptr<const Agent>> versions;
  std::string latest;
  std::string storage_error;
  std::jthread worker;  // last: joins before the members above go away
};

Session::Session(SessionInfo info, std::shared_ptr<const Environment> env,
                 std::filesystem::path dir)
    : info_(std::move(info)), env_(std::move(env)), dir_(std::move(dir)) {
  if (env_->domain->spec().name != info_.environment) {
    throw ValidationError("session environment '" + info_.environment +
                          "' does not match '" + env_->domain->spec().name + "'");
  }
  const Domain& d = *env_->domain;
  data_.num_tasks = d.num_tasks();
  const InitialDistribution initial = d.initial_distribution();
  Rng rng = make_rng(info_.seed, {role(StreamRole::kSession), role(StreamRole::kInitialStates)});
  state_ = initial.sample(rng);
  if (!dir_.empty()) {
    std::filesystem::create_directories(dir_);
    write_file_atomic(dir_ / "session.json", session_info_json(info_));
    write_file_atomic(dir_ / "events.jsonl", "");
    persist_dataset();
  }
  refitter_ = std::make_unique<Refitter>(info_.algorithm, env_->domain,
                                         dir_.empty() ? std::filesystem::path{}
                                                      : dir_ / "checkpoint.txt");
  if (!dir_.empty()) write_file_atomic(dir_ / "checkpoint.txt", checkpoint_text());
}

Session::~Session() = default;

ApplyResult Session::apply(SessionEvent event) {
  {
    std::lock_guard lock(refitter_->mutex);
    if (read_only_reason_.empty() && !refitter_->storage_error.empty()) {
      read_only_reason_ = refitter_->storage_error;
    }
  }
  if (!read_only_reason_.empty()) return reject("session is read-only: " + read_only_reason_);
  if (mode_ == Mode::kClosed) return reject("session has ended");
  if (event.seq && last_seq_ && *event.seq <= *last_seq_) {
    return reject("sequence number " + std::to_string(*event.seq) + " is not greater than " +
                  std::to_string(*last_seq_));
  }
  if (!replaying_) event.policy_version.reset();
  event.ends_episode = false;
  Rng rng = make_rng(info_.seed, {role(StreamRole::kSession), log_.size()});
  ApplyResult result = dispatch(event, rng);
  if (!result.accepted) return result;
  event.ends_episode = result.episode_ended;
  if (event.kind == EventKind::kStartAgentEpisode) event.policy_version = episode_version_;
  if (event.seq) last_seq_ = event.seq;
  log_.push_back(event);
  persist_event(event);
  return result;
}

ApplyResult Session::dispatch(const SessionEvent& event, Rng& rng) {
  const Domain& d = *env_->domain;
  const TransitionModel& truth = env_->truth;
  ApplyResult ok{true, {}, false};
  switch (event.kind) {
    case EventKind::kSelectTask:
      if (mode_ != Mode::kIdle) return reject("tasks can only be switched between episodes");
      if (event.value < 0 || event.value >= d.num_tasks()) return reject("no such task");
      task_ = event.value;
      return ok;

    case EventKind::kStartDemo:
      if (mode_ != Mode::kIdle) return reject("an episode is already running");
      begin_episode(EpisodeKind::kDemo);
      return ok;

    case EventKind::kTeacherAction: {
      if (mode_ != Mode::kTeacherControl) return reject("teacher_action needs teacher-control");
      if (event.value < 0 || event.value >= d.noop()) return reject("action must be a move");
      const int next = truth.sample(state_, event.value, rng);
      demo_.steps.push_back({state_, event.value});
      pending_transitions_.push_back({state_, event.value, next});
      state_ = next;
      ++episode_steps_;
      return ok;
    }

    case EventKind::kEndDemo: {
      if (mode_ != Mode::kTeacherControl) return reject("no demonstration is running");
      const int after = truth.sample(state_, d.noop(), rng);
      demo_.steps.push_back({state_, d.noop()});
      demo_.terminal_noop = true;
      pending_transitions_.push_back({state_, d.noop(), after});
      state_ = after;
      finish_episode("teacher");
      ok.episode_ended = true;
      return ok;
    }

    case EventKind::kStartAgentEpisode: {
      if (mode_ != Mode::kIdle) return reject("an episode is already running");
      int version = refitter_->completed();
      if (event.policy_version) {
        if (*event.policy_version < 0 || *event.policy_version > refits_requested_) {
          return reject("learner version " + std::to_string(*event.policy_version) +
                        " does not exist");
        }
        version = *event.policy_version;
      }
      episode_learner_ = refitter_->wait_for(version);
      episode_version_ = version;
      begin_episode(EpisodeKind::kAgent);
      return ok;
    }

    case EventKind::kAgentTick: {
      if (mode_ != Mode::kAgentControl) return reject("agent_tick needs agent-control");
      if (d.is_goal(task_, state_)) {
        finish_episode("goal");
        ok.episode_ended = true;
        return ok;
      }
      const int a = episode_learner_->policy(task_).act(state_, rng);
      const int next = truth.sample(state_, a, rng);
      pending_transitions_.push_back({state_, a, next});
      last_agent_action_ = StateAction{state_, a};
      state_ = next;
      ++episode_steps_;
      if (d.is_goal(task_, state_)) {
        finish_episode("goal");
        ok.episode_ended = true;
      } else if (episode_steps_ >= d.spec().horizon) {
        finish_episode("horizon");
        ok.episode_ended = true;
      }
      return ok;
    }

    case EventKind::kFeedbackPositive:
    case EventKind::kFeedbackNegative: {
      if (mode_ != Mode::kAgentControl) return reject("feedback needs agent-control");
      if (!last_agent_action_) return reject("the agent has not acted yet");
      FeedbackEvent f;
      f.task = task_;
      f.state = last_agent_action_->state;
      f.action = last_agent_action_->action;
      f.signal = event.kind == EventKind::kFeedbackPositive ? Signal::kPositive
                                                            : Signal::kNegative;
      f.timestamp = static_cast<long>(log_.size());
      pending_feedback_.push_back(f);
      return ok;
    }

    case EventKind::kReset: {
      if (mode_ == Mode::kTeacherControl) return reject("end the demonstration before resetting");
      if (mode_ == Mode::kAgentControl) {
        finish_episode("reset");
        ok.episode_ended = true;
      }
      const InitialDistribution initial = d.initial_distribution();
      state_ = initial.sample(rng);
      return ok;
    }

    case EventKind::kPlaceAgent: {
      if (mode_ != Mode::kIdle) return reject("the agent can only be placed between episodes");
      if (event.value < 0 || event.value >= d.num_cells()) return reject("no such cell");
      if (!enterable_on_placement(d.spec().at(event.value))) {
        return reject("the agent cannot stand on that cell");
      }
      state_ = d.state_of(event.value, d.info(state_).feature);
      return ok;
    }

    case EventKind::kEndSession:
      if (mode_ != Mode::kIdle) discard_episode();
      mode_ = Mode::kClosed;
      return ok;
  }
  return reject("unhandled event");
}

void Session::begin_episode(EpisodeKind kind) {
  mode_ = kind == EpisodeKind::kDemo ? Mode::kTeacherControl : Mode::kAgentControl;
  episode_ = kind;
  episode_steps_ = 0;
  demo_ = Demonstration{};
  demo_.task = task_;
  pending_transitions_.clear();
  pending_feedback_.clear();
  last_agent_action_.reset();
}

void Session::finish_episode(std::string outcome) {
  if (episode_ == EpisodeKind::kDemo) data_.demonstrations.push_back(demo_);
  data_.transitions.insert(data_.transitions.end(), pending_transitions_.begin(),
                           pending_transitions_.end());
  data_.feedback.insert(data_.feedback.end(), pending_feedback_.begin(),
                        pending_feedback_.end());
  discard_episode();
  last_outcome_ = std::move(outcome);
  ++refits_requested_;
  refitter_->enqueue(data_);
  persist_dataset();
}

void Session::discard_episode() {
  mode_ = Mode::kIdle;
  episode_ = EpisodeKind::kNone;
  episode_steps_ = 0;
  demo_ = Demonstration{};
  pending_transitions_.clear();
  pending_feedback_.clear();
  last_agent_action_.reset();
  episode_learner_.reset();
}

Snapshot Session::snapshot() const {
  Snapshot s;
  s.info = info_;
  s.mode = mode_;
  s.task = task_;
  s.state = state_;
  s.episode = episode_;
  s.episode_steps = episode_steps_;
  s.last_outcome = last_outcome_;
  s.events = static_cast<long>(log_.size());
  s.last_seq = last_seq_;
  s.demo_pairs = data_.demo_pairs();
  s.feedback_events = data_.feedback.size();
  s.transitions = data_.transitions.size();
  s.refits_requested = refits_requested_;
  s.refits_completed = refitter_->completed();
  s.policy_version = episode_ == EpisodeKind::kAgent ? episode_version_ : s.refits_completed;
  s.read_only_reason = read_only_reason_;
  return s;
}

void Session::wait_for_refits() { refitter_->wait_for(refits_requested_); }

std::string Session::checkpoint_text() const {
  std::lock_guard lock(refitter_->mutex);
  return refitter_->latest;
}

std::shared_ptr<const Agent> Session::learner(int version) const {
  if (version < 0 || version > refits_requested_) {
    throw ValidationError("learner version " + std::to_string(version) + " does not exist");
  }
  return refitter_->wait_for(version);
}

void Session::persist_event(const SessionEvent& event) {
  if (dir_.empty()) return;
  try {
    std::ofstream out(dir_ / "events.jsonl", std::ios::app);
    out << log_line(event, static_cast<long>(log_.size()) - 1) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to events.jsonl");
  } catch (const std::exception& e) {
    mark_read_only(e.what());
  }
}

void Session::persist_dataset() {
  if (dir_.empty()) return;
  try {
    write_file_atomic(dir_ / "dataset.txt", dataset_to_string(data_));
  } catch (const std::exception& e) {
    mark_read_only(e.what());
  }
}

void Session::mark_read_only(const std::string& reason) {
  if (read_only_reason_.empty()) read_only_reason_ = reason;
}

std::unique_ptr<Session> Session::replay(SessionInfo info,
                                         std::shared_ptr<const Environment> env,
                                         const std::vector<SessionEvent>& events,
                                         std::filesystem::path dir) {
  auto session = std::make_unique<Session>(std::move(info), std::move(env), std::move(dir));
  session->replaying_ = true;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const ApplyResult r = session->apply(events[i]);
    if (!r.accepted) {
      throw ValidationError("logged event " + std::to_string(i) + " (" +
                            event_kind_name(events[i].kind) + ") was rejected: " + r.reason);
    }
  }
  session->replaying_ = false;
  return session;
}

std::unique_ptr<Session> Session::resume(
    const std::filesystem::path& dir,
    const std::map<std::string, std::shared_ptr<const Environment>>& catalog) {
  auto read_all = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ValidationError("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const SessionInfo info = parse_session_info(read_all(dir / "session.json"));
  const auto env = catalog.find(info.environment);
  if (env == catalog.end()) {
    throw ValidationError("session uses unknown environment '" + info.environment + "'");
  }
  std::vector<SessionEvent> events;
  std::istringstream lines(read_all(dir / "events.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) events.push_back(parse_log_line(line));
  }
  std::size_t keep = 0;
  bool in_episode = false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const EventKind k = events[i].kind;
    if (k == EventKind::kStartDemo || k == EventKind::kStartAgentEpisode) in_episode = true;
    if (events[i].ends_episode || k == EventKind::kEndSession) in_episode = false;
    if (!in_episode) keep = i + 1;
  }
  events.resize(keep);
  return replay(info, env->second, events, dir);
}

}  // namespace bam::teaching
