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

#ifndef BAM_TEACHING_SESSION_HPP_
#define BAM_TEACHING_SESSION_HPP_

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bam/agent.hpp"
#include "bam/dataset.hpp"
#include "bam/domain.hpp"

namespace bam::teaching {

inline constexpr int kProtocolVersion = 1;

enum class Mode { kIdle, kTeacherControl, kAgentControl, kClosed };

const char* mode_name(Mode mode);

enum class EventKind {
  kSelectTask,
  kStartDemo,
  kTeacherAction,
  kEndDemo,
  kStartAgentEpisode,
  kAgentTick,
  kFeedbackPositive,
  kFeedbackNegative,
  kReset,
  kPlaceAgent,
  kEndSession,
};

const char* event_kind_name(EventKind kind);
EventKind parse_event_kind(std::string_view name);

struct SessionEvent {
  EventKind kind = EventKind::kReset;
  // Task index (select_task), action index (teacher_action) or cell index
  // (place_agent); -1 otherwise.
  int value = -1;
  // Client sequence number; must increase strictly within a session.
  std::optional<std::uint64_t> seq;
  // Learner version an agent episode runs with. Filled in when the event is
  // applied live; taken from the log on replay.
  std::optional<int> policy_version;
  // Set when applying the event ended an episode; lets a resumed session
  // find the last episode boundary without replaying.
  bool ends_episode = false;

  bool operator==(const SessionEvent&) const = default;
};

// Inbound wire message, e.g.
//   {"v":1,"type":"event","seq":7,"kind":"teacher_action","action":"up"}
// Throws ValidationError with a readable reason.
SessionEvent parse_event_message(std::string_view text, const Domain& domain);

// One line of events.jsonl.
std::string log_line(const SessionEvent& event, long index);
SessionEvent parse_log_line(std::string_view line);

struct SessionInfo {
  std::string id;
  std::string environment;
  Algorithm algorithm = Algorithm::kBam;
  std::uint64_t seed = 0;

  bool operator==(const SessionInfo&) const = default;
};

std::string session_info_json(const SessionInfo& info);
SessionInfo parse_session_info(std::string_view text);

enum class EpisodeKind { kNone, kDemo, kAgent };

struct Snapshot {
  SessionInfo info;
  Mode mode = Mode::kIdle;
  int task = 0;
  int state = 0;
  EpisodeKind episode = EpisodeKind::kNone;
  int episode_steps = 0;
  // How the last episode ended: goal, horizon, reset, teacher, or empty.
  std::string last_outcome;
  long events = 0;
  std::optional<std::uint64_t> last_seq;
  std::size_t demo_pairs = 0;
  std::size_t feedback_events = 0;
  std::size_t transitions = 0;
  int refits_requested = 0;
  int refits_completed = 0;
  int policy_version = 0;
  std::string read_only_reason;
};

// Outbound {"v":1,"type":"snapshot",...} message.
std::string snapshot_message(const Snapshot& snapshot, const Domain& domain);
std::string error_message(std::string_view reason, std::optional<std::uint64_t> seq);

struct ApplyResult {
  bool accepted = false;
  std::string reason;
  bool episode_ended = false;
};

// One teaching session: the interaction state machine, the dataset it
// accumulates and a background learner that refits after every episode.
// Not thread-safe; the owner serializes calls. Refits run on an internal
// worker thread and are numbered, so the learner version an agent episode
// used can be replayed exactly.
//
// With a directory, the session persists session.json, events.jsonl,
// dataset.txt (at episode boundaries) and checkpoint.txt (after each refit).
class Session {
 public:
  Session(SessionInfo info, std::shared_ptr<const Environment> env,
          std::filesystem::path dir = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ApplyResult apply(SessionEvent event);

  Snapshot snapshot() const;
  const SessionInfo& info() const { return info_; }
  const Environment& environment() const { return *env_; }
  Mode mode() const { return mode_; }
  int state() const { return state_; }
  int task() const { return task_; }
  const TeacherDataset& dataset() const { return data_; }
  const std::vector<SessionEvent>& log() const { return log_; }
  // Blocks until every requested refit has finished.
  void wait_for_refits();
  // Checkpoint text of the latest finished refit.
  std::string checkpoint_text() const;
  // Policies of learner version `version` (0 is the untrained learner).
  std::shared_ptr<const Agent> learner(int version) const;

  // Rebuilds a session by applying a logged event sequence.
  static std::unique_ptr<Session> replay(SessionInfo info,
                                         std::shared_ptr<const Environment> env,
                                         const std::vector<SessionEvent>& events,
                                         std::filesystem::path dir = {});
  // Loads a persisted session, dropping an episode left incomplete.
  static std::unique_ptr<Session> resume(
      const std::filesystem::path& dir,
      const std::map<std::string, std::shared_ptr<const Environment>>& catalog);

 private:
  struct Refitter;

  ApplyResult reject(std::string reason) const { return {false, std::move(reason), false}; }
  ApplyResult dispatch(const SessionEvent& event, Rng& rng);
  void begin_episode(EpisodeKind kind);
  void finish_episode(std::string outcome);
  void discard_episode();
  void persist_event(const SessionEvent& event);
  void persist_dataset();
  void mark_read_only(const std::string& reason);

  SessionInfo info_;
  std::shared_ptr<const Environment> env_;
  std::filesystem::path dir_;
  bool replaying_ = false;

  Mode mode_ = Mode::kIdle;
  int task_ = 0;
  int state_ = 0;
  std::optional<std::uint64_t> last_seq_;
  std::vector<SessionEvent> log_;
  TeacherDataset data_;

  EpisodeKind episode_ = EpisodeKind::kNone;
  int episode_steps_ = 0;
  std::string last_outcome_;
  Demonstration demo_;
  std::vector<Transition> pending_transitions_;
  std::vector<FeedbackEvent> pending_feedback_;
  std::optional<StateAction> last_agent_action_;
  std::shared_ptr<const Agent> episode_learner_;
  int episode_version_ = 0;

  int refits_requested_ = 0;
  std::string read_only_reason_;
  std::unique_ptr<Refitter> refitter_;
};

// Writes `text` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace bam::teaching

#endif  // BAM_TEACHING_SESSION_HPP_
