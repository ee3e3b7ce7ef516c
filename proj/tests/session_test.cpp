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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "bam/error.hpp"
#include "support.hpp"

namespace bam::teaching {
namespace {

using bam::testing::environment_path;

// Corridor with a wall cell below the middle; goals at both ends.
std::shared_ptr<const Environment> corridor() {
  return std::make_shared<const Environment>(bam::testing::environment_from_text(
      "name: corridor\ndomain: navigation\nsize: 5 2\nhorizon: 20\n"
      "task: west 0,0\ntask: east 4,0\ninitial: cells 2,0\n"
      "grid:\n.....\n..#..\n"));
}

SessionEvent ev(EventKind kind, int value = -1) {
  SessionEvent e;
  e.kind = kind;
  e.value = value;
  return e;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bam_session_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

void must_apply(Session& s, SessionEvent e) {
  const ApplyResult r = s.apply(e);
  ASSERT_TRUE(r.accepted) << event_kind_name(e.kind) << ": " << r.reason;
}

TEST(Session, StartsIdleAtAnInitialState) {
  Session s({"a", "corridor", Algorithm::kBam, 1}, corridor());
  EXPECT_EQ(s.mode(), Mode::kIdle);
  EXPECT_EQ(s.state(), 2);
  EXPECT_EQ(s.task(), 0);
  EXPECT_TRUE(s.dataset().empty());
  EXPECT_EQ(s.dataset().num_tasks, 2);
}

TEST(Session, RejectsMismatchedEnvironment) {
  EXPECT_THROW(Session({"a", "doorway", Algorithm::kBam, 1}, corridor()), ValidationError);
}

TEST(Session, ScriptedSessionCountsMatchHandCount) {
  Session s({"a", "corridor", Algorithm::kBam, 2}, corridor());
  // Demo 1: west, two moves.
  must_apply(s, ev(EventKind::kSelectTask, 0));
  must_apply(s, ev(EventKind::kStartDemo));
  must_apply(s, ev(EventKind::kTeacherAction, kLeft));
  must_apply(s, ev(EventKind::kTeacherAction, kLeft));
  EXPECT_EQ(s.state(), 0);
  must_apply(s, ev(EventKind::kEndDemo));
  // Demo 2: east from the start, two moves.
  must_apply(s, ev(EventKind::kReset));
  must_apply(s, ev(EventKind::kSelectTask, 1));
  must_apply(s, ev(EventKind::kStartDemo));
  must_apply(s, ev(EventKind::kTeacherAction, kRight));
  must_apply(s, ev(EventKind::kTeacherAction, kRight));
  must_apply(s, ev(EventKind::kEndDemo));
  // Agent episode from the far corner, two steps with feedback, then reset.
  must_apply(s, ev(EventKind::kPlaceAgent, 5));
  must_apply(s, ev(EventKind::kStartAgentEpisode));
  must_apply(s, ev(EventKind::kAgentTick));
  must_apply(s, ev(EventKind::kFeedbackPositive));
  must_apply(s, ev(EventKind::kAgentTick));
  must_apply(s, ev(EventKind::kFeedbackNegative));
  const int ticks_left = s.mode() == Mode::kAgentControl ? 1 : 0;
  if (ticks_left) must_apply(s, ev(EventKind::kReset));

  const TeacherDataset& d = s.dataset();
  EXPECT_EQ(d.demonstrations.size(), 2u);
  EXPECT_EQ(d.demo_pairs(), 6u);  // 2 + no-op, twice
  EXPECT_EQ(d.demo_pairs(0), 3u);
  EXPECT_EQ(d.demo_pairs(1), 3u);
  EXPECT_EQ(d.feedback.size(), 2u);
  EXPECT_EQ(d.feedback[0].signal, Signal::kPositive);
  EXPECT_EQ(d.feedback[1].signal, Signal::kNegative);
  for (const FeedbackEvent& f : d.feedback) EXPECT_EQ(f.task, 1);
  EXPECT_EQ(d.transitions.size(), 6u + 2u);
  EXPECT_TRUE(d.demonstrations[0].terminal_noop);
  EXPECT_EQ(d.demonstrations[0].steps.back().action, kNoOp);
  // Feedback refers to the agent's own steps.
  EXPECT_EQ(d.feedback[0].state, d.transitions[6].state);
  EXPECT_EQ(d.feedback[0].action, d.transitions[6].action);
  EXPECT_EQ(d.feedback[1].state, d.transitions[7].state);
  s.wait_for_refits();
  EXPECT_EQ(s.snapshot().refits_completed, 3);
}

TEST(Session, MoveIntoObstacleStaysAndIsRecorded) {
  Session s({"a", "corridor", Algorithm::kBam, 3}, corridor());
  must_apply(s, ev(EventKind::kStartDemo));
  must_apply(s, ev(EventKind::kTeacherAction, kDown));  // (2,1) is a wall
  EXPECT_EQ(s.state(), 2);
  must_apply(s, ev(EventKind::kEndDemo));
  ASSERT_EQ(s.dataset().transitions.size(), 2u);
  EXPECT_EQ(s.dataset().transitions[0], (Transition{2, kDown, 2}));
}

TEST(Session, ModeGuardsLeaveTheSessionUnchanged) {
  Session s({"a", "corridor", Algorithm::kBam, 4}, corridor());
  must_apply(s, ev(EventKind::kStartDemo));
  const Snapshot before = s.snapshot();
  const std::vector<std::pair<SessionEvent, std::string>> bad = {
      {ev(EventKind::kFeedbackPositive), "agent-control"},
      {ev(EventKind::kFeedbackNegative), "agent-control"},
      {ev(EventKind::kAgentTick), "agent-control"},
      {ev(EventKind::kSelectTask, 1), "between episodes"},
      {ev(EventKind::kStartAgentEpisode), "already running"},
      {ev(EventKind::kStartDemo), "already running"},
      {ev(EventKind::kReset), "end the demonstration"},
      {ev(EventKind::kPlaceAgent, 0), "between episodes"},
      {ev(EventKind::kTeacherAction, kNoOp), "move"},
  };
  for (const auto& [e, fragment] : bad) {
    const ApplyResult r = s.apply(e);
    EXPECT_FALSE(r.accepted) << event_kind_name(e.kind);
    EXPECT_NE(r.reason.find(fragment), std::string::npos) << r.reason;
  }
  EXPECT_EQ(s.snapshot().events, before.events);
  EXPECT_EQ(s.state(), before.state);
  EXPECT_EQ(s.mode(), Mode::kTeacherControl);

  Session idle({"b", "corridor", Algorithm::kBam, 4}, corridor());
  EXPECT_FALSE(idle.apply(ev(EventKind::kTeacherAction, kLeft)).accepted);
  EXPECT_FALSE(idle.apply(ev(EventKind::kEndDemo)).accepted);
  EXPECT_FALSE(idle.apply(ev(EventKind::kSelectTask, 2)).accepted);
  EXPECT_FALSE(idle.apply(ev(EventKind::kPlaceAgent, 7)).accepted);  // wall
  must_apply(idle, ev(EventKind::kStartAgentEpisode));
  EXPECT_FALSE(idle.apply(ev(EventKind::kFeedbackPositive)).accepted) << "no action yet";
}

TEST(Session, SequenceNumbersMustIncrease) {
  Session s({"a", "corridor", Algorithm::kBam, 5}, corridor());
  SessionEvent e = ev(EventKind::kSelectTask, 1);
  e.seq = 5;
  must_apply(s, e);
  e.seq = 5;
  EXPECT_FALSE(s.apply(e).accepted);
  e.seq = 4;
  EXPECT_FALSE(s.apply(e).accepted);
  e.seq = 9;
  must_apply(s, e);
  e.seq.reset();
  must_apply(s, e);
  EXPECT_EQ(s.snapshot().last_seq, 9u);
}

TEST(Session, EndSessionDiscardsARunningEpisodeAndCloses) {
  Session s({"a", "corridor", Algorithm::kBam, 6}, corridor());
  must_apply(s, ev(EventKind::kStartDemo));
  must_apply(s, ev(EventKind::kTeacherAction, kLeft));
  must_apply(s, ev(EventKind::kEndSession));
  EXPECT_EQ(s.mode(), Mode::kClosed);
  EXPECT_TRUE(s.dataset().empty());
  EXPECT_EQ(s.snapshot().refits_requested, 0);
  EXPECT_FALSE(s.apply(ev(EventKind::kReset)).accepted);
}

TEST(Session, AgentAtGoalEndsTheEpisodeAndRefits) {
  Session s({"a", "corridor", Algorithm::kCloning, 7}, corridor());
  must_apply(s, ev(EventKind::kPlaceAgent, 0));
  must_apply(s, ev(EventKind::kStartAgentEpisode));
  const ApplyResult r = s.apply(ev(EventKind::kAgentTick));
  EXPECT_TRUE(r.accepted);
  EXPECT_TRUE(r.episode_ended);
  EXPECT_EQ(s.mode(), Mode::kIdle);
  EXPECT_EQ(s.snapshot().last_outcome, "goal");
  EXPECT_EQ(s.snapshot().refits_requested, 1);
}

TEST(Session, AgentEpisodeStopsAtTheHorizon) {
  Session s({"a", "corridor", Algorithm::kCloning, 8}, corridor());
  must_apply(s, ev(EventKind::kSelectTask, 1));
  must_apply(s, ev(EventKind::kStartAgentEpisode));
  int ticks = 0;
  while (s.mode() == Mode::kAgentControl) {
    must_apply(s, ev(EventKind::kAgentTick));
    ++ticks;
  }
  const std::string outcome = s.snapshot().last_outcome;
  EXPECT_TRUE(outcome == "goal" || (outcome == "horizon" && ticks == 20)) << outcome;
  EXPECT_LE(ticks, 20);
  EXPECT_EQ(s.dataset().transitions.size(), static_cast<std::size_t>(ticks));
}

// Random event streams, including invalid ones; the generator tracks which
// task is selected so attribution can be checked independently.
std::vector<SessionEvent> random_events(Rng& rng, int n) {
  std::vector<SessionEvent> out;
  for (int i = 0; i < n; ++i) {
    const auto kind = static_cast<EventKind>(uniform_index(rng, 10));  // all but end_session
    int value = -1;
    if (kind == EventKind::kSelectTask) value = uniform_index(rng, 2);
    if (kind == EventKind::kTeacherAction) value = uniform_index(rng, 4);
    if (kind == EventKind::kPlaceAgent) value = uniform_index(rng, 10);
    out.push_back(ev(kind, value));
  }
  return out;
}

TEST(SessionProperty, EventsAreAttributedToTheSelectedTask) {
  Rng rng = make_rng(101, {});
  for (int trial = 0; trial < 15; ++trial) {
    Session s({"p", "corridor", Algorithm::kCloning, 100 + static_cast<std::uint64_t>(trial)},
              corridor());
    std::size_t demos = 0, feedback = 0;
    for (const SessionEvent& e : random_events(rng, 120)) {
      const int task_before = s.task();
      const int requested_before = s.snapshot().refits_requested;
      const Mode mode_before = s.mode();
      const ApplyResult r = s.apply(e);
      if (!r.accepted) continue;
      const TeacherDataset& d = s.dataset();
      for (; demos < d.demonstrations.size(); ++demos) {
        EXPECT_EQ(d.demonstrations[demos].task, task_before);
      }
      for (; feedback < d.feedback.size(); ++feedback) {
        EXPECT_EQ(d.feedback[feedback].task, task_before);
      }
      // Refits are requested exactly when an episode ends.
      EXPECT_EQ(s.snapshot().refits_requested, requested_before + (r.episode_ended ? 1 : 0));
      if (r.episode_ended) EXPECT_NE(mode_before, Mode::kIdle);
    }
  }
}

TEST(SessionProperty, ReplayReproducesDatasetAndCheckpoint) {
  Rng rng = make_rng(102, {});
  for (Algorithm a : {Algorithm::kBam, Algorithm::kCloning, Algorithm::kModelBasedIrl}) {
    SessionInfo info{"r", "corridor", a, 55};
    Session live(info, corridor());
    for (const SessionEvent& e : random_events(rng, 80)) live.apply(e);
    live.wait_for_refits();
    const auto first = Session::replay(info, corridor(), live.log());
    const auto second = Session::replay(info, corridor(), live.log());
    first->wait_for_refits();
    second->wait_for_refits();
    EXPECT_EQ(first->dataset(), live.dataset());
    EXPECT_EQ(second->dataset(), first->dataset());
    EXPECT_EQ(dataset_to_string(second->dataset()), dataset_to_string(first->dataset()));
    EXPECT_EQ(first->checkpoint_text(), live.checkpoint_text());
    EXPECT_EQ(second->checkpoint_text(), first->checkpoint_text());
    EXPECT_EQ(first->log(), live.log());
    EXPECT_EQ(first->state(), live.state());
  }
}

TEST(SessionStorage, PersistsAndResumes) {
  const auto dir = fresh_dir("persist");
  const std::map<std::string, std::shared_ptr<const Environment>> catalog = {
      {"corridor", corridor()}};
  SessionInfo info{"abc", "corridor", Algorithm::kBam, 9};
  {
    Session s(info, corridor(), dir);
    must_apply(s, ev(EventKind::kStartDemo));
    must_apply(s, ev(EventKind::kTeacherAction, kLeft));
    must_apply(s, ev(EventKind::kEndDemo));
    must_apply(s, ev(EventKind::kSelectTask, 1));
    s.wait_for_refits();
    for (const char* f : {"session.json", "events.jsonl", "dataset.txt", "checkpoint.txt"}) {
      EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    std::ifstream in(dir / "dataset.txt");
    EXPECT_EQ(read_dataset(in), s.dataset());
  }
  const auto back = Session::resume(dir, catalog);
  back->wait_for_refits();
  EXPECT_EQ(back->info(), info);
  EXPECT_EQ(back->log().size(), 4u);
  EXPECT_EQ(back->task(), 1);
  EXPECT_EQ(back->dataset().demo_pairs(), 2u);
  std::ifstream ck(dir / "checkpoint.txt");
  std::stringstream text;
  text << ck.rdbuf();
  EXPECT_EQ(text.str(), back->checkpoint_text());
}

TEST(SessionStorage, ResumeDiscardsAnIncompleteEpisode) {
  const auto dir = fresh_dir("incomplete");
  const std::map<std::string, std::shared_ptr<const Environment>> catalog = {
      {"corridor", corridor()}};
  {
    Session s({"x", "corridor", Algorithm::kCloning, 10}, corridor(), dir);
    must_apply(s, ev(EventKind::kStartDemo));
    must_apply(s, ev(EventKind::kTeacherAction, kRight));
    must_apply(s, ev(EventKind::kEndDemo));
    must_apply(s, ev(EventKind::kStartDemo));
    must_apply(s, ev(EventKind::kTeacherAction, kLeft));
    // No end_demo: the process "crashes" here.
  }
  const auto back = Session::resume(dir, catalog);
  EXPECT_EQ(back->mode(), Mode::kIdle);
  EXPECT_EQ(back->log().size(), 3u);
  EXPECT_EQ(back->dataset().demonstrations.size(), 1u);
  // The truncated log is what is on disk now.
  const auto again = Session::resume(dir, catalog);
  EXPECT_EQ(again->log(), back->log());
}

TEST(SessionStorage, WriteFailureMakesTheSessionReadOnly) {
  const auto dir = fresh_dir("readonly");
  Session s({"y", "corridor", Algorithm::kCloning, 11}, corridor(), dir);
  std::filesystem::remove(dir / "events.jsonl");
  std::filesystem::create_directory(dir / "events.jsonl");
  must_apply(s, ev(EventKind::kSelectTask, 1));
  const ApplyResult r = s.apply(ev(EventKind::kSelectTask, 0));
  EXPECT_FALSE(r.accepted);
  EXPECT_NE(r.reason.find("read-only"), std::string::npos);
  EXPECT_FALSE(s.snapshot().read_only_reason.empty());
  EXPECT_EQ(s.task(), 1);
}

TEST(SessionStorage, ResumeRejectsUnknownEnvironment) {
  const auto dir = fresh_dir("unknown");
  { Session s({"z", "corridor", Algorithm::kBam, 12}, corridor(), dir); }
  EXPECT_THROW(Session::resume(dir, {}), ValidationError);
}

TEST(Wire, ParsesEventMessages) {
  const auto env = load_environment(environment_path("two_fields"));
  const Domain& d = *env.domain;
  auto parse = [&](const std::string& s) { return parse_event_message(s, d); };
  SessionEvent e = parse(R"({"v":1,"type":"event","seq":3,"kind":"teacher_action","action":"up"})");
  EXPECT_EQ(e.kind, EventKind::kTeacherAction);
  EXPECT_EQ(e.value, kUp);
  EXPECT_EQ(e.seq, 3u);
  e = parse(R"({"type":"event","kind":"teacher_action","action":2})");
  EXPECT_EQ(e.value, 2);
  EXPECT_FALSE(e.seq);
  e = parse(R"({"type":"event","kind":"select_task","task":1})");
  EXPECT_EQ(e.value, 1);
  e = parse(R"({"type":"event","kind":"select_task","task":")" + d.spec().tasks[1].name +
            R"("})");
  EXPECT_EQ(e.value, 1);
  e = parse(R"({"type":"event","kind":"place_agent","cell":[2,1]})");
  EXPECT_EQ(e.value, d.spec().cell_index(2, 1));
  e = parse(R"({"type":"event","kind":"feedback_negative"})");
  EXPECT_EQ(e.kind, EventKind::kFeedbackNegative);

  for (const char* bad : {"nope", "[]", R"({"type":"event"})", R"({"type":"hello","kind":"reset"})",
                          R"({"v":2,"type":"event","kind":"reset"})",
                          R"({"type":"event","kind":"jump"})",
                          R"({"type":"event","kind":"teacher_action","action":"north"})",
                          R"({"type":"event","kind":"teacher_action"})",
                          R"({"type":"event","kind":"select_task","task":"moon"})",
                          R"({"type":"event","kind":"place_agent","cell":[99,0]})",
                          R"({"type":"event","kind":"place_agent","cell":[1]})",
                          R"({"type":"event","seq":-1,"kind":"reset"})"}) {
    EXPECT_THROW(parse(bad), ValidationError) << bad;
  }
}

TEST(Wire, LogLinesRoundTrip) {
  Rng rng = make_rng(103, {});
  for (int i = 0; i < 200; ++i) {
    SessionEvent e = ev(static_cast<EventKind>(uniform_index(rng, 11)));
    if (uniform01(rng) < 0.5) e.value = static_cast<int>(uniform_index(rng, 100));
    if (uniform01(rng) < 0.5) e.seq = uniform_index(rng, 1u << 30);
    if (uniform01(rng) < 0.3) e.policy_version = static_cast<int>(uniform_index(rng, 9));
    e.ends_episode = uniform01(rng) < 0.3;
    EXPECT_EQ(parse_log_line(log_line(e, i)), e);
  }
  for (int k = 0; k < 11; ++k) {
    EXPECT_EQ(parse_event_kind(event_kind_name(static_cast<EventKind>(k))),
              static_cast<EventKind>(k));
  }
  const SessionInfo info{"id1", "wall", Algorithm::kGlobalCostIrl, 18446744073709551615ull};
  EXPECT_EQ(parse_session_info(session_info_json(info)), info);
}

TEST(Wire, SnapshotCarriesStateForTheClient) {
  const auto env = std::make_shared<const Environment>(load_environment(environment_path("two_fields")));
  Session s({"snap", "two_fields", Algorithm::kBam, 13}, env);
  const std::string m = snapshot_message(s.snapshot(), *env->domain);
  for (const char* key : {"\"type\":\"snapshot\"", "\"mode\":\"idle\"", "\"implement\":\"none\"",
                          "\"tasks\":[", "\"cell\":[", "\"counts\":", "\"learner\":",
                          "\"session\":\"snap\"", "\"v\":1"}) {
    EXPECT_NE(m.find(key), std::string::npos) << key << " in " << m;
  }
  const std::string err = error_message("nope", 4);
  EXPECT_NE(err.find("\"type\":\"error\""), std::string::npos);
  EXPECT_NE(err.find("\"seq\":4"), std::string::npos);
}

}  // namespace
}  // namespace bam::teaching
