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

#include "bam/dataset.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bam/error.hpp"
#include "bam/mdp.hpp"

namespace bam {

const char* signal_code(Signal s) {
  switch (s) {
    case Signal::kPositive: return "+";
    case Signal::kNegative: return "-";
    case Signal::kNone: return "0";
  }
  return "?";
}

std::size_t TeacherDataset::demo_pairs() const {
  std::size_t n = 0;
  for (const Demonstration& d : demonstrations) n += d.steps.size();
  return n;
}

std::size_t TeacherDataset::demo_pairs(int task) const {
  std::size_t n = 0;
  for (const Demonstration& d : demonstrations) {
    if (d.task == task) n += d.steps.size();
  }
  return n;
}

std::size_t TeacherDataset::feedback_events(int task) const {
  std::size_t n = 0;
  for (const FeedbackEvent& f : feedback) n += f.task == task;
  return n;
}

void write_dataset(std::ostream& out, const TeacherDataset& data) {
  out << "bam-dataset 1\n";
  out << "tasks " << data.num_tasks << '\n';
  for (std::size_t i = 0; i < data.demonstrations.size(); ++i) {
    const Demonstration& demo = data.demonstrations[i];
    for (std::size_t k = 0; k < demo.steps.size(); ++k) {
      const bool synthetic = demo.terminal_noop && k + 1 == demo.steps.size();
      out << (synthetic ? 'N' : 'D') << ' ' << demo.task << ' ' << demo.steps[k].state
          << ' ' << demo.steps[k].action << ' ' << i << '\n';
    }
    if (demo.truncated) out << "X " << demo.task << " - - " << i << '\n';
    // An empty demonstration still needs a record to keep numbering.
    if (demo.steps.empty() && !demo.truncated) {
      out << "X " << demo.task << " - - " << i << " empty\n";
    }
  }
  for (const FeedbackEvent& f : data.feedback) {
    out << "F " << f.task << ' ' << f.state << ' ' << f.action << ' '
        << signal_code(f.signal) << ' ' << f.timestamp << '\n';
  }
  for (const Transition& t : data.transitions) {
    out << "T - " << t.state << ' ' << t.action << ' ' << t.next << '\n';
  }
}

std::string dataset_to_string(const TeacherDataset& data) {
  std::ostringstream out;
  write_dataset(out, data);
  return out.str();
}

namespace {

long to_long(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw ParseError("bad integer '" + tok + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad integer '" + tok + "'", line);
  }
}

}  // namespace

TeacherDataset read_dataset(std::istream& in) {
  TeacherDataset data;
  std::string raw;
  int line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream fields(raw);
    std::string kind;
    if (!(fields >> kind) || kind[0] == '#') continue;
    if (!have_header) {
      std::string version;
      fields >> version;
      if (kind != "bam-dataset" || version != "1") {
        throw ParseError("expected 'bam-dataset 1' header", line);
      }
      have_header = true;
      continue;
    }
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    auto check_task = [&](int task) {
      if (task < 0 || task >= data.num_tasks) {
        throw ParseError("task id " + std::to_string(task) + " out of range", line);
      }
    };
    auto need = [&](std::size_t n) {
      if (tok.size() < n) throw ParseError("record '" + kind + "' is too short", line);
    };
    if (kind == "tasks") {
      need(1);
      data.num_tasks = static_cast<int>(to_long(tok[0], line));
    } else if (kind == "D" || kind == "N" || kind == "X") {
      need(4);
      const auto demo = static_cast<std::size_t>(to_long(tok[3], line));
      if (demo > data.demonstrations.size()) {
        throw ParseError("demonstration index skips ahead", line);
      }
      if (demo == data.demonstrations.size()) {
        data.demonstrations.push_back({});
        data.demonstrations.back().task = static_cast<int>(to_long(tok[0], line));
      }
      Demonstration& d = data.demonstrations[demo];
      check_task(d.task);
      if (kind == "X") {
        d.truncated = tok.size() < 5;
      } else {
        if (d.terminal_noop) throw ParseError("pair after terminal no-op", line);
        d.steps.push_back({static_cast<int>(to_long(tok[1], line)),
                           static_cast<int>(to_long(tok[2], line))});
        d.terminal_noop = kind == "N";
      }
    } else if (kind == "F") {
      need(5);
      FeedbackEvent f;
      f.task = static_cast<int>(to_long(tok[0], line));
      check_task(f.task);
      f.state = static_cast<int>(to_long(tok[1], line));
      f.action = static_cast<int>(to_long(tok[2], line));
      if (tok[3] == "+") {
        f.signal = Signal::kPositive;
      } else if (tok[3] == "-") {
        f.signal = Signal::kNegative;
      } else if (tok[3] == "0") {
        f.signal = Signal::kNone;
      } else {
        throw ParseError("bad feedback signal '" + tok[3] + "'", line);
      }
      f.timestamp = to_long(tok[4], line);
      data.feedback.push_back(f);
    } else if (kind == "T") {
      need(4);
      data.transitions.push_back({static_cast<int>(to_long(tok[1], line)),
                                  static_cast<int>(to_long(tok[2], line)),
                                  static_cast<int>(to_long(tok[3], line))});
    } else {
      throw ParseError("unknown record kind '" + kind + "'", line);
    }
  }
  if (!have_header) throw ParseError("empty dataset document", 0);
  return data;
}

TeacherDataset dataset_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

void validate_dataset(const TeacherDataset& data, int num_states, int num_actions) {
  auto check = [&](int s, int a, const char* what) {
    if (s < 0 || s >= num_states || a < 0 || a >= num_actions) {
      throw ValidationError(std::string(what) + " references state " +
                            std::to_string(s) + ", action " + std::to_string(a) +
                            " outside the model");
    }
  };
  auto check_task = [&](int task) {
    if (task < 0 || task >= data.num_tasks) {
      throw ValidationError("task id " + std::to_string(task) + " out of range");
    }
  };
  for (const Demonstration& d : data.demonstrations) {
    check_task(d.task);
    for (const StateAction& sa : d.steps) check(sa.state, sa.action, "demonstration");
  }
  for (const FeedbackEvent& f : data.feedback) {
    check_task(f.task);
    check(f.state, f.action, "feedback event");
  }
  for (const Transition& t : data.transitions) {
    check(t.state, t.action, "transition");
    check(t.next, 0, "transition successor");
  }
}

}  // namespace bam
