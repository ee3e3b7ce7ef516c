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

#ifndef BAM_DATASET_HPP_
#define BAM_DATASET_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bam/teacher.hpp"

namespace bam {

struct StateAction {
  int state;
  int action;

  bool operator==(const StateAction&) const = default;
};

struct Demonstration {
  int task = 0;
  std::vector<StateAction> steps;
  // The last step is the synthetic no-op shown at the end of the demo.
  bool terminal_noop = false;
  // The teacher hit the step cap before reaching a goal.
  bool truncated = false;

  bool operator==(const Demonstration&) const = default;
};

struct FeedbackEvent {
  int task = 0;
  int state = 0;
  int action = 0;
  Signal signal = Signal::kNone;
  long timestamp = 0;

  bool operator==(const FeedbackEvent&) const = default;
};

struct Transition {
  int state;
  int action;
  int next;

  bool operator==(const Transition&) const = default;
};

// Teacher data split by task (demonstrations, feedback) plus every observed
// transition, whoever acted.
struct TeacherDataset {
  int num_tasks = 0;
  std::vector<Demonstration> demonstrations;
  std::vector<FeedbackEvent> feedback;
  std::vector<Transition> transitions;

  std::size_t demo_pairs() const;
  std::size_t demo_pairs(int task) const;
  std::size_t feedback_events(int task) const;
  bool empty() const {
    return demonstrations.empty() && feedback.empty() && transitions.empty();
  }

  bool operator==(const TeacherDataset&) const = default;
};

// Line-delimited dataset format, version 1:
//
//   bam-dataset 1
//   tasks <n>
//   D <task> <state> <action> <demo>      demonstrated pair
//   N <task> <state> <action> <demo>      synthetic terminal no-op pair
//   X <task> - - <demo>                   demo truncated at the step cap
//   F <task> <state> <action> <+|-|0> <timestamp>
//   T - <state> <action> <next>           observed transition
//
// Demonstrations are numbered in file order; blank lines and lines starting
// with '#' are ignored.
void write_dataset(std::ostream& out, const TeacherDataset& data);
std::string dataset_to_string(const TeacherDataset& data);
TeacherDataset read_dataset(std::istream& in);
TeacherDataset dataset_from_string(const std::string& text);

// Throws ValidationError if any index is outside the given spaces.
void validate_dataset(const TeacherDataset& data, int num_states, int num_actions);

const char* signal_code(Signal s);

}  // namespace bam

#endif  // BAM_DATASET_HPP_
