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

#ifndef BAM_GRID_HPP_
#define BAM_GRID_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bam {

enum class DomainFamily { kNavigation, kFarming, kGravity };

const char* family_name(DomainFamily family);
DomainFamily parse_family(std::string_view name);

// Cell codes used in environment files.
namespace cell {
inline constexpr char kOpen = '.';
inline constexpr char kObstacle = '#';
inline constexpr char kDirt = 'd';
inline constexpr char kImmature = 'i';
inline constexpr char kGrown = 'g';
inline constexpr char kPlow = 'P';
inline constexpr char kSprinkler = 'S';
inline constexpr char kHarvester = 'H';
}  // namespace cell

struct TaskSpec {
  std::string name;
  std::vector<int> goal_cells;

  bool operator==(const TaskSpec&) const = default;
};

// Where episodes start. `rows` selects every enterable cell in rows
// [row_begin, row_end]; `open` selects every '.' cell.
struct InitialSpec {
  enum class Kind { kCells, kRows, kOpen };
  Kind kind = Kind::kOpen;
  std::vector<int> cells;
  int row_begin = 0;
  int row_end = 0;

  bool operator==(const InitialSpec&) const = default;
};

// Parsed environment file. Cells are row-major with row 0 at the top.
struct GridSpec {
  std::string name;
  DomainFamily family = DomainFamily::kNavigation;
  int width = 0;
  int height = 0;
  int horizon = 100;
  std::vector<char> cells;
  std::vector<TaskSpec> tasks;
  InitialSpec initial;
  // Gravity family: starting gravity direction (a GridAction in 0..3) and
  // the true direction each color index redirects gravity to.
  int initial_gravity = 1;
  std::vector<int> color_directions;

  int num_cells() const { return width * height; }
  int cell_index(int x, int y) const { return y * width + x; }
  int cell_x(int c) const { return c % width; }
  int cell_y(int c) const { return c / width; }
  char at(int c) const { return cells[static_cast<std::size_t>(c)]; }

  // Cells selected by `initial`, in ascending order.
  std::vector<int> initial_cells() const;

  bool operator==(const GridSpec&) const = default;
};

// Throws ParseError / ValidationError on malformed input.
GridSpec parse_environment(std::string_view text);
GridSpec read_environment_file(const std::filesystem::path& path);

// Canonical text form; parse_environment(serialize_environment(g)) == g and
// serializing a parsed canonical document reproduces it byte for byte.
std::string serialize_environment(const GridSpec& spec);

// Structural checks: bounds, goal and initial sets, codes legal for the
// family. Throws ValidationError.
void validate_grid(const GridSpec& spec);

}  // namespace bam

#endif  // BAM_GRID_HPP_
