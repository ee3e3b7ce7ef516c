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

#include "bam/grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bam/error.hpp"
#include "bam/mdp.hpp"

namespace bam {

namespace {

bool start_eligible(char code) {
  return code == cell::kOpen || (code >= '0' && code <= '9');
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

int parse_int(const std::string& tok, int line) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  return value;
}

// "x,y" -> (x, y)
std::pair<int, int> parse_coord(const std::string& tok, int line) {
  const auto comma = tok.find(',');
  if (comma == std::string::npos) {
    throw ParseError("expected a cell as x,y, got '" + tok + "'", line);
  }
  return {parse_int(tok.substr(0, comma), line),
          parse_int(tok.substr(comma + 1), line)};
}

int parse_direction(const std::string& tok, int line) {
  const int d = parse_grid_action(tok);
  if (d < 0 || d == kNoOp || std::isdigit(static_cast<unsigned char>(tok[0]))) {
    throw ParseError("expected a direction (up/down/left/right), got '" + tok + "'",
                     line);
  }
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const char* family_name(DomainFamily family) {
  switch (family) {
    case DomainFamily::kNavigation: return "navigation";
    case DomainFamily::kFarming: return "farming";
    case DomainFamily::kGravity: return "gravity";
  }
  return "?";
}

DomainFamily parse_family(std::string_view name) {
  if (name == "navigation") return DomainFamily::kNavigation;
  if (name == "farming") return DomainFamily::kFarming;
  if (name == "gravity") return DomainFamily::kGravity;
  throw ValidationError("unknown domain family '" + std::string(name) + "'");
}

std::vector<int> GridSpec::initial_cells() const {
  std::vector<int> out;
  switch (initial.kind) {
    case InitialSpec::Kind::kCells:
      out = initial.cells;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    case InitialSpec::Kind::kRows:
      for (int y = std::max(0, initial.row_begin);
           y <= std::min(height - 1, initial.row_end); ++y) {
        for (int x = 0; x < width; ++x) {
          if (start_eligible(at(cell_index(x, y)))) out.push_back(cell_index(x, y));
        }
      }
      break;
    case InitialSpec::Kind::kOpen:
      for (int c = 0; c < num_cells(); ++c) {
        if (at(c) == cell::kOpen) out.push_back(c);
      }
      break;
  }
  return out;
}

void validate_grid(const GridSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw ValidationError("grid size must be positive");
  }
  if (static_cast<int>(spec.cells.size()) != spec.num_cells()) {
    throw ValidationError("grid has " + std::to_string(spec.cells.size()) +
                          " cells, expected " + std::to_string(spec.num_cells()));
  }
  if (spec.horizon < 1) throw ValidationError("horizon must be >= 1");
  int max_color = -1;
  for (int c = 0; c < spec.num_cells(); ++c) {
    const char code = spec.at(c);
    bool legal = code == cell::kOpen || code == cell::kObstacle;
    switch (spec.family) {
      case DomainFamily::kNavigation:
        break;
      case DomainFamily::kFarming:
        legal = legal || std::string_view("digPSH").find(code) != std::string_view::npos;
        break;
      case DomainFamily::kGravity:
        if (code >= '0' && code <= '9') {
          legal = true;
          max_color = std::max(max_color, code - '0');
        }
        break;
    }
    if (!legal) {
      throw ValidationError(std::string("cell code '") + code + "' at (" +
                            std::to_string(spec.cell_x(c)) + "," +
                            std::to_string(spec.cell_y(c)) + ") is not valid for " +
                            family_name(spec.family));
    }
  }
  if (spec.family == DomainFamily::kGravity) {
    if (static_cast<int>(spec.color_directions.size()) < max_color + 1) {
      throw ValidationError("gravity color " + std::to_string(max_color) +
                            " has no direction");
    }
    for (int d : spec.color_directions) {
      if (d < 0 || d > 3) throw ValidationError("gravity direction out of range");
    }
    if (spec.initial_gravity < 0 || spec.initial_gravity > 3) {
      throw ValidationError("initial gravity out of range");
    }
  }
  if (spec.tasks.empty()) throw ValidationError("environment defines no tasks");
  for (const TaskSpec& task : spec.tasks) {
    if (task.goal_cells.empty()) {
      throw ValidationError("task '" + task.name + "' has no goal cell");
    }
    for (int g : task.goal_cells) {
      if (g < 0 || g >= spec.num_cells()) {
        throw ValidationError("goal of task '" + task.name + "' is out of bounds");
      }
    }
  }
  for (int c : spec.initial.cells) {
    if (c < 0 || c >= spec.num_cells()) {
      throw ValidationError("initial cell out of bounds");
    }
  }
  const auto starts = spec.initial_cells();
  if (starts.empty()) throw ValidationError("initial state distribution is empty");
  for (int c : starts) {
    if (spec.at(c) == cell::kObstacle) {
      throw ValidationError("initial cell (" + std::to_string(spec.cell_x(c)) + "," +
                            std::to_string(spec.cell_y(c)) + ") is an obstacle");
    }
  }
}

GridSpec parse_environment(std::string_view text) {
  GridSpec spec;
  bool have_size = false;
  bool have_domain = false;
  bool have_initial = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  // Tasks and initial cells are given as coordinates; resolve after size.
  std::vector<std::pair<std::string, std::vector<std::pair<int, int>>>> tasks;
  std::vector<std::pair<int, int>> initial_coords;
  std::vector<std::pair<int, int>> colors;
  bool in_grid = false;
  int grid_row = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (in_grid) {
      std::string row = trim(raw);
      if (row.empty()) continue;
      if (grid_row >= spec.height) throw ParseError("too many grid rows", line);
      if (static_cast<int>(row.size()) != spec.width) {
        throw ParseError("grid row has " + std::to_string(row.size()) +
                             " cells, expected " + std::to_string(spec.width),
                         line);
      }
      spec.cells.insert(spec.cells.end(), row.begin(), row.end());
      ++grid_row;
      continue;
    }
    const std::string stripped = trim(raw);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto colon = stripped.find(':');
    if (colon == std::string::npos) {
      throw ParseError("expected 'key: value', got '" + stripped + "'", line);
    }
    const std::string key = trim(std::string_view(stripped).substr(0, colon));
    const auto args = split_ws(std::string_view(stripped).substr(colon + 1));
    auto need = [&](std::size_t n) {
      if (args.size() < n) throw ParseError("'" + key + "' needs more values", line);
    };
    if (key == "name") {
      need(1);
      spec.name = args[0];
    } else if (key == "domain") {
      need(1);
      try {
        spec.family = parse_family(args[0]);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line);
      }
      have_domain = true;
    } else if (key == "size") {
      need(2);
      spec.width = parse_int(args[0], line);
      spec.height = parse_int(args[1], line);
      if (spec.width <= 0 || spec.height <= 0) {
        throw ParseError("size must be positive", line);
      }
      have_size = true;
    } else if (key == "horizon") {
      need(1);
      spec.horizon = parse_int(args[0], line);
    } else if (key == "gravity") {
      need(1);
      spec.initial_gravity = parse_direction(args[0], line);
    } else if (key == "color") {
      need(2);
      colors.emplace_back(parse_int(args[0], line), parse_direction(args[1], line));
    } else if (key == "task") {
      need(2);
      std::vector<std::pair<int, int>> goals;
      for (std::size_t i = 1; i < args.size(); ++i) goals.push_back(parse_coord(args[i], line));
      tasks.emplace_back(args[0], std::move(goals));
    } else if (key == "initial") {
      need(1);
      have_initial = true;
      if (args[0] == "open") {
        spec.initial.kind = InitialSpec::Kind::kOpen;
      } else if (args[0] == "rows") {
        need(3);
        spec.initial.kind = InitialSpec::Kind::kRows;
        spec.initial.row_begin = parse_int(args[1], line);
        spec.initial.row_end = parse_int(args[2], line);
      } else if (args[0] == "cells") {
        need(2);
        spec.initial.kind = InitialSpec::Kind::kCells;
        for (std::size_t i = 1; i < args.size(); ++i) {
          initial_coords.push_back(parse_coord(args[i], line));
        }
      } else {
        throw ParseError("unknown initial mode '" + args[0] + "'", line);
      }
    } else if (key == "grid") {
      if (!have_size) throw ParseError("'grid' before 'size'", line);
      in_grid = true;
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  if (!have_domain) throw ParseError("missing 'domain'", 0);
  if (!have_size) throw ParseError("missing 'size'", 0);
  if (!have_initial) throw ParseError("missing 'initial'", 0);
  if (grid_row != spec.height) {
    throw ParseError("grid has " + std::to_string(grid_row) + " rows, expected " +
                         std::to_string(spec.height),
                     line);
  }
  auto to_cell = [&](std::pair<int, int> xy, const std::string& what) {
    if (xy.first < 0 || xy.first >= spec.width || xy.second < 0 ||
        xy.second >= spec.height) {
      throw ValidationError(what + " (" + std::to_string(xy.first) + "," +
                            std::to_string(xy.second) + ") is out of bounds");
    }
    return spec.cell_index(xy.first, xy.second);
  };
  for (auto& [name, goals] : tasks) {
    TaskSpec task{name, {}};
    for (auto xy : goals) task.goal_cells.push_back(to_cell(xy, "goal of task '" + name + "'"));
    spec.tasks.push_back(std::move(task));
  }
  for (auto xy : initial_coords) spec.initial.cells.push_back(to_cell(xy, "initial cell"));
  for (auto [index, dir] : colors) {
    if (index < 0 || index > 9) throw ValidationError("color index must be 0..9");
    if (static_cast<int>(spec.color_directions.size()) <= index) {
      spec.color_directions.resize(index + 1, -1);
    }
    spec.color_directions[index] = dir;
  }
  validate_grid(spec);
  return spec;
}

GridSpec read_environment_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open environment file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  GridSpec spec = parse_environment(buf.str());
  if (spec.name.empty()) spec.name = path.stem().string();
  return spec;
}

std::string serialize_environment(const GridSpec& spec) {
  std::ostringstream out;
  auto coord = [&](int c) {
    return std::to_string(spec.cell_x(c)) + "," + std::to_string(spec.cell_y(c));
  };
  if (!spec.name.empty()) out << "name: " << spec.name << '\n';
  out << "domain: " << family_name(spec.family) << '\n';
  out << "size: " << spec.width << ' ' << spec.height << '\n';
  out << "horizon: " << spec.horizon << '\n';
  if (spec.family == DomainFamily::kGravity) {
    out << "gravity: " << grid_action_name(spec.initial_gravity) << '\n';
    for (std::size_t k = 0; k < spec.color_directions.size(); ++k) {
      out << "color: " << k << ' ' << grid_action_name(spec.color_directions[k]) << '\n';
    }
  }
  for (const TaskSpec& task : spec.tasks) {
    out << "task: " << task.name;
    for (int g : task.goal_cells) out << ' ' << coord(g);
    out << '\n';
  }
  switch (spec.initial.kind) {
    case InitialSpec::Kind::kOpen:
      out << "initial: open\n";
      break;
    case InitialSpec::Kind::kRows:
      out << "initial: rows " << spec.initial.row_begin << ' ' << spec.initial.row_end << '\n';
      break;
    case InitialSpec::Kind::kCells:
      out << "initial: cells";
      for (int c : spec.initial.cells) out << ' ' << coord(c);
      out << '\n';
      break;
  }
  out << "grid:\n";
  for (int y = 0; y < spec.height; ++y) {
    out.write(spec.cells.data() + static_cast<std::ptrdiff_t>(y) * spec.width, spec.width);
    out << '\n';
  }
  return out.str();
}

}  // namespace bam
