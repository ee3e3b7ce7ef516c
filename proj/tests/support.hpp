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

#ifndef BAM_TESTS_SUPPORT_HPP_
#define BAM_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bam/dataset.hpp"
#include "bam/domain.hpp"
#include "bam/grid.hpp"
#include "bam/mdp.hpp"
#include "bam/objective.hpp"
#include "bam/rng.hpp"

namespace bam::testing {

inline std::string environment_path(const std::string& name) {
  return std::string(BAM_ENVIRONMENT_DIR) + "/" + name + ".env";
}

inline Environment environment_from_text(const std::string& text) {
  return make_environment(parse_environment(text));
}

// A grid environment from rows; tasks as "name x,y ..." lines.
inline Environment grid_environment(const std::string& family,
                                    const std::vector<std::string>& rows,
                                    const std::vector<std::string>& tasks,
                                    const std::string& extra = "",
                                    const std::string& initial = "open") {
  std::string text = "name: fixture\ndomain: " + family + "\nsize: " +
                     std::to_string(rows.at(0).size()) + " " + std::to_string(rows.size()) +
                     "\nhorizon: 30\n" + extra;
  for (const auto& t : tasks) text += "task: " + t + "\n";
  text += "initial: " + initial + "\ngrid:\n";
  for (const auto& r : rows) text += r + "\n";
  return environment_from_text(text);
}

inline std::vector<double> random_vector(Rng& rng, int n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

// Central difference of f along coordinate i of x.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

// |a - b| <= rel * max(|a|, |b|) or |a - b| <= abs_floor.
inline bool close(double a, double b, double rel, double abs_floor) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}


// Environments with at most 8 states, drawn from a fixed set of layouts.
inline Environment small_environment(DomainFamily family, Rng& rng) {
  switch (family) {
    case DomainFamily::kNavigation:
      switch (uniform_index(rng, 3)) {
        case 0: return grid_environment("navigation", {"....", "..#."}, {"a 3,0", "b 0,1"});
        case 1: return grid_environment("navigation", {"...", ".#."}, {"a 2,1"});
        default: return grid_environment("navigation", {"..", "..", ".."}, {"a 1,2", "b 0,0"});
      }
    case DomainFamily::kFarming:
      switch (uniform_index(rng, 4)) {
        case 0: return grid_environment("farming", {"Pd"}, {"plow 1,0"}, "", "cells 0,0");
        case 1: return grid_environment("farming", {"Si"}, {"water 1,0"}, "", "cells 0,0");
        case 2: return grid_environment("farming", {"gH"}, {"harvest 0,0"}, "", "cells 1,0");
        default: return grid_environment("farming", {"P", "g"}, {"field 0,1", "shed 0,0"}, "",
                                         "cells 0,0");
      }
    case DomainFamily::kGravity:
      switch (uniform_index(rng, 3)) {
        case 0: return grid_environment("gravity", {".0"}, {"a 0,0"}, "color: 0 up\n");
        case 1: return grid_environment("gravity", {"01"}, {"a 0,0", "b 1,0"},
                                        "color: 0 left\ncolor: 1 up\n", "cells 0,0");
        default: return grid_environment("gravity", {"1", "."}, {"a 0,1"},
                                         "color: 0 down\ncolor: 1 right\ngravity: left\n");
      }
  }
  throw std::logic_error("unknown family");
}

inline Parameters random_parameters(const ParametricModel& family, const ModelOptions& options,
                                    Rng& rng, double scale) {
  Parameters x = Parameters::zeros(family, options);
  x.theta = random_vector(rng, static_cast<int>(x.theta.size()), scale);
  for (auto& phi : x.phi) phi = random_vector(rng, static_cast<int>(phi.size()), scale);
  x.phi_global = random_vector(rng, static_cast<int>(x.phi_global.size()), scale);
  return x;
}

inline std::vector<double> flatten(const Parameters& x) {
  std::vector<double> out(x.theta);
  for (const auto& phi : x.phi) out.insert(out.end(), phi.begin(), phi.end());
  out.insert(out.end(), x.phi_global.begin(), x.phi_global.end());
  return out;
}

inline Parameters unflatten(const std::vector<double>& flat, Parameters shape) {
  std::size_t i = 0;
  for (double& v : shape.theta) v = flat[i++];
  for (auto& phi : shape.phi) {
    for (double& v : phi) v = flat[i++];
  }
  for (double& v : shape.phi_global) v = flat[i++];
  return shape;
}

// Demonstrations, feedback and transitions with uniformly random states and
// actions; successors are drawn from `model` so none has zero probability.
inline TeacherDataset random_dataset(const ParametricModel& family, const TransitionModel& model,
                                     Rng& rng, int pairs, int feedback, int transitions) {
  TeacherDataset data;
  data.num_tasks = family.num_tasks();
  const int S = family.num_states();
  const int A = family.num_actions();
  for (int i = 0; i < pairs; ++i) {
    Demonstration d;
    d.task = static_cast<int>(uniform_index(rng, family.num_tasks()));
    d.steps.push_back({static_cast<int>(uniform_index(rng, S)),
                       static_cast<int>(uniform_index(rng, A))});
    data.demonstrations.push_back(d);
  }
  for (int i = 0; i < feedback; ++i) {
    FeedbackEvent f;
    f.task = static_cast<int>(uniform_index(rng, family.num_tasks()));
    f.state = static_cast<int>(uniform_index(rng, S));
    f.action = static_cast<int>(uniform_index(rng, A));
    f.signal = static_cast<Signal>(uniform_index(rng, 3));
    f.timestamp = i;
    data.feedback.push_back(f);
  }
  for (int i = 0; i < transitions; ++i) {
    const int s = static_cast<int>(uniform_index(rng, S));
    const int a = static_cast<int>(uniform_index(rng, A));
    data.transitions.push_back({s, a, model.sample(s, a, rng)});
  }
  return data;
}

}  // namespace bam::testing

#endif  // BAM_TESTS_SUPPORT_HPP_
