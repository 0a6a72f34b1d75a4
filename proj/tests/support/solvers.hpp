// Copyright 2026 The Thunder CTF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef THUNDER_TESTS_SUPPORT_SOLVERS_HPP_
#define THUNDER_TESTS_SUPPORT_SOLVERS_HPP_

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "test_env.hpp"

namespace solvers {

// Raised when a walkthrough step does not behave as the level promises.
struct StepFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A walkthrough that starts right after `thunder create` and returns the
// flag it found. Solvers talk to the server only through CLI verbs.
using Solver = std::function<std::string(const testenv::CliDriver& cli, const std::string& create_output)>;

struct Entry {
  std::string level;
  Solver solve;
};

const std::vector<Entry>& all();
const Solver& for_level(const std::string& level);

// `thunder --project <project> create <level>`, then the level's solver.
std::string play(const testenv::CliDriver& cli, const std::string& level, const std::string& project);

}  // namespace solvers

#endif  // THUNDER_TESTS_SUPPORT_SOLVERS_HPP_
