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

#ifndef THUNDER_PROGRESS_HPP_
#define THUNDER_PROGRESS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "emucloud/clock.hpp"
#include "thunder/level.hpp"

namespace thunder {

struct Submission {
  bool correct = false;
  emucloud::Timestamp at = 0;
};

struct LevelProgress {
  std::size_t revealed = 0;
  bool solved = false;
  std::vector<Submission> submissions;
};

/// Per-project record of revealed hints and flag submissions. When a file
/// path is given the ledger is loaded from it and rewritten after each
/// change.
class ProgressLedger {
 public:
  explicit ProgressLedger(std::filesystem::path file = {});

  LevelProgress get(const std::string& project_id, const std::string& level) const;
  /// Increments the revealed counter by one. Throws kAlreadyAtEnd when all
  /// `deck_size` hints are already revealed. Returns the new count.
  std::size_t reveal(const std::string& project_id, const std::string& level, std::size_t deck_size);
  void record_submission(const std::string& project_id, const std::string& level, bool correct,
                         emucloud::Timestamp at);

  /// `{"<level>": {"revealed", "solved", "submissions": [...]}}` for one project.
  nlohmann::json project_json(const std::string& project_id) const;
  nlohmann::json to_json() const;

 private:
  nlohmann::json to_json_locked() const;
  void save_locked() const;

  mutable std::mutex mu_;
  std::filesystem::path file_;
  std::map<std::string, std::map<std::string, LevelProgress>> projects_;
};

/// Exact, constant-time comparison against generate_flag; the verdict is
/// recorded in `ledger`. Throws kUnknownLevel.
bool validate_flag(const LevelRegistry& registry, ProgressLedger& ledger, const std::string& level,
                   const std::string& project_id, const std::string& submitted, emucloud::Timestamp at);

}  // namespace thunder

#endif  // THUNDER_PROGRESS_HPP_
