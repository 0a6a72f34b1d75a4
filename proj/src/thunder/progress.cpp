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

#include "thunder/progress.hpp"

#include <fstream>

#include "emucloud/crypto.hpp"
#include "emucloud/error.hpp"

namespace thunder {

using emucloud::Error;
using emucloud::ErrorCode;
using nlohmann::json;

namespace {

json level_json(const LevelProgress& p) {
  json subs = json::array();
  for (const auto& s : p.submissions) subs.push_back({{"result", s.correct ? "correct" : "incorrect"}, {"at", s.at}});
  return {{"revealed", p.revealed}, {"solved", p.solved}, {"submissions", subs}};
}

}  // namespace

ProgressLedger::ProgressLedger(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::ifstream in(file_);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadRequest, "corrupt progress ledger " + file_.string() + ": " + e.what());
  }
  const json projects = doc.value("projects", json::object());
  for (const auto& [project, levels] : projects.items()) {
    for (const auto& [level, entry] : levels.items()) {
      LevelProgress p;
      p.revealed = entry.value("revealed", std::size_t{0});
      p.solved = entry.value("solved", false);
      const json submissions = entry.value("submissions", json::array());
      for (const auto& s : submissions) {
        p.submissions.push_back({s.value("result", "") == "correct", s.value("at", emucloud::Timestamp{0})});
      }
      projects_[project][level] = std::move(p);
    }
  }
}

LevelProgress ProgressLedger::get(const std::string& project_id, const std::string& level) const {
  std::lock_guard lock(mu_);
  auto pit = projects_.find(project_id);
  if (pit == projects_.end()) return {};
  auto lit = pit->second.find(level);
  return lit == pit->second.end() ? LevelProgress{} : lit->second;
}

std::size_t ProgressLedger::reveal(const std::string& project_id, const std::string& level, std::size_t deck_size) {
  std::lock_guard lock(mu_);
  auto& p = projects_[project_id][level];
  if (p.revealed >= deck_size) {
    throw Error(ErrorCode::kAlreadyAtEnd, "all " + std::to_string(deck_size) + " hints are already revealed");
  }
  ++p.revealed;
  save_locked();
  return p.revealed;
}

void ProgressLedger::record_submission(const std::string& project_id, const std::string& level, bool correct,
                                       emucloud::Timestamp at) {
  std::lock_guard lock(mu_);
  auto& p = projects_[project_id][level];
  p.submissions.push_back({correct, at});
  p.solved = p.solved || correct;
  save_locked();
}

json ProgressLedger::project_json(const std::string& project_id) const {
  std::lock_guard lock(mu_);
  json out = json::object();
  if (auto it = projects_.find(project_id); it != projects_.end()) {
    for (const auto& [level, p] : it->second) out[level] = level_json(p);
  }
  return out;
}

json ProgressLedger::to_json() const {
  std::lock_guard lock(mu_);
  return to_json_locked();
}

json ProgressLedger::to_json_locked() const {
  json projects = json::object();
  for (const auto& [project, levels] : projects_) {
    for (const auto& [level, p] : levels) projects[project][level] = level_json(p);
  }
  return {{"version", 1}, {"projects", projects}};
}

void ProgressLedger::save_locked() const {
  if (file_.empty()) return;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  const auto tmp = file_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json_locked().dump(2) << "\n";
  }
  std::filesystem::rename(tmp, file_);
}

bool validate_flag(const LevelRegistry& registry, ProgressLedger& ledger, const std::string& level,
                   const std::string& project_id, const std::string& submitted, emucloud::Timestamp at) {
  const LevelModule& module = registry.get(level);
  const bool correct = emucloud::constant_time_equal(submitted, generate_flag(module.level_seed, project_id));
  ledger.record_submission(project_id, level, correct, at);
  return correct;
}

}  // namespace thunder
