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

#ifndef THUNDER_LEVEL_HPP_
#define THUNDER_LEVEL_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emucloud/emulator.hpp"
#include "thunder/deploy.hpp"

namespace thunder {

/// `CTF{` + first 16 hex chars of SHA-256(level_seed ":" project_id) + `}`.
std::string generate_flag(const std::string& level_seed, const std::string& project_id);

/// One unit of CTF content, normally loaded from
/// `levels/<namespace>/<name>/{level.yaml,config.yaml,hints.yaml,writeup.md}`.
struct LevelModule {
  std::string namespace_name;
  std::string name;
  std::string level_seed;
  std::string config_template;
  /// Declarative helper steps; strings are templates rendered at create time.
  nlohmann::json setup_hook = nlohmann::json::array();
  /// Template for the email of the account whose key is handed out; empty
  /// means the player starts anonymous.
  std::string handout_account;
  std::string intro;
  std::vector<std::string> keypairs;  // names of ssh key pairs to generate
  std::vector<std::string> secrets;   // names of random secrets to generate
  std::filesystem::path hint_deck_path;
  std::string writeup;

  std::string ref() const { return namespace_name + "/" + name; }

  static LevelModule load(const std::filesystem::path& dir);
};

class LevelRegistry {
 public:
  /// Throws Error(kDuplicateLevel).
  void register_level(LevelModule level);
  /// `namespace/name` refs, sorted; filtered when `ns` is given.
  std::vector<std::string> list_levels(const std::optional<std::string>& ns = std::nullopt) const;
  const LevelModule* find(const std::string& ref) const;
  const LevelModule& get(const std::string& ref) const;  // throws kUnknownLevel

  /// Registers every `<root>/<namespace>/<name>/level.yaml`.
  void load_directory(const std::filesystem::path& root);

 private:
  std::map<std::string, LevelModule> levels_;
};

struct StartInfo {
  std::string level;
  std::string project_id;
  std::string handout_key;  // service-account key file JSON, or empty
  std::string intro;
};

/// Runs a level's declarative setup steps, recording an undo step for each.
/// `values` holds the template context plus `flag` and generated secrets.
void run_setup_hook(emucloud::Emulator& emu, const nlohmann::json& steps,
                    const std::map<std::string, std::string>& values, const std::string& project_id,
                    DeploymentRecord& record);

/// Renders, deploys and configures a registered level in `project_id`.
StartInfo create_level(const LevelRegistry& registry, DeployManager& deployer, emucloud::Emulator& emu,
                       const std::string& ref, const std::string& project_id);

/// Handout key file content for a service account.
std::string key_file_json(const emucloud::ServiceAccount& sa);

}  // namespace thunder

#endif  // THUNDER_LEVEL_HPP_
