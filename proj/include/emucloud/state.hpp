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

#ifndef EMUCLOUD_STATE_HPP_
#define EMUCLOUD_STATE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "emucloud/iam.hpp"
#include "emucloud/resources.hpp"

namespace emucloud {

struct ProjectState {
  Project info;
  IamPolicy policy;
  std::map<std::string, ServiceAccount> service_accounts;  // by email
  std::map<std::string, Instance> instances;
  std::map<std::string, FunctionDef> functions;
  std::map<std::string, SourceRepo> repos;
  std::map<std::string, ContainerImage> images;  // by registry path
  std::vector<LogEntry> logs;
};

/// Everything the emulator knows. Buckets live in a global namespace but each
/// names its owning project. Tokens are runtime-only and never serialized.
struct State {
  std::map<std::string, ProjectState> projects;
  std::map<std::string, Bucket> buckets;
  std::map<std::string, AccessToken> tokens;
  std::uint64_t etag_counter = 0;
  std::uint64_t log_sequence = 0;
};

inline constexpr int kSnapshotVersion = 1;

/// Versioned snapshot: `{"version":1,"projects":{...}}`.
nlohmann::json snapshot_to_json(const State& state);
State snapshot_from_json(const nlohmann::json& doc);

/// Copy of a snapshot with the parts that legitimately drift across a
/// create/destroy cycle removed: log entries and policy etags.
nlohmann::json strip_volatile(nlohmann::json snapshot);

}  // namespace emucloud

#endif  // EMUCLOUD_STATE_HPP_
