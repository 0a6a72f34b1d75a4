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

#ifndef EMUCLOUD_RESOURCES_HPP_
#define EMUCLOUD_RESOURCES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emucloud/clock.hpp"

namespace emucloud {

struct StoredObject {
  std::string content;
  std::string content_type = "application/octet-stream";
  Timestamp updated_at = 0;
};

struct Bucket {
  std::string name;
  std::string project_id;
  std::map<std::string, StoredObject> objects;
};

/// Object names are non-empty and contain no `..` path segment.
bool valid_object_name(const std::string& name);

struct Instance {
  std::string name;
  std::string project_id;
  std::string zone;
  std::map<std::string, std::string> metadata;
  std::string attached_service_account;
  std::optional<std::string> container_image;
  std::optional<int> serving_port;
  /// Files readable once logged in over ssh.
  std::map<std::string, std::string> files;
};

struct FunctionDef {
  std::string name;
  std::string project_id;
  std::string url;
  std::map<std::string, std::string> env;
  std::string source;
  bool require_auth = false;
  std::string runtime_account;
};

enum class Severity { kDebug, kInfo, kError };

std::string severity_name(Severity s);
std::optional<Severity> severity_from_name(const std::string& name);

struct LogEntry {
  std::string project_id;
  Timestamp timestamp = 0;
  std::uint64_t sequence = 0;
  Severity severity = Severity::kInfo;
  std::string logger;
  std::string message;
};

struct Commit {
  std::string repo_name;
  std::string commit_id;
  std::optional<std::string> parent_id;
  std::string message;
  std::map<std::string, std::string> files;
};

/// Content address of a commit. The digest input is
///   "commit\n" "parent " <parent or empty> "\n" "message " <len> "\n" <message> "\n"
/// followed, for every path in byte order, by <path> NUL <len> NUL <bytes>.
std::string commit_digest_input(const std::optional<std::string>& parent_id,
                                const std::string& message,
                                const std::map<std::string, std::string>& files);
std::string compute_commit_id(const std::optional<std::string>& parent_id,
                              const std::string& message,
                              const std::map<std::string, std::string>& files);

struct SourceRepo {
  std::string name;
  std::string project_id;
  /// Oldest first; each commit's parent is the previous element.
  std::vector<Commit> commits;
};

struct ContainerImage {
  std::string registry_path;  // <project_id>/<name>:<tag>
  std::map<std::string, std::string> files;
};

inline constexpr const char* kImageHandlerPath = "/app/server.dsl";

}  // namespace emucloud

#endif  // EMUCLOUD_RESOURCES_HPP_
