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

#include "emucloud/resources.hpp"

#include "emucloud/crypto.hpp"

namespace emucloud {

bool valid_object_name(const std::string& name) {
  if (name.empty()) return false;
  std::size_t start = 0;
  while (start <= name.size()) {
    auto end = name.find('/', start);
    if (end == std::string::npos) end = name.size();
    if (name.compare(start, end - start, "..") == 0 && end - start == 2) return false;
    start = end + 1;
  }
  return true;
}

std::string severity_name(Severity s) {
  switch (s) {
    case Severity::kDebug:
      return "DEBUG";
    case Severity::kInfo:
      return "INFO";
    case Severity::kError:
      return "ERROR";
  }
  return "INFO";
}

std::optional<Severity> severity_from_name(const std::string& name) {
  if (name == "DEBUG") return Severity::kDebug;
  if (name == "INFO") return Severity::kInfo;
  if (name == "ERROR") return Severity::kError;
  return std::nullopt;
}

std::string commit_digest_input(const std::optional<std::string>& parent_id,
                                const std::string& message,
                                const std::map<std::string, std::string>& files) {
  std::string in = "commit\nparent ";
  in += parent_id.value_or("");
  in += "\nmessage ";
  in += std::to_string(message.size());
  in += "\n";
  in += message;
  in += "\n";
  for (const auto& [path, bytes] : files) {
    in += path;
    in.push_back('\0');
    in += std::to_string(bytes.size());
    in.push_back('\0');
    in += bytes;
  }
  return in;
}

std::string compute_commit_id(const std::optional<std::string>& parent_id,
                              const std::string& message,
                              const std::map<std::string, std::string>& files) {
  return sha256_hex(commit_digest_input(parent_id, message, files));
}

}  // namespace emucloud
