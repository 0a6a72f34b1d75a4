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

#ifndef EMUCLOUD_IAM_HPP_
#define EMUCLOUD_IAM_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emucloud/clock.hpp"

namespace emucloud {

inline constexpr std::string_view kAnonymous = "anonymous";
inline constexpr std::string_view kAllUsers = "allUsers";
inline constexpr std::int64_t kTokenTtlMs = 3600 * 1000;

struct Project {
  std::string project_id;
  std::string display_name;
  Timestamp created_at = 0;
};

bool valid_project_id(std::string_view id);
bool valid_account_name(std::string_view name);

struct ServiceAccount {
  std::string email;
  std::string project_id;
  std::string key_material;
  std::string description;
};

/// `<name>@<project_id>.iam.emucloud`
std::string service_account_email(std::string_view name, std::string_view project_id);

enum class TokenKind { kAccess, kIdentity };

struct AccessToken {
  std::string token_id;
  std::string principal;
  std::string project_id;
  Timestamp expires_at = 0;
  TokenKind kind = TokenKind::kAccess;
  std::string audience;

  bool expired(Timestamp now) const { return now >= expires_at; }
};

struct Role {
  std::string role_name;
  std::set<std::string> permissions;
};

/// Closed set of roles loaded at startup. Bindings naming a role outside the
/// catalog are rejected when the policy is written.
class RoleCatalog {
 public:
  RoleCatalog() = default;
  explicit RoleCatalog(std::vector<Role> roles);

  static RoleCatalog load_yaml_file(const std::filesystem::path& path);
  static RoleCatalog parse_yaml(const std::string& text);

  const Role* find(std::string_view role_name) const;
  bool contains(std::string_view role_name) const { return find(role_name) != nullptr; }

  const std::vector<Role>& roles() const { return roles_; }
  /// Union of every role's permissions, sorted.
  std::vector<std::string> all_permissions() const;

 private:
  std::vector<Role> roles_;
};

struct Binding {
  std::string role_name;
  std::set<std::string> members;

  bool operator==(const Binding&) const = default;
};

struct IamPolicy {
  std::string project_id;
  std::vector<Binding> bindings;
  std::string etag;

  const Binding* find(std::string_view role_name) const;
  Binding& upsert(std::string_view role_name);
  /// Merges duplicate role entries and drops bindings with no members.
  void normalize();
};

/// The pure policy evaluation rule: does `principal` (or allUsers) hold a
/// binding in `policy` to a role that contains `permission`?
bool policy_grants(const IamPolicy& policy, const RoleCatalog& catalog,
                   std::string_view principal, std::string_view permission);

}  // namespace emucloud

#endif  // EMUCLOUD_IAM_HPP_
