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

#include "emucloud/iam.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "emucloud/error.hpp"

namespace emucloud {

bool valid_project_id(std::string_view id) {
  static const std::regex re("[a-z][a-z0-9-]{4,28}");
  return std::regex_match(id.begin(), id.end(), re);
}

bool valid_account_name(std::string_view name) {
  static const std::regex re("[a-z][a-z0-9-]{2,30}");
  return std::regex_match(name.begin(), name.end(), re);
}

std::string service_account_email(std::string_view name, std::string_view project_id) {
  return std::string(name) + "@" + std::string(project_id) + ".iam.emucloud";
}

RoleCatalog::RoleCatalog(std::vector<Role> roles) : roles_(std::move(roles)) {}

RoleCatalog RoleCatalog::load_yaml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadRequest, "cannot open role catalog " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_yaml(ss.str());
}

RoleCatalog RoleCatalog::parse_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kYamlParseError, std::string("role catalog: ") + e.what());
  }
  if (!root.IsSequence()) {
    throw Error(ErrorCode::kValidationError, "role catalog must be a list");
  }
  std::vector<Role> roles;
  for (const auto& entry : root) {
    Role role;
    if (!entry.IsMap() || !entry["role"].IsScalar()) {
      throw Error(ErrorCode::kValidationError, "each role needs a 'role' name");
    }
    role.role_name = entry["role"].as<std::string>();
    if (role.role_name.rfind("roles/", 0) != 0) {
      throw Error(ErrorCode::kValidationError, "bad role name '" + role.role_name + "'");
    }
    const auto perms = entry["permissions"];
    if (!perms.IsSequence()) {
      throw Error(ErrorCode::kValidationError, "permissions of " + role.role_name + " must be a list");
    }
    for (const auto& p : perms) {
      if (!p.IsScalar()) throw Error(ErrorCode::kValidationError, "bad permission in " + role.role_name);
      role.permissions.insert(p.as<std::string>());
    }
    const bool dup = std::any_of(roles.begin(), roles.end(),
                                 [&](const Role& r) { return r.role_name == role.role_name; });
    if (dup) throw Error(ErrorCode::kValidationError, "duplicate role " + role.role_name);
    roles.push_back(std::move(role));
  }
  return RoleCatalog(std::move(roles));
}

const Role* RoleCatalog::find(std::string_view role_name) const {
  for (const auto& r : roles_) {
    if (r.role_name == role_name) return &r;
  }
  return nullptr;
}

std::vector<std::string> RoleCatalog::all_permissions() const {
  std::set<std::string> all;
  for (const auto& r : roles_) all.insert(r.permissions.begin(), r.permissions.end());
  return {all.begin(), all.end()};
}

const Binding* IamPolicy::find(std::string_view role_name) const {
  for (const auto& b : bindings) {
    if (b.role_name == role_name) return &b;
  }
  return nullptr;
}

Binding& IamPolicy::upsert(std::string_view role_name) {
  for (auto& b : bindings) {
    if (b.role_name == role_name) return b;
  }
  bindings.push_back(Binding{std::string(role_name), {}});
  return bindings.back();
}

void IamPolicy::normalize() {
  std::vector<Binding> merged;
  for (auto& b : bindings) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Binding& m) { return m.role_name == b.role_name; });
    if (it == merged.end()) {
      merged.push_back(std::move(b));
    } else {
      it->members.insert(b.members.begin(), b.members.end());
    }
  }
  std::erase_if(merged, [](const Binding& b) { return b.members.empty(); });
  bindings = std::move(merged);
}

bool policy_grants(const IamPolicy& policy, const RoleCatalog& catalog,
                   std::string_view principal, std::string_view permission) {
  const std::string perm(permission);
  for (const auto& b : policy.bindings) {
    const bool member = b.members.contains(std::string(kAllUsers)) ||
                        (principal != kAnonymous && b.members.contains(std::string(principal)));
    if (!member) continue;
    const Role* role = catalog.find(b.role_name);
    if (role != nullptr && role->permissions.contains(perm)) return true;
  }
  return false;
}

}  // namespace emucloud
