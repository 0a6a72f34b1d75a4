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

#include <algorithm>

#include "emucloud/crypto.hpp"
#include "emucloud/emulator.hpp"
#include "emucloud/error.hpp"

namespace emucloud {

Emulator::Emulator(RoleCatalog catalog, std::shared_ptr<Clock> clock, EmulatorOptions options)
    : catalog_(std::move(catalog)), clock_(std::move(clock)), options_(std::move(options)) {
  if (!clock_) clock_ = std::make_shared<SystemClock>();
}

void Emulator::set_metadata_hardening(MetadataHardening mode) {
  std::lock_guard lock(mu_);
  options_.metadata_hardening = mode;
}

MetadataHardening Emulator::metadata_hardening() const {
  std::lock_guard lock(mu_);
  return options_.metadata_hardening;
}

void Emulator::set_internal_fetcher(InternalFetcher fetcher) {
  std::lock_guard lock(mu_);
  fetcher_ = std::move(fetcher);
}

void Emulator::set_gate_observer(GateObserver observer) {
  std::lock_guard lock(mu_);
  gate_observer_ = std::move(observer);
}

nlohmann::json Emulator::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_to_json(state_);
}

void Emulator::restore(const nlohmann::json& snapshot) {
  State loaded = snapshot_from_json(snapshot);
  std::lock_guard lock(mu_);
  loaded.etag_counter = std::max(loaded.etag_counter, state_.etag_counter);
  loaded.log_sequence = std::max(loaded.log_sequence, state_.log_sequence);
  state_ = std::move(loaded);
}

// -- projects, accounts, tokens ----------------------------------------------

ProjectState& Emulator::project_locked(const std::string& project_id) {
  auto it = state_.projects.find(project_id);
  if (it == state_.projects.end()) {
    throw Error(ErrorCode::kUnknownProject, "unknown project '" + project_id + "'");
  }
  return it->second;
}

const ProjectState& Emulator::project_locked(const std::string& project_id) const {
  auto it = state_.projects.find(project_id);
  if (it == state_.projects.end()) {
    throw Error(ErrorCode::kUnknownProject, "unknown project '" + project_id + "'");
  }
  return it->second;
}

std::string Emulator::next_etag_locked() { return "v" + std::to_string(++state_.etag_counter); }

Project Emulator::create_project(const std::string& project_id, const std::string& display_name) {
  if (!valid_project_id(project_id)) {
    throw Error(ErrorCode::kMalformedProjectId,
                "project id '" + project_id + "' must match [a-z][a-z0-9-]{4,28}");
  }
  std::lock_guard lock(mu_);
  if (state_.projects.contains(project_id)) {
    throw Error(ErrorCode::kDuplicateProject, "project '" + project_id + "' already exists");
  }
  ProjectState ps;
  ps.info = Project{project_id, display_name, clock_->now()};
  ps.policy.project_id = project_id;
  ps.policy.etag = next_etag_locked();
  auto info = ps.info;
  state_.projects.emplace(project_id, std::move(ps));
  return info;
}

bool Emulator::has_project(const std::string& project_id) const {
  std::lock_guard lock(mu_);
  return state_.projects.contains(project_id);
}

ServiceAccount Emulator::create_service_account(const std::string& project_id,
                                                const std::string& name,
                                                const std::string& description) {
  if (!valid_account_name(name)) {
    throw Error(ErrorCode::kValidationError,
                "service account name '" + name + "' must match [a-z][a-z0-9-]{2,30}");
  }
  std::lock_guard lock(mu_);
  auto& ps = project_locked(project_id);
  ServiceAccount sa{service_account_email(name, project_id), project_id, random_hex(32), description};
  if (ps.service_accounts.contains(sa.email)) {
    throw Error(ErrorCode::kAlreadyExists, "service account " + sa.email + " already exists");
  }
  ps.service_accounts[sa.email] = sa;
  return sa;
}

void Emulator::delete_service_account(const std::string& email) {
  std::lock_guard lock(mu_);
  for (auto& [id, ps] : state_.projects) {
    ps.service_accounts.erase(email);
    // Bindings in any project may name the account.
    bool changed = false;
    for (auto& b : ps.policy.bindings) changed |= b.members.erase(email) > 0;
    if (changed) {
      ps.policy.normalize();
      ps.policy.etag = next_etag_locked();
    }
  }
  std::erase_if(state_.tokens, [&](const auto& kv) { return kv.second.principal == email; });
}

std::optional<ServiceAccount> Emulator::find_service_account(const std::string& email) const {
  std::lock_guard lock(mu_);
  for (const auto& [id, ps] : state_.projects) {
    auto it = ps.service_accounts.find(email);
    if (it != ps.service_accounts.end()) return it->second;
  }
  return std::nullopt;
}

AccessToken Emulator::mint_locked(const std::string& principal, const std::string& project_id,
                                  TokenKind kind, const std::string& audience) {
  AccessToken tok;
  tok.token_id = (kind == TokenKind::kAccess ? "ya29.emu." : "eyJ.emu.") + random_hex(24);
  tok.principal = principal;
  tok.project_id = project_id;
  tok.expires_at = clock_->now() + kTokenTtlMs;
  tok.kind = kind;
  if (kind == TokenKind::kIdentity) tok.audience = audience;
  state_.tokens[tok.token_id] = tok;
  return tok;
}

AccessToken Emulator::mint_access_token(const std::string& email, const std::string& key_material) {
  std::lock_guard lock(mu_);
  const ServiceAccount* found = nullptr;
  for (const auto& [id, ps] : state_.projects) {
    auto it = ps.service_accounts.find(email);
    if (it != ps.service_accounts.end()) found = &it->second;
  }
  // Same answer for an unknown account and a wrong key.
  const bool ok = found != nullptr && constant_time_equal(found->key_material, key_material);
  if (!ok) throw Error(ErrorCode::kInvalidCredentials, "invalid service account credentials");
  return mint_locked(found->email, found->project_id, TokenKind::kAccess, "");
}

AccessToken Emulator::mint_identity_token(const std::string& access_token,
                                          const std::string& audience) {
  std::lock_guard lock(mu_);
  auto tok = resolve_locked(access_token);
  if (!tok || tok->kind != TokenKind::kAccess) {
    throw Error(ErrorCode::kInvalidToken, "an unexpired access token is required");
  }
  const bool url = audience.rfind("http://", 0) == 0 || audience.rfind("https://", 0) == 0;
  if (audience.empty() || !url) {
    throw Error(ErrorCode::kMissingAudience, "identity tokens need an audience URL");
  }
  return mint_locked(tok->principal, tok->project_id, TokenKind::kIdentity, audience);
}

std::optional<AccessToken> Emulator::resolve_locked(const std::string& token) const {
  if (token.empty()) return std::nullopt;
  auto it = state_.tokens.find(token);
  if (it == state_.tokens.end() || it->second.expired(clock_->now())) return std::nullopt;
  return it->second;
}

std::optional<AccessToken> Emulator::resolve_token(const std::string& token) const {
  std::lock_guard lock(mu_);
  return resolve_locked(token);
}

// -- IAM ---------------------------------------------------------------------

bool Emulator::check_locked(const std::string& token, const std::string& permission,
                            const std::string& project_id) const {
  bool allowed = false;
  auto pit = state_.projects.find(project_id);
  if (pit != state_.projects.end()) {
    std::string principal(kAnonymous);
    bool usable = true;
    if (!token.empty()) {
      auto it = state_.tokens.find(token);
      if (it != state_.tokens.end()) {
        // Expired and identity tokens authorize nothing, not even what
        // allUsers could do.
        usable = !it->second.expired(clock_->now()) && it->second.kind == TokenKind::kAccess;
        principal = it->second.principal;
      }
    }
    allowed = usable && policy_grants(pit->second.policy, catalog_, principal, permission);
  }
  if (gate_observer_) gate_observer_(permission, project_id, allowed);
  return allowed;
}

void Emulator::require_locked(const std::string& token, const std::string& permission,
                              const std::string& project_id) const {
  if (!check_locked(token, permission, project_id)) {
    throw Error(ErrorCode::kPermissionDenied,
                "caller does not have permission '" + permission + "'");
  }
}

std::string Emulator::gate_project_locked(const std::string& token, const std::string& owner) const {
  if (!owner.empty()) return owner;
  auto tok = resolve_locked(token);
  return tok ? tok->project_id : std::string();
}

bool Emulator::check_permission(const std::string& token, const std::string& permission,
                                const std::string& project_id) const {
  std::lock_guard lock(mu_);
  return check_locked(token, permission, project_id);
}

std::vector<std::string> Emulator::test_iam_permissions(const std::string& token,
                                                        const std::vector<std::string>& permissions,
                                                        const std::string& project_id) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> granted;
  for (const auto& p : permissions) {
    if (check_locked(token, p, project_id)) granted.push_back(p);
  }
  return granted;
}

IamPolicy Emulator::get_iam_policy(const std::string& token, const std::string& project_id) const {
  std::lock_guard lock(mu_);
  require_locked(token, "resourcemanager.projects.getIamPolicy", project_id);
  return project_locked(project_id).policy;
}

IamPolicy Emulator::set_iam_policy(const std::string& token, const std::string& project_id,
                                   IamPolicy policy) {
  std::lock_guard lock(mu_);
  require_locked(token, "resourcemanager.projects.setIamPolicy", project_id);
  auto& ps = project_locked(project_id);
  if (policy.etag != ps.policy.etag) {
    throw Error(ErrorCode::kStaleEtag, "policy was modified concurrently (etag " +
                                           ps.policy.etag + ", got '" + policy.etag + "')");
  }
  for (const auto& b : policy.bindings) {
    if (!catalog_.contains(b.role_name)) {
      throw Error(ErrorCode::kUnknownRole, "unknown role '" + b.role_name + "'");
    }
  }
  policy.project_id = project_id;
  policy.normalize();
  policy.etag = next_etag_locked();
  ps.policy = std::move(policy);
  return ps.policy;
}

std::set<std::string> Emulator::add_binding_members(const std::string& project_id,
                                                    const std::string& role,
                                                    const std::set<std::string>& members) {
  std::lock_guard lock(mu_);
  if (!catalog_.contains(role)) throw Error(ErrorCode::kUnknownRole, "unknown role '" + role + "'");
  auto& ps = project_locked(project_id);
  std::set<std::string> added;
  const Binding* existing = ps.policy.find(role);
  for (const auto& m : members) {
    if (existing == nullptr || !existing->members.contains(m)) added.insert(m);
  }
  if (!added.empty()) {
    ps.policy.upsert(role).members.insert(added.begin(), added.end());
    ps.policy.etag = next_etag_locked();
  }
  return added;
}

void Emulator::remove_binding_members(const std::string& project_id, const std::string& role,
                                      const std::set<std::string>& members) {
  std::lock_guard lock(mu_);
  auto pit = state_.projects.find(project_id);
  if (pit == state_.projects.end()) return;
  auto& policy = pit->second.policy;
  bool changed = false;
  for (auto& b : policy.bindings) {
    if (b.role_name != role) continue;
    for (const auto& m : members) changed |= b.members.erase(m) > 0;
  }
  if (changed) {
    policy.normalize();
    policy.etag = next_etag_locked();
  }
}

}  // namespace emucloud
