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

#ifndef EMUCLOUD_EMULATOR_HPP_
#define EMUCLOUD_EMULATOR_HPP_

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emucloud/clock.hpp"
#include "emucloud/handler_dsl.hpp"
#include "emucloud/iam.hpp"
#include "emucloud/resources.hpp"
#include "emucloud/state.hpp"

namespace emucloud {

enum class MetadataHardening {
  kDefault,      // Metadata-Flavor: Google is enough
  kStrictHeader, // also requires X-EmuCloud-Metadata-Request: true
};

inline constexpr const char* kMetadataFlavorHeader = "Metadata-Flavor";
inline constexpr const char* kMetadataRequestHeader = "X-EmuCloud-Metadata-Request";
inline constexpr const char* kMetadataTokenPath =
    "/computeMetadata/v1/instance/service-accounts/default/token";
inline constexpr const char* kInternalApiHost = "emucloud.internal";

struct EmulatorOptions {
  MetadataHardening metadata_hardening = MetadataHardening::kDefault;
  /// Public origin of the API, used to build function URLs.
  std::string api_base = "http://127.0.0.1:8085";
};

/// Which workload is asking: a VM instance or a function's runtime. Only
/// code running inside a workload can reach its metadata server.
struct RuntimeContext {
  std::string project_id;
  std::string runtime_account;
  std::string instance;  // empty for functions
  std::string function;  // empty for instances
};

struct InstanceSession {
  std::string project_id;
  std::string instance;
  std::string principal;
};

struct HttpResult {
  int status = 200;
  std::string body;
};

/// A request to the emulator's own API issued from inside a workload.
using InternalFetcher = std::function<HttpResult(const std::string& target, const HeaderMap& headers)>;
using GateObserver = std::function<void(const std::string& permission, const std::string& project_id,
                                        bool allowed)>;

/// Single owner of all emulated cloud state. Mutations are serialized behind
/// one mutex; handler scripts run outside it so they can call back in.
///
/// Methods taking a `token` are player-facing and gated through the IAM
/// evaluator; an empty token is the anonymous principal. Methods without a
/// token are administrative (used by the deployment engine and tests).
class Emulator {
 public:
  Emulator(RoleCatalog catalog, std::shared_ptr<Clock> clock, EmulatorOptions options = {});

  const RoleCatalog& catalog() const { return catalog_; }
  const EmulatorOptions& options() const { return options_; }
  /// Only safe before the emulator is shared between threads.
  void set_api_base(std::string base) { options_.api_base = std::move(base); }
  void set_metadata_hardening(MetadataHardening mode);
  MetadataHardening metadata_hardening() const;
  Timestamp now() const { return clock_->now(); }

  void set_internal_fetcher(InternalFetcher fetcher);
  void set_gate_observer(GateObserver observer);

  /// Set while a deployment is being applied; the API answers 409 meanwhile.
  void set_maintenance(bool on) { maintenance_ = on; }
  bool in_maintenance() const { return maintenance_; }

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snapshot);

  // -- projects, accounts, tokens ------------------------------------------

  Project create_project(const std::string& project_id, const std::string& display_name);
  bool has_project(const std::string& project_id) const;

  ServiceAccount create_service_account(const std::string& project_id, const std::string& name,
                                        const std::string& description);
  /// Removes the account, its bindings and its live tokens. No-op if absent.
  void delete_service_account(const std::string& email);
  std::optional<ServiceAccount> find_service_account(const std::string& email) const;

  AccessToken mint_access_token(const std::string& email, const std::string& key_material);
  AccessToken mint_identity_token(const std::string& access_token, const std::string& audience);
  /// Unexpired token record, if any.
  std::optional<AccessToken> resolve_token(const std::string& token) const;

  // -- IAM -----------------------------------------------------------------

  bool check_permission(const std::string& token, const std::string& permission,
                        const std::string& project_id) const;
  std::vector<std::string> test_iam_permissions(const std::string& token,
                                                const std::vector<std::string>& permissions,
                                                const std::string& project_id) const;
  IamPolicy get_iam_policy(const std::string& token, const std::string& project_id) const;
  IamPolicy set_iam_policy(const std::string& token, const std::string& project_id,
                           IamPolicy policy);

  /// Adds members to a role binding; returns the members that were not
  /// already present.
  std::set<std::string> add_binding_members(const std::string& project_id, const std::string& role,
                                            const std::set<std::string>& members);
  void remove_binding_members(const std::string& project_id, const std::string& role,
                              const std::set<std::string>& members);

  // -- storage -------------------------------------------------------------

  std::vector<std::string> buckets_list(const std::string& token, const std::string& project_id) const;
  std::vector<std::string> objects_list(const std::string& token, const std::string& bucket) const;
  std::string object_get(const std::string& token, const std::string& bucket,
                         const std::string& object) const;
  void object_put(const std::string& token, const std::string& bucket, const std::string& object,
                  std::string content, std::string content_type);

  void create_bucket(const std::string& project_id, const std::string& name);
  void delete_bucket(const std::string& name);
  /// Returns the previous content, if the object existed.
  std::optional<StoredObject> put_object(const std::string& bucket, const std::string& name,
                                         std::string content, std::string content_type);
  void delete_object(const std::string& bucket, const std::string& name);
  bool has_bucket(const std::string& name) const;

  // -- compute -------------------------------------------------------------

  std::vector<Instance> instances_list(const std::string& token, const std::string& project_id) const;
  void instance_set_metadata(const std::string& token, const std::string& project_id,
                             const std::string& instance, const std::string& key,
                             const std::string& value);

  void create_instance(Instance instance);
  void delete_instance(const std::string& project_id, const std::string& name);
  /// Sets (or with nullopt erases) a metadata key; returns the previous value.
  std::optional<std::string> set_instance_metadata(const std::string& project_id,
                                                   const std::string& instance,
                                                   const std::string& key,
                                                   std::optional<std::string> value);
  std::optional<std::string> set_instance_file(const std::string& project_id,
                                               const std::string& instance,
                                               const std::string& path,
                                               std::optional<std::string> content);

  InstanceSession ssh_connect(const std::string& project_id, const std::string& instance,
                              const std::string& private_key) const;
  AccessToken session_token(const InstanceSession& session);
  std::string session_read_file(const InstanceSession& session, const std::string& path) const;
  std::vector<std::string> session_list_files(const InstanceSession& session) const;
  RuntimeContext session_context(const InstanceSession& session) const;

  /// The per-workload metadata server. Not routed from the public API; only
  /// reachable from handler scripts and ssh sessions.
  std::string metadata_get(const RuntimeContext& caller, const std::string& path,
                           const HeaderMap& headers);

  /// Serves an HTTP request with the handler script of the instance's
  /// container image. Public, unauthenticated.
  HttpResult instance_http(const std::string& project_id, const std::string& instance,
                           const HandlerRequest& request);

  // -- functions -----------------------------------------------------------

  std::vector<FunctionDef> functions_list(const std::string& token, const std::string& project_id) const;
  std::string function_source_get(const std::string& token, const std::string& project_id,
                                  const std::string& name) const;
  void function_update(const std::string& token, const std::string& project_id,
                       const std::string& name, const std::string& source);
  /// `bearer` is the raw token from the Authorization header, if any.
  HttpResult function_invoke(const std::string& project_id, const std::string& name,
                             const HandlerRequest& request, const std::string& bearer);
  std::string function_url(const std::string& project_id, const std::string& name) const;

  void create_function(FunctionDef fn);
  void delete_function(const std::string& project_id, const std::string& name);
  std::optional<std::string> set_function_env(const std::string& project_id, const std::string& name,
                                              const std::string& key,
                                              std::optional<std::string> value);

  // -- logging -------------------------------------------------------------

  std::vector<LogEntry> logs_list(const std::string& token, const std::string& project_id,
                                  const std::optional<std::string>& logger) const;
  void append_log(const std::string& project_id, Severity severity, const std::string& logger,
                  const std::string& message);

  // -- source repositories -------------------------------------------------

  std::vector<std::string> repos_list(const std::string& token, const std::string& project_id) const;
  /// Newest first.
  std::vector<Commit> repo_log(const std::string& token, const std::string& project_id,
                               const std::string& repo) const;
  std::string repo_show(const std::string& token, const std::string& project_id,
                        const std::string& repo, const std::string& commit_id,
                        const std::string& path) const;

  void create_repo(const std::string& project_id, const std::string& name);
  void delete_repo(const std::string& project_id, const std::string& name);
  Commit push_commit(const std::string& project_id, const std::string& repo,
                     const std::string& message, std::map<std::string, std::string> files);
  std::size_t repo_size(const std::string& project_id, const std::string& repo) const;
  /// Drops commits beyond the first `n`.
  void truncate_repo(const std::string& project_id, const std::string& repo, std::size_t n);

  // -- container registry --------------------------------------------------

  std::vector<std::string> images_list(const std::string& token, const std::string& project_id) const;
  std::string image_pull(const std::string& token, const std::string& registry_path) const;

  /// `name_tag` is `<name>:<tag>`; returns the registry path.
  std::string create_image(const std::string& project_id, const std::string& name_tag,
                           std::map<std::string, std::string> files);
  void delete_image(const std::string& registry_path);
  /// Replaces the image's files; returns the previous set.
  std::map<std::string, std::string> set_image_files(const std::string& registry_path,
                                                     std::map<std::string, std::string> files);

 private:
  class WorkloadHost;

  ProjectState& project_locked(const std::string& project_id);
  const ProjectState& project_locked(const std::string& project_id) const;
  std::optional<AccessToken> resolve_locked(const std::string& token) const;
  bool check_locked(const std::string& token, const std::string& permission,
                    const std::string& project_id) const;
  void require_locked(const std::string& token, const std::string& permission,
                      const std::string& project_id) const;
  /// Project whose policy gates access to a resource that may not exist.
  std::string gate_project_locked(const std::string& token, const std::string& owner) const;
  AccessToken mint_locked(const std::string& principal, const std::string& project_id,
                          TokenKind kind, const std::string& audience);
  std::string next_etag_locked();
  void append_log_locked(const std::string& project_id, Severity severity,
                         const std::string& logger, const std::string& message);
  HttpResult run_handler(const std::string& source, const HandlerRequest& request,
                         const std::map<std::string, std::string>& env, const RuntimeContext& ctx,
                         const std::string& logger);

  RoleCatalog catalog_;
  std::shared_ptr<Clock> clock_;
  EmulatorOptions options_;
  std::atomic<bool> maintenance_{false};

  mutable std::mutex mu_;
  State state_;
  InternalFetcher fetcher_;
  GateObserver gate_observer_;
};

}  // namespace emucloud

#endif  // EMUCLOUD_EMULATOR_HPP_
