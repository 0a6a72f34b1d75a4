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

#ifndef THUNDER_DEPLOY_HPP_
#define THUNDER_DEPLOY_HPP_

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emucloud/emulator.hpp"

namespace thunder {

/// Parameters available to `{{ key }}` placeholders.
struct TemplateContext {
  std::string project_id;
  std::string nonce;  // 8 lowercase hex chars, fresh per create
  std::string level_name;
  std::map<std::string, std::string> extra;

  std::map<std::string, std::string> values() const;
};

std::string fresh_nonce();

/// Replaces every `{{ identifier }}` with its value. Substitution only; no
/// loops or conditionals. Throws Error(kUnknownPlaceholder) naming the first
/// unknown key.
std::string render_placeholders(const std::string& text,
                                const std::map<std::string, std::string>& values);

/// Renders every string scalar inside a JSON document.
nlohmann::json render_json_strings(const nlohmann::json& doc,
                                   const std::map<std::string, std::string>& values);

inline const std::vector<std::string>& resource_types() {
  static const std::vector<std::string> kTypes = {
      "iam.serviceAccount", "iam.binding",       "storage.bucket",  "storage.object",
      "compute.instance",   "functions.function", "sourcerepo.repo", "registry.image",
      "logging.entries"};
  return kTypes;
}

struct ResourceDecl {
  std::string name;
  std::string type;
  nlohmann::json properties = nlohmann::json::object();
  std::vector<std::string> depends_on;
};

struct DeploymentConfig {
  std::vector<ResourceDecl> resources;

  /// Parses YAML `resources: [...]` and validates names, types and the
  /// dependency graph. Throws kYamlParseError or kValidationError.
  static DeploymentConfig parse(const std::string& yaml_text);

  /// A topological order of declaration indices; ties keep declaration order.
  std::vector<std::size_t> creation_order() const;
};

/// render_placeholders followed by DeploymentConfig::parse.
DeploymentConfig render_template(const std::string& config_text, const TemplateContext& ctx);

struct CreatedResource {
  std::string name;
  std::string type;
  nlohmann::json handle;
};

/// Undo step recorded by a setup helper.
struct InverseAction {
  std::string helper;
  std::function<void()> undo;
};

struct DeploymentRecord {
  enum class Status { kActive, kDestroyed };

  std::string level_name;
  TemplateContext context;
  std::string rendered_config;
  std::vector<CreatedResource> created;
  std::vector<InverseAction> inverse_actions;
  Status status = Status::kActive;
};

/// Creates and destroys declared resources against an Emulator. Holds at
/// most one active deployment.
class DeployManager {
 public:
  using PostDeploy = std::function<void(DeploymentRecord&)>;
  /// Test hook invoked before each resource is created.
  using FaultInjector = std::function<void(std::size_t index, const ResourceDecl&)>;

  explicit DeployManager(emucloud::Emulator& emulator);

  /// Creates resources in dependency order, then runs `post` (setup hooks).
  /// Any failure undoes everything already done and rethrows; resource
  /// failures surface as kResourceCreateError naming the resource.
  DeploymentRecord deploy(const DeploymentConfig& config, const TemplateContext& ctx,
                                 const std::string& level_name, const std::string& rendered_config,
                                 const PostDeploy& post = {});

  /// Undoes setup hooks, then deletes resources in reverse creation order.
  void destroy();

  std::optional<DeploymentRecord> active() const;
  void set_fault_injector(FaultInjector injector) { fault_injector_ = std::move(injector); }

 private:
  CreatedResource create(const ResourceDecl& decl, const TemplateContext& ctx);
  void remove(const CreatedResource& res);
  void tear_down(DeploymentRecord& record);

  emucloud::Emulator& emu_;
  mutable std::mutex mu_;
  std::optional<DeploymentRecord> active_;
  FaultInjector fault_injector_;
};

}  // namespace thunder

#endif  // THUNDER_DEPLOY_HPP_
