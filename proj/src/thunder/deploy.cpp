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

#include "thunder/deploy.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "emucloud/crypto.hpp"
#include "emucloud/error.hpp"
#include "thunder/yaml_json.hpp"

namespace thunder {

using emucloud::Error;
using emucloud::ErrorCode;
using nlohmann::json;

namespace {

bool ident_char(char c, bool first) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         (!first && std::isdigit(static_cast<unsigned char>(c)));
}

std::string prop_string(const ResourceDecl& d, const char* key, bool required = true,
                        const std::string& def = "") {
  const auto& p = d.properties;
  if (!p.contains(key) || p[key].is_null()) {
    if (required) {
      throw Error(ErrorCode::kValidationError,
                  "resource '" + d.name + "' (" + d.type + ") needs property '" + key + "'");
    }
    return def;
  }
  const auto& v = p[key];
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::map<std::string, std::string> prop_string_map(const ResourceDecl& d, const char* key) {
  std::map<std::string, std::string> out;
  const auto& p = d.properties;
  if (!p.contains(key) || p[key].is_null()) return out;
  if (!p[key].is_object()) {
    throw Error(ErrorCode::kValidationError, "property '" + std::string(key) + "' of '" + d.name + "' must be a map");
  }
  for (const auto& [k, v] : p[key].items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return out;
}

std::vector<std::string> prop_string_list(const ResourceDecl& d, const char* key) {
  std::vector<std::string> out;
  const auto& p = d.properties;
  if (!p.contains(key) || p[key].is_null()) return out;
  if (!p[key].is_array()) {
    throw Error(ErrorCode::kValidationError, "property '" + std::string(key) + "' of '" + d.name + "' must be a list");
  }
  for (const auto& v : p[key]) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  return out;
}

}  // namespace

std::map<std::string, std::string> TemplateContext::values() const {
  std::map<std::string, std::string> v = extra;
  v["project_id"] = project_id;
  v["nonce"] = nonce;
  v["level_name"] = level_name;
  return v;
}

std::string fresh_nonce() { return emucloud::random_hex(4); }

std::string render_placeholders(const std::string& text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      return out;
    }
    const auto close = text.find("}}", open + 2);
    if (close == std::string::npos) {
      throw Error(ErrorCode::kValidationError, "unterminated '{{' at offset " + std::to_string(open));
    }
    std::string inner = text.substr(open + 2, close - open - 2);
    const auto b = inner.find_first_not_of(" \t");
    const auto e = inner.find_last_not_of(" \t");
    const std::string key = b == std::string::npos ? "" : inner.substr(b, e - b + 1);
    bool valid = !key.empty();
    for (std::size_t i = 0; i < key.size() && valid; ++i) valid = ident_char(key[i], i == 0);
    if (!valid) throw Error(ErrorCode::kValidationError, "malformed placeholder '{{" + inner + "}}'");
    auto it = values.find(key);
    if (it == values.end()) throw Error(ErrorCode::kUnknownPlaceholder, key);
    out.append(text, pos, open - pos);
    out += it->second;
    pos = close + 2;
  }
}

json render_json_strings(const json& doc, const std::map<std::string, std::string>& values) {
  if (doc.is_string()) return render_placeholders(doc.get<std::string>(), values);
  if (doc.is_array()) {
    json out = json::array();
    for (const auto& v : doc) out.push_back(render_json_strings(v, values));
    return out;
  }
  if (doc.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : doc.items()) out[k] = render_json_strings(v, values);
    return out;
  }
  return doc;
}

DeploymentConfig DeploymentConfig::parse(const std::string& yaml_text) {
  const json doc = parse_yaml(yaml_text);
  if (!doc.is_object() || !doc.contains("resources") || !doc["resources"].is_array()) {
    throw Error(ErrorCode::kValidationError, "config must contain a 'resources' list");
  }
  DeploymentConfig cfg;
  std::set<std::string> names;
  for (const auto& r : doc["resources"]) {
    if (!r.is_object() || !r.contains("name") || !r.contains("type") || !r["name"].is_string() ||
        !r["type"].is_string()) {
      throw Error(ErrorCode::kValidationError, "each resource needs a string 'name' and 'type'");
    }
    ResourceDecl d;
    d.name = r["name"].get<std::string>();
    d.type = r["type"].get<std::string>();
    if (r.contains("properties") && !r["properties"].is_null()) {
      if (!r["properties"].is_object()) {
        throw Error(ErrorCode::kValidationError, "properties of '" + d.name + "' must be a map");
      }
      d.properties = r["properties"];
    }
    if (r.contains("depends_on") && !r["depends_on"].is_null()) {
      for (const auto& dep : r["depends_on"]) d.depends_on.push_back(dep.get<std::string>());
    }
    const auto& types = resource_types();
    if (std::find(types.begin(), types.end(), d.type) == types.end()) {
      throw Error(ErrorCode::kValidationError, "resource '" + d.name + "' has unknown type '" + d.type + "'");
    }
    if (!names.insert(d.name).second) {
      throw Error(ErrorCode::kValidationError, "duplicate resource name '" + d.name + "'");
    }
    cfg.resources.push_back(std::move(d));
  }
  for (const auto& d : cfg.resources) {
    for (const auto& dep : d.depends_on) {
      if (!names.contains(dep)) {
        throw Error(ErrorCode::kValidationError, "'" + d.name + "' depends on undeclared '" + dep + "'");
      }
    }
  }
  (void)cfg.creation_order();
  return cfg;
}

std::vector<std::size_t> DeploymentConfig::creation_order() const {
  const std::size_t n = resources.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[resources[i].name] = i;
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& dep : resources[i].depends_on) {
      ++pending[i];
      dependents[index.at(dep)].push_back(i);
    }
  }
  std::vector<std::size_t> order;
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    // Lowest declaration index among the ready set.
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && pending[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == n) throw Error(ErrorCode::kValidationError, "dependency cycle among resources");
    done[pick] = true;
    order.push_back(pick);
    for (auto d : dependents[pick]) --pending[d];
  }
  return order;
}

DeploymentConfig render_template(const std::string& config_text, const TemplateContext& ctx) {
  return DeploymentConfig::parse(render_placeholders(config_text, ctx.values()));
}

DeployManager::DeployManager(emucloud::Emulator& emulator) : emu_(emulator) {}

std::optional<DeploymentRecord> DeployManager::active() const {
  std::lock_guard lock(mu_);
  return active_;
}

CreatedResource DeployManager::create(const ResourceDecl& d, const TemplateContext& ctx) {
  const std::string& project = ctx.project_id;
  CreatedResource res{d.name, d.type, json::object()};
  if (d.type == "iam.serviceAccount") {
    auto sa = emu_.create_service_account(project, prop_string(d, "name"), prop_string(d, "description", false));
    res.handle = {{"email", sa.email}};
  } else if (d.type == "iam.binding") {
    auto members = prop_string_list(d, "members");
    if (members.empty()) throw Error(ErrorCode::kValidationError, "binding '" + d.name + "' has no members");
    const std::string role = prop_string(d, "role");
    auto added = emu_.add_binding_members(project, role, {members.begin(), members.end()});
    res.handle = {{"role", role}, {"added", added}};
  } else if (d.type == "storage.bucket") {
    emu_.create_bucket(project, prop_string(d, "name"));
    res.handle = {{"bucket", prop_string(d, "name")}};
  } else if (d.type == "storage.object") {
    const std::string bucket = prop_string(d, "bucket");
    const std::string name = prop_string(d, "name");
    auto prev = emu_.put_object(bucket, name, prop_string(d, "content", false),
                                prop_string(d, "content_type", false, "text/plain"));
    res.handle = {{"bucket", bucket}, {"name", name}};
    if (prev) res.handle["previous"] = prev->content;
  } else if (d.type == "compute.instance") {
    emucloud::Instance inst;
    inst.name = prop_string(d, "name");
    inst.project_id = project;
    inst.zone = prop_string(d, "zone", false, "us-west1-b");
    inst.metadata = prop_string_map(d, "metadata");
    inst.attached_service_account = prop_string(d, "service_account");
    inst.files = prop_string_map(d, "files");
    if (d.properties.contains("container_image")) {
      std::string image = prop_string(d, "container_image");
      if (image.find('/') == std::string::npos) image = project + "/" + image;
      inst.container_image = image;
      inst.serving_port = std::stoi(prop_string(d, "serving_port", false, "8080"));
    }
    emu_.create_instance(inst);
    res.handle = {{"instance", inst.name}};
  } else if (d.type == "functions.function") {
    emucloud::FunctionDef fn;
    fn.name = prop_string(d, "name");
    fn.project_id = project;
    fn.source = prop_string(d, "source");
    fn.env = prop_string_map(d, "env");
    fn.require_auth = d.properties.value("require_auth", false);
    fn.runtime_account = prop_string(d, "runtime_account");
    emu_.create_function(fn);
    res.handle = {{"function", fn.name}};
  } else if (d.type == "sourcerepo.repo") {
    emu_.create_repo(project, prop_string(d, "name"));
    res.handle = {{"repo", prop_string(d, "name")}};
  } else if (d.type == "registry.image") {
    auto path = emu_.create_image(project, prop_string(d, "name"), prop_string_map(d, "files"));
    res.handle = {{"image", path}};
  } else if (d.type == "logging.entries") {
    auto severity = emucloud::severity_from_name(prop_string(d, "severity", false, "INFO"));
    if (!severity) throw Error(ErrorCode::kValidationError, "bad severity in '" + d.name + "'");
    for (const auto& msg : prop_string_list(d, "messages")) {
      emu_.append_log(project, *severity, prop_string(d, "logger"), msg);
    }
  }
  return res;
}

void DeployManager::remove(const CreatedResource& res) {
  const std::string project = active_ ? active_->context.project_id : "";
  const auto& h = res.handle;
  if (res.type == "iam.serviceAccount") {
    emu_.delete_service_account(h.at("email").get<std::string>());
  } else if (res.type == "iam.binding") {
    emu_.remove_binding_members(project, h.at("role").get<std::string>(),
                                h.at("added").get<std::set<std::string>>());
  } else if (res.type == "storage.bucket") {
    emu_.delete_bucket(h.at("bucket").get<std::string>());
  } else if (res.type == "storage.object") {
    const auto bucket = h.at("bucket").get<std::string>();
    const auto name = h.at("name").get<std::string>();
    if (h.contains("previous") && emu_.has_bucket(bucket)) {
      emu_.put_object(bucket, name, h["previous"].get<std::string>(), "text/plain");
    } else {
      emu_.delete_object(bucket, name);
    }
  } else if (res.type == "compute.instance") {
    emu_.delete_instance(project, h.at("instance").get<std::string>());
  } else if (res.type == "functions.function") {
    emu_.delete_function(project, h.at("function").get<std::string>());
  } else if (res.type == "sourcerepo.repo") {
    emu_.delete_repo(project, h.at("repo").get<std::string>());
  } else if (res.type == "registry.image") {
    emu_.delete_image(h.at("image").get<std::string>());
  }
  // logging.entries: logs are append-only.
}

void DeployManager::tear_down(DeploymentRecord& record) {
  for (auto it = record.inverse_actions.rbegin(); it != record.inverse_actions.rend(); ++it) {
    try {
      it->undo();
    } catch (const Error&) {
      // The resource the helper touched was already removed by hand.
    }
  }
  record.inverse_actions.clear();
  for (auto it = record.created.rbegin(); it != record.created.rend(); ++it) {
    try {
      remove(*it);
    } catch (const Error&) {
      // Deleted out of band; destroy still completes.
    }
  }
  record.status = DeploymentRecord::Status::kDestroyed;
}

DeploymentRecord DeployManager::deploy(const DeploymentConfig& config, const TemplateContext& ctx,
                                              const std::string& level_name,
                                              const std::string& rendered_config, const PostDeploy& post) {
  std::lock_guard lock(mu_);
  if (active_) {
    throw Error(ErrorCode::kActiveDeploymentExists,
                "'" + active_->level_name + "' is still deployed; destroy it first");
  }
  active_ = DeploymentRecord{level_name, ctx, rendered_config, {}, {}, DeploymentRecord::Status::kActive};
  emu_.set_maintenance(true);
  try {
    for (auto idx : config.creation_order()) {
      const auto& decl = config.resources[idx];
      try {
        if (fault_injector_) fault_injector_(idx, decl);
        active_->created.push_back(create(decl, ctx));
      } catch (const Error& e) {
        throw Error(ErrorCode::kResourceCreateError,
                    "creating '" + decl.name + "' failed: " + std::string(code_name(e.code())) + ": " + e.what());
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kResourceCreateError, "creating '" + decl.name + "' failed: " + e.what());
      }
    }
    if (post) post(*active_);
  } catch (...) {
    tear_down(*active_);
    active_.reset();
    emu_.set_maintenance(false);
    throw;
  }
  emu_.set_maintenance(false);
  return *active_;
}

void DeployManager::destroy() {
  std::lock_guard lock(mu_);
  if (!active_) throw Error(ErrorCode::kNotActive, "no level is currently deployed");
  emu_.set_maintenance(true);
  tear_down(*active_);
  active_.reset();
  emu_.set_maintenance(false);
}

}  // namespace thunder
