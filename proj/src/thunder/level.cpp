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

#include "thunder/level.hpp"

#include <fstream>
#include <sstream>

#include "emucloud/crypto.hpp"
#include "emucloud/error.hpp"
#include "thunder/yaml_json.hpp"

namespace thunder {

using emucloud::Error;
using emucloud::ErrorCode;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidationError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string arg(const json& args, const char* key, std::size_t step, const std::string& helper) {
  if (!args.contains(key) || !args[key].is_string()) {
    throw Error(ErrorCode::kHelperError, "step " + std::to_string(step) + " (" + helper +
                                             "): missing string argument '" + key + "'");
  }
  return args[key].get<std::string>();
}

std::map<std::string, std::string> string_map(const json& j) {
  std::map<std::string, std::string> out;
  if (!j.is_object()) return out;
  for (const auto& [k, v] : j.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return out;
}

}  // namespace

std::string generate_flag(const std::string& level_seed, const std::string& project_id) {
  return "CTF{" + emucloud::sha256_hex(level_seed + ":" + project_id).substr(0, 16) + "}";
}

LevelModule LevelModule::load(const std::filesystem::path& dir) {
  const json meta = parse_yaml(read_file(dir / "level.yaml"));
  if (!meta.is_object()) throw Error(ErrorCode::kValidationError, "level.yaml must be a map in " + dir.string());
  LevelModule level;
  level.name = dir.filename().string();
  level.namespace_name = dir.parent_path().filename().string();
  if (meta.value("namespace", level.namespace_name) != level.namespace_name ||
      meta.value("name", level.name) != level.name) {
    throw Error(ErrorCode::kValidationError, "level.yaml namespace/name disagree with " + dir.string());
  }
  level.level_seed = meta.value("seed", "");
  if (level.level_seed.empty()) throw Error(ErrorCode::kValidationError, level.ref() + " has no seed");
  level.config_template = read_file(dir / "config.yaml");
  if (meta.contains("handout") && meta["handout"].is_object()) {
    level.handout_account = meta["handout"].value("service_account", "");
    level.intro = meta["handout"].value("intro", "");
  }
  if (meta.contains("generate") && meta["generate"].is_object()) {
    level.keypairs = meta["generate"].value("keypairs", std::vector<std::string>{});
    level.secrets = meta["generate"].value("secrets", std::vector<std::string>{});
  }
  if (meta.contains("setup_hook") && !meta["setup_hook"].is_null()) {
    if (!meta["setup_hook"].is_array()) throw Error(ErrorCode::kValidationError, "setup_hook must be a list");
    level.setup_hook = meta["setup_hook"];
  }
  level.hint_deck_path = dir / "hints.yaml";
  if (std::filesystem::exists(dir / "writeup.md")) level.writeup = read_file(dir / "writeup.md");
  return level;
}

void LevelRegistry::register_level(LevelModule level) {
  const std::string ref = level.ref();
  if (levels_.contains(ref)) throw Error(ErrorCode::kDuplicateLevel, "level '" + ref + "' is already registered");
  levels_.emplace(ref, std::move(level));
}

std::vector<std::string> LevelRegistry::list_levels(const std::optional<std::string>& ns) const {
  std::vector<std::string> out;
  for (const auto& [ref, level] : levels_) {
    if (!ns || level.namespace_name == *ns) out.push_back(ref);
  }
  return out;
}

const LevelModule* LevelRegistry::find(const std::string& ref) const {
  auto it = levels_.find(ref);
  return it == levels_.end() ? nullptr : &it->second;
}

const LevelModule& LevelRegistry::get(const std::string& ref) const {
  const auto* level = find(ref);
  if (level == nullptr) throw Error(ErrorCode::kUnknownLevel, "unknown level '" + ref + "'");
  return *level;
}

void LevelRegistry::load_directory(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw Error(ErrorCode::kValidationError, "level directory " + root.string() + " does not exist");
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& ns : std::filesystem::directory_iterator(root)) {
    if (!ns.is_directory()) continue;
    for (const auto& lvl : std::filesystem::directory_iterator(ns.path())) {
      if (lvl.is_directory() && std::filesystem::exists(lvl.path() / "level.yaml")) dirs.push_back(lvl.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) register_level(LevelModule::load(d));
}

std::string key_file_json(const emucloud::ServiceAccount& sa) {
  return json{{"type", "service_account"},
              {"project_id", sa.project_id},
              {"client_email", sa.email},
              {"private_key", sa.key_material}}
      .dump(2);
}

void run_setup_hook(emucloud::Emulator& emu, const json& steps, const std::map<std::string, std::string>& values,
                    const std::string& project_id, DeploymentRecord& record) {
  std::size_t index = 0;
  for (const auto& raw : steps) {
    ++index;
    if (!raw.is_object() || raw.size() != 1) {
      throw Error(ErrorCode::kHelperError, "step " + std::to_string(index) + ": expected '{helper: {args}}'");
    }
    const std::string helper = raw.begin().key();
    const json args = render_json_strings(raw.begin().value(), values);
    auto add_undo = [&](std::function<void()> undo) { record.inverse_actions.push_back({helper, std::move(undo)}); };
    try {
      if (helper == "upload_object") {
        const auto bucket = arg(args, "bucket", index, helper);
        const auto name = arg(args, "name", index, helper);
        auto prev = emu.put_object(bucket, name, arg(args, "content", index, helper),
                                   args.value("content_type", "text/plain"));
        add_undo([&emu, bucket, name, prev] {
          if (prev) {
            emu.put_object(bucket, name, prev->content, prev->content_type);
          } else {
            emu.delete_object(bucket, name);
          }
        });
      } else if (helper == "add_binding") {
        const auto role = arg(args, "role", index, helper);
        std::set<std::string> members;
        if (args.contains("member")) members.insert(arg(args, "member", index, helper));
        for (const auto& m : args.value("members", json::array())) members.insert(m.get<std::string>());
        auto added = emu.add_binding_members(project_id, role, members);
        add_undo([&emu, project_id, role, added] { emu.remove_binding_members(project_id, role, added); });
      } else if (helper == "seed_log_entries") {
        auto severity = emucloud::severity_from_name(args.value("severity", "INFO"));
        if (!severity) throw Error(ErrorCode::kHelperError, "bad severity");
        const auto logger = arg(args, "logger", index, helper);
        for (const auto& m : args.value("messages", json::array())) {
          emu.append_log(project_id, *severity, logger, m.get<std::string>());
        }
      } else if (helper == "seed_repo") {
        const auto repo = arg(args, "repo", index, helper);
        if (!emu.has_project(project_id)) throw Error(ErrorCode::kUnknownResource, "no project");
        const auto before = emu.repo_size(project_id, repo);
        for (const auto& c : args.value("commits", json::array())) {
          emu.push_commit(project_id, repo, c.value("message", ""), string_map(c.value("files", json::object())));
        }
        add_undo([&emu, project_id, repo, before] { emu.truncate_repo(project_id, repo, before); });
      } else if (helper == "push_image") {
        std::string path = arg(args, "path", index, helper);
        if (path.find('/') == std::string::npos) path = project_id + "/" + path;
        auto files = string_map(args.value("files", json::object()));
        try {
          auto prev = emu.set_image_files(path, files);
          add_undo([&emu, path, prev] { emu.set_image_files(path, prev); });
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kUnknownResource) throw;
          emu.create_image(project_id, path.substr(path.find('/') + 1), files);
          add_undo([&emu, path] { emu.delete_image(path); });
        }
      } else if (helper == "set_instance_metadata") {
        const auto instance = arg(args, "instance", index, helper);
        const auto key = arg(args, "key", index, helper);
        auto prev = emu.set_instance_metadata(project_id, instance, key, arg(args, "value", index, helper));
        add_undo([&emu, project_id, instance, key, prev] {
          emu.set_instance_metadata(project_id, instance, key, prev);
        });
      } else if (helper == "write_instance_file") {
        const auto instance = arg(args, "instance", index, helper);
        const auto path = arg(args, "path", index, helper);
        auto prev = emu.set_instance_file(project_id, instance, path, arg(args, "content", index, helper));
        add_undo([&emu, project_id, instance, path, prev] { emu.set_instance_file(project_id, instance, path, prev); });
      } else if (helper == "set_function_env") {
        const auto fn = arg(args, "function", index, helper);
        const auto key = arg(args, "key", index, helper);
        auto prev = emu.set_function_env(project_id, fn, key, arg(args, "value", index, helper));
        add_undo([&emu, project_id, fn, key, prev] { emu.set_function_env(project_id, fn, key, prev); });
      } else {
        throw Error(ErrorCode::kHelperError, "step " + std::to_string(index) + ": unknown helper '" + helper + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kHelperError) throw;
      const bool missing = e.code() == ErrorCode::kUnknownResource || e.code() == ErrorCode::kUnknownInstance ||
                           e.code() == ErrorCode::kUnknownProject;
      throw Error(missing ? ErrorCode::kUnknownResource : ErrorCode::kHelperError,
                  "step " + std::to_string(index) + " (" + helper + "): " + e.what());
    }
  }
}

StartInfo create_level(const LevelRegistry& registry, DeployManager& deployer, emucloud::Emulator& emu,
                       const std::string& ref, const std::string& project_id) {
  const LevelModule& level = registry.get(ref);
  if (!emu.has_project(project_id)) {
    throw Error(ErrorCode::kUnknownProject, "unknown project '" + project_id + "'");
  }
  TemplateContext ctx;
  ctx.project_id = project_id;
  ctx.nonce = fresh_nonce();
  ctx.level_name = ref;
  for (const auto& k : level.keypairs) {
    auto pair = emucloud::generate_ssh_key_pair();
    ctx.extra[k + "_private"] = pair.private_key;
    ctx.extra[k + "_public"] = pair.public_key;
  }
  for (const auto& s : level.secrets) ctx.extra[s] = emucloud::random_hex(8);

  const std::string rendered = render_placeholders(level.config_template, ctx.values());
  const auto config = DeploymentConfig::parse(rendered);

  auto hook_values = ctx.values();
  hook_values["flag"] = generate_flag(level.level_seed, project_id);
  deployer.deploy(config, ctx, ref, rendered, [&](DeploymentRecord& record) {
    run_setup_hook(emu, level.setup_hook, hook_values, project_id, record);
  });

  StartInfo info;
  info.level = ref;
  info.project_id = project_id;
  auto values = ctx.values();
  info.intro = render_placeholders(level.intro, values);
  const std::string handout = render_placeholders(level.handout_account, values);
  if (!handout.empty()) {
    auto sa = emu.find_service_account(handout);
    if (!sa) throw Error(ErrorCode::kUnknownResource, "handout account " + handout + " was not created");
    info.handout_key = key_file_json(*sa);
  }
  return info;
}

}  // namespace thunder
