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

#include "emucloud/state.hpp"

#include <algorithm>

#include "emucloud/crypto.hpp"
#include "emucloud/error.hpp"

namespace emucloud {
namespace {

using nlohmann::json;

bool is_utf8(const std::string& s) {
  try {
    (void)json(s).dump();
    return true;
  } catch (const json::type_error&) {
    return false;
  }
}

// Text stays readable in the snapshot; anything else is wrapped in base64.
json encode_bytes(const std::string& bytes) {
  if (is_utf8(bytes)) return bytes;
  return json{{"base64", base64_encode(bytes)}};
}

std::string decode_bytes(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  return base64_decode(j.at("base64").get<std::string>());
}

json encode_files(const std::map<std::string, std::string>& files) {
  json out = json::object();
  for (const auto& [path, bytes] : files) out[path] = encode_bytes(bytes);
  return out;
}

std::map<std::string, std::string> decode_files(const json& j) {
  std::map<std::string, std::string> files;
  for (const auto& [path, bytes] : j.items()) files[path] = decode_bytes(bytes);
  return files;
}

std::uint64_t etag_number(const std::string& etag) {
  if (etag.size() < 2 || etag[0] != 'v') return 0;
  try {
    return std::stoull(etag.substr(1));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

json snapshot_to_json(const State& state) {
  json projects = json::object();
  for (const auto& [id, ps] : state.projects) {
    json p;
    p["display_name"] = ps.info.display_name;
    p["created_at"] = ps.info.created_at;

    json bindings = json::array();
    for (const auto& b : ps.policy.bindings) {
      bindings.push_back({{"role", b.role_name}, {"members", b.members}});
    }
    p["policy"] = {{"etag", ps.policy.etag}, {"bindings", bindings}};

    json accounts = json::object();
    for (const auto& [email, sa] : ps.service_accounts) {
      accounts[email] = {{"key_material", sa.key_material}, {"description", sa.description}};
    }
    p["service_accounts"] = accounts;

    json buckets = json::object();
    for (const auto& [name, b] : state.buckets) {
      if (b.project_id != id) continue;
      json objects = json::object();
      for (const auto& [oname, o] : b.objects) {
        objects[oname] = {{"content", encode_bytes(o.content)},
                          {"content_type", o.content_type},
                          {"updated_at", o.updated_at}};
      }
      buckets[name] = {{"objects", objects}};
    }
    p["buckets"] = buckets;

    json instances = json::object();
    for (const auto& [name, inst] : ps.instances) {
      json i = {{"zone", inst.zone},
                {"metadata", inst.metadata},
                {"service_account", inst.attached_service_account},
                {"files", encode_files(inst.files)}};
      if (inst.container_image) i["container_image"] = *inst.container_image;
      if (inst.serving_port) i["serving_port"] = *inst.serving_port;
      instances[name] = i;
    }
    p["instances"] = instances;

    json functions = json::object();
    for (const auto& [name, f] : ps.functions) {
      functions[name] = {{"url", f.url},
                         {"env", f.env},
                         {"source", f.source},
                         {"require_auth", f.require_auth},
                         {"runtime_account", f.runtime_account}};
    }
    p["functions"] = functions;

    json repos = json::object();
    for (const auto& [name, r] : ps.repos) {
      json commits = json::array();
      for (const auto& c : r.commits) {
        json jc = {{"commit_id", c.commit_id}, {"message", c.message},
                   {"files", encode_files(c.files)}};
        jc["parent_id"] = c.parent_id ? json(*c.parent_id) : json(nullptr);
        commits.push_back(jc);
      }
      repos[name] = {{"commits", commits}};
    }
    p["repos"] = repos;

    json images = json::object();
    for (const auto& [path, img] : ps.images) images[path] = {{"files", encode_files(img.files)}};
    p["images"] = images;

    json logs = json::array();
    for (const auto& e : ps.logs) {
      logs.push_back({{"timestamp", e.timestamp},
                      {"sequence", e.sequence},
                      {"severity", severity_name(e.severity)},
                      {"logger", e.logger},
                      {"message", encode_bytes(e.message)}});
    }
    p["logs"] = logs;
    projects[id] = p;
  }
  return json{{"version", kSnapshotVersion}, {"projects", projects}};
}

State snapshot_from_json(const json& doc) {
  if (doc.value("version", 0) != kSnapshotVersion) {
    throw Error(ErrorCode::kValidationError, "unsupported snapshot version");
  }
  State state;
  try {
    for (const auto& [id, p] : doc.at("projects").items()) {
      ProjectState ps;
      ps.info = Project{id, p.value("display_name", ""), p.value("created_at", Timestamp{0})};
      ps.policy.project_id = id;
      ps.policy.etag = p.at("policy").value("etag", "");
      state.etag_counter = std::max(state.etag_counter, etag_number(ps.policy.etag));
      for (const auto& b : p.at("policy").at("bindings")) {
        ps.policy.bindings.push_back(
            Binding{b.at("role").get<std::string>(), b.at("members").get<std::set<std::string>>()});
      }
      for (const auto& [email, sa] : p.at("service_accounts").items()) {
        ps.service_accounts[email] =
            ServiceAccount{email, id, sa.at("key_material").get<std::string>(),
                           sa.value("description", "")};
      }
      for (const auto& [name, b] : p.at("buckets").items()) {
        Bucket bucket{name, id, {}};
        for (const auto& [oname, o] : b.at("objects").items()) {
          bucket.objects[oname] = StoredObject{decode_bytes(o.at("content")),
                                               o.value("content_type", "application/octet-stream"),
                                               o.value("updated_at", Timestamp{0})};
        }
        state.buckets[name] = std::move(bucket);
      }
      for (const auto& [name, i] : p.at("instances").items()) {
        Instance inst;
        inst.name = name;
        inst.project_id = id;
        inst.zone = i.value("zone", "");
        inst.metadata = i.value("metadata", std::map<std::string, std::string>{});
        inst.attached_service_account = i.value("service_account", "");
        if (i.contains("container_image")) inst.container_image = i["container_image"].get<std::string>();
        if (i.contains("serving_port")) inst.serving_port = i["serving_port"].get<int>();
        if (i.contains("files")) inst.files = decode_files(i["files"]);
        ps.instances[name] = std::move(inst);
      }
      for (const auto& [name, f] : p.at("functions").items()) {
        FunctionDef fn;
        fn.name = name;
        fn.project_id = id;
        fn.url = f.value("url", "");
        fn.env = f.value("env", std::map<std::string, std::string>{});
        fn.source = f.value("source", "");
        fn.require_auth = f.value("require_auth", false);
        fn.runtime_account = f.value("runtime_account", "");
        ps.functions[name] = std::move(fn);
      }
      for (const auto& [name, r] : p.at("repos").items()) {
        SourceRepo repo{name, id, {}};
        for (const auto& c : r.at("commits")) {
          Commit commit;
          commit.repo_name = name;
          commit.commit_id = c.at("commit_id").get<std::string>();
          if (!c.at("parent_id").is_null()) commit.parent_id = c["parent_id"].get<std::string>();
          commit.message = c.at("message").get<std::string>();
          commit.files = decode_files(c.at("files"));
          repo.commits.push_back(std::move(commit));
        }
        ps.repos[name] = std::move(repo);
      }
      for (const auto& [path, img] : p.at("images").items()) {
        ps.images[path] = ContainerImage{path, decode_files(img.at("files"))};
      }
      for (const auto& e : p.at("logs")) {
        LogEntry entry;
        entry.project_id = id;
        entry.timestamp = e.at("timestamp").get<Timestamp>();
        entry.sequence = e.at("sequence").get<std::uint64_t>();
        entry.severity = severity_from_name(e.at("severity").get<std::string>()).value_or(Severity::kInfo);
        entry.logger = e.at("logger").get<std::string>();
        entry.message = decode_bytes(e.at("message"));
        state.log_sequence = std::max(state.log_sequence, entry.sequence);
        ps.logs.push_back(std::move(entry));
      }
      state.projects[id] = std::move(ps);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidationError, std::string("malformed snapshot: ") + e.what());
  }
  return state;
}

json strip_volatile(json snapshot) {
  for (auto& [id, p] : snapshot["projects"].items()) {
    p.erase("logs");
    p["policy"].erase("etag");
  }
  return snapshot;
}

}  // namespace emucloud
