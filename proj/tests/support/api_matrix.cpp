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

#include "api_matrix.hpp"

#include "emucloud/state.hpp"

namespace apimatrix {

using nlohmann::json;

std::string emu_admin_token(emucloud::Emulator& emu) {
  auto sa = emu.find_service_account(std::string("admin@") + kProject + ".iam.emucloud");
  return emu.mint_access_token(sa->email, sa->key_material).token_id;
}

std::vector<Endpoint> gated_endpoints() {
  const std::string p = kProject;
  auto none = [](emucloud::Emulator&) { return std::string(); };
  return {
      {"BucketsList", "GET", "/storage/v1/b?project=" + p, "storage.buckets.list", none},
      {"ObjectsList", "GET", "/storage/v1/b/api-bkt/o", "storage.objects.list", none},
      {"ObjectGet", "GET", "/storage/v1/b/api-bkt/o/doc.txt", "storage.objects.get", none},
      {"ObjectPut", "PUT", "/storage/v1/b/api-bkt/o/new.txt", "storage.objects.create",
       [](emucloud::Emulator&) { return std::string("payload"); }},
      {"InstancesList", "GET", "/compute/v1/projects/" + p + "/instances", "compute.instances.list", none},
      {"SetMetadata", "POST", "/compute/v1/projects/" + p + "/instances/api-vm/setMetadata",
       "compute.instances.setMetadata",
       [](emucloud::Emulator&) { return json{{"key", "k"}, {"value", "v"}}.dump(); }},
      {"FunctionsList", "GET", "/functions/v1/projects/" + p + "/functions", "cloudfunctions.functions.list",
       none},
      {"SourceGet", "GET", "/functions/v1/projects/" + p + "/functions/api-fn/source",
       "cloudfunctions.functions.sourceCodeGet", none},
      {"SourcePut", "PUT", "/functions/v1/projects/" + p + "/functions/api-fn/source",
       "cloudfunctions.functions.update",
       [](emucloud::Emulator&) { return json{{"source", "respond(\"v2\")"}}.dump(); }},
      {"LogsList", "GET", "/logging/v1/projects/" + p + "/entries", "logging.logEntries.list", none},
      {"ReposList", "GET", "/repos/v1/projects/" + p + "/repos", "sourcerepo.repos.list", none},
      {"RepoLog", "GET", "/repos/v1/projects/" + p + "/repos/api-repo/commits", "sourcerepo.repos.get", none},
      {"RepoShow", "GET", "/repos/v1/projects/" + p + "/repos/api-repo/commits/HEAD/files/app.py",
       "sourcerepo.repos.get", none},
      {"ImagesList", "GET", "/registry/v1/projects/" + p + "/images", "containerregistry.images.list", none},
      {"ImagePull", "GET", "/registry/v1/images/" + p + "/api-img:v1/archive", "containerregistry.images.pull",
       none},
      {"PolicyGet", "GET", "/iam/v1/projects/" + p + "/policy", "resourcemanager.projects.getIamPolicy", none},
      {"PolicySet", "PUT", "/iam/v1/projects/" + p + "/policy", "resourcemanager.projects.setIamPolicy",
       [](emucloud::Emulator& emu) {
         // Admin read of the current policy; echoing it back is a no-op write.
         auto policy = emucloud::policy_to_json(emu.get_iam_policy(emu_admin_token(emu), kProject));
         return policy.dump();
       }},
  };
}

ApiFixture::ApiFixture() : router(*box.emu) {
  auto& emu = *box.emu;
  emu.create_project(kProject, "API");
  admin = emu.create_service_account(kProject, "admin", "");
  runtime = emu.create_service_account(kProject, "runtime", "");
  for (const auto& role : emu.catalog().roles()) emu.add_binding_members(kProject, role.role_name, {admin.email});

  emu.create_bucket(kProject, "api-bkt");
  emu.put_object("api-bkt", "doc.txt", "document", "text/plain");
  emucloud::Instance vm;
  vm.name = "api-vm";
  vm.project_id = kProject;
  vm.zone = "us-east1-b";
  vm.attached_service_account = runtime.email;
  emu.create_instance(vm);
  emucloud::FunctionDef fn;
  fn.name = "api-fn";
  fn.project_id = kProject;
  fn.runtime_account = runtime.email;
  fn.source = "respond(\"v1\")";
  emu.create_function(fn);
  emu.append_log(kProject, emucloud::Severity::kInfo, "api", "hello");
  emu.create_repo(kProject, "api-repo");
  emu.push_commit(kProject, "api-repo", "init", {{"app.py", "print()"}});
  emu.create_image(kProject, "api-img:v1", {{"/app/server.dsl", "respond(\"x\")"}});

  emu.set_gate_observer([this](const std::string& perm, const std::string& project, bool allowed) {
    gates.push_back({perm, project, allowed});
  });
}

std::string ApiFixture::token_for(const emucloud::ServiceAccount& sa) {
  return box.emu->mint_access_token(sa.email, sa.key_material).token_id;
}

std::string ApiFixture::account_token(const std::string& name, const std::string& permission, bool with) {
  auto& emu = *box.emu;
  auto sa = emu.create_service_account(kProject, name, "");
  const emucloud::Role* narrowest = nullptr;
  for (const auto& role : emu.catalog().roles()) {
    const bool has = role.permissions.contains(permission);
    if (!with && !has) emu.add_binding_members(kProject, role.role_name, {sa.email});
    if (with && has && (!narrowest || role.permissions.size() < narrowest->permissions.size())) narrowest = &role;
  }
  if (with && narrowest) emu.add_binding_members(kProject, narrowest->role_name, {sa.email});
  return token_for(sa);
}

emucloud::ApiResponse ApiFixture::call(const Endpoint& ep, const std::string& token) {
  auto [path, query] = emucloud::split_target(ep.path);
  emucloud::ApiRequest req;
  req.method = ep.method;
  req.path = path;
  req.query = query;
  req.body = ep.body(*box.emu);
  if (!token.empty()) req.headers["Authorization"] = "Bearer " + token;
  gates.clear();
  return router.route(req);
}

std::string error_code(const emucloud::ApiResponse& r) {
  try {
    return nlohmann::json::parse(r.body).at("error").at("code").get<std::string>();
  } catch (const std::exception&) {
    return "<no error body>";
  }
}

}  // namespace apimatrix
