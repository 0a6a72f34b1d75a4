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
#include <chrono>
#include <functional>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "api_matrix.hpp"
#include "emucloud/api.hpp"
#include "emucloud/archive.hpp"
#include "emucloud/crypto.hpp"
#include "emucloud/state.hpp"
#include "test_env.hpp"

namespace {

using nlohmann::json;

using apimatrix::ApiFixture;
using apimatrix::Endpoint;
using apimatrix::error_code;
using apimatrix::gated_endpoints;
using apimatrix::kProject;

class AuthorizationMatrix : public ::testing::TestWithParam<Endpoint> {};

TEST_P(AuthorizationMatrix, AnonymousGets401) {
  ApiFixture f;
  auto r = f.call(GetParam(), "");
  EXPECT_EQ(r.status, 401) << r.body;
  EXPECT_EQ(error_code(r), "unauthenticated");
}

TEST_P(AuthorizationMatrix, UnauthorizedGets403) {
  ApiFixture f;
  const auto& ep = GetParam();
  auto token = f.account_token("denied", ep.permission, false);
  auto r = f.call(ep, token);
  EXPECT_EQ(r.status, 403) << r.body;
  EXPECT_EQ(error_code(r), "permission_denied");
  ASSERT_FALSE(f.gates.empty());
  EXPECT_EQ(f.gates.back().permission, ep.permission);
  EXPECT_FALSE(f.gates.back().allowed);
}

TEST_P(AuthorizationMatrix, AuthorizedGets200) {
  ApiFixture f;
  const auto& ep = GetParam();
  auto token = f.account_token("granted", ep.permission, true);
  auto r = f.call(ep, token);
  EXPECT_EQ(r.status, 200) << r.body;
  bool seen = false;
  for (const auto& g : f.gates) {
    if (g.permission == ep.permission && g.project == kProject && g.allowed) seen = true;
  }
  EXPECT_TRUE(seen) << "gate " << ep.permission << " was not consulted";
}

INSTANTIATE_TEST_SUITE_P(Gated, AuthorizationMatrix, ::testing::ValuesIn(gated_endpoints()),
                         [](const ::testing::TestParamInfo<Endpoint>& info) { return std::string(info.param.name); });

TEST(ApiTest, EveryCatalogPermissionHasAnEndpoint) {
  std::set<std::string> covered;
  for (const auto& ep : gated_endpoints()) covered.insert(ep.permission);
  auto catalog = testenv::shipped_catalog();
  for (const auto& role : catalog.roles()) {
    for (const auto& perm : role.permissions) EXPECT_TRUE(covered.contains(perm)) << perm;
  }
}

TEST(ApiTest, ResponseBodies) {
  ApiFixture f;
  auto token = f.token_for(f.admin);
  auto eps = gated_endpoints();
  auto find = [&](const std::string& name) {
    return *std::find_if(eps.begin(), eps.end(), [&](const Endpoint& e) { return name == e.name; });
  };
  EXPECT_EQ(json::parse(f.call(find("BucketsList"), token).body).at("items"), json::array({"api-bkt"}));
  auto obj = f.call(find("ObjectGet"), token);
  EXPECT_EQ(obj.body, "document");
  EXPECT_EQ(obj.content_type, "application/octet-stream");
  auto logs = json::parse(f.call(find("LogsList"), token).body).at("entries");
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_EQ(logs[0].at("message"), "hello");
  EXPECT_EQ(logs[0].at("severity"), "INFO");
  EXPECT_EQ(f.call(find("RepoShow"), token).body, "print()");
  EXPECT_EQ(emucloud::unpack_archive(f.call(find("ImagePull"), token).body).size(), 1u);
  auto source = json::parse(f.call(find("SourceGet"), token).body);
  EXPECT_EQ(source.at("source"), "respond(\"v1\")");
}

TEST(ApiTest, AuthorizationHeaderErrors) {
  ApiFixture f;
  emucloud::ApiRequest req;
  req.path = "/storage/v1/b";
  req.query["project"] = kProject;
  for (const std::string header : {"Basic abc", "Bearer ", "bearer x", "Bearer not-a-token"}) {
    req.headers["Authorization"] = header;
    auto r = f.router.route(req);
    EXPECT_EQ(r.status, 401) << header;
    EXPECT_EQ(error_code(r), "invalid_token") << header;
  }

  auto token = f.token_for(f.admin);
  req.headers["Authorization"] = "Bearer " + token;
  EXPECT_EQ(f.router.route(req).status, 200);
  f.box.clock->advance(std::chrono::milliseconds(emucloud::kTokenTtlMs));
  auto expired = f.router.route(req);
  EXPECT_EQ(expired.status, 401);
  EXPECT_EQ(error_code(expired), "invalid_token");
}

TEST(ApiTest, UnknownRoutes) {
  ApiFixture f;
  for (const auto& [method, path] : std::vector<std::pair<std::string, std::string>>{
           {"GET", "/"}, {"GET", "/nothing/here"}, {"DELETE", "/storage/v1/b/api-bkt/o/doc.txt"},
           {"GET", "/iam/v1/projects/x/unknown"}, {"POST", "/compute/v1/projects/x/instances"}}) {
    emucloud::ApiRequest req;
    req.method = method;
    req.path = path;
    auto r = f.router.route(req);
    EXPECT_EQ(r.status, 404) << method << " " << path;
    EXPECT_EQ(error_code(r), "route_not_found");
  }
}

TEST(ApiTest, MaintenanceBlocksApiButNotMounts) {
  ApiFixture f;
  f.router.mount("/ctf/v1", [](const emucloud::ApiRequest&) { return emucloud::json_response({{"ok", true}}); });
  f.box.emu->set_maintenance(true);
  emucloud::ApiRequest req;
  req.path = "/storage/v1/b";
  auto r = f.router.route(req);
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(error_code(r), "deployment_in_progress");
  req.path = "/ctf/v1/status";
  EXPECT_EQ(f.router.route(req).status, 200);
  f.box.emu->set_maintenance(false);
  req.path = "/storage/v1/b";
  req.query["project"] = kProject;
  EXPECT_EQ(f.router.route(req).status, 401);
}

TEST(ApiTest, GetsAreIdempotent) {
  ApiFixture f;
  auto token = f.token_for(f.admin);
  const auto before = emucloud::strip_volatile(f.box.emu->snapshot());
  for (const auto& ep : gated_endpoints()) {
    if (std::string(ep.method) != "GET") continue;
    auto first = f.call(ep, token);
    auto second = f.call(ep, token);
    EXPECT_EQ(first.status, 200) << ep.name;
    EXPECT_EQ(first.body, second.body) << ep.name;
  }
  EXPECT_EQ(emucloud::strip_volatile(f.box.emu->snapshot()), before);
}

TEST(ApiTest, TokenExchangeAndTestPermissions) {
  ApiFixture f;
  emucloud::ApiRequest req;
  req.method = "POST";
  req.path = "/iam/v1/token";
  req.body = json{{"client_email", f.runtime.email}, {"private_key", f.runtime.key_material}}.dump();
  auto r = f.router.route(req);
  ASSERT_EQ(r.status, 200) << r.body;
  auto body = json::parse(r.body);
  EXPECT_EQ(body.at("token_type"), "Bearer");
  EXPECT_EQ(body.at("expires_in"), 3600);
  const std::string token = body.at("access_token");

  req.body = json{{"client_email", f.runtime.email}, {"private_key", "wrong"}}.dump();
  EXPECT_EQ(error_code(f.router.route(req)), "invalid_credentials");

  f.box.emu->add_binding_members(kProject, "roles/logging.viewer", {f.runtime.email});
  req.path = std::string("/iam/v1/projects/") + kProject + "/testPermissions";
  req.headers["Authorization"] = "Bearer " + token;
  req.body = json{{"permissions", {"logging.logEntries.list", "storage.objects.get"}}}.dump();
  auto tp = json::parse(f.router.route(req).body);
  EXPECT_EQ(tp.at("permissions"), json::array({"logging.logEntries.list"}));

  req.path = "/iam/v1/identityToken";
  req.body = json{{"audience", "http://x/fn/a/b"}}.dump();
  auto id = json::parse(f.router.route(req).body);
  EXPECT_EQ(id.at("audience"), "http://x/fn/a/b");
  req.body = "{}";
  EXPECT_EQ(error_code(f.router.route(req)), "missing_audience");
}

TEST(ApiTest, PolicyEtagRoundTrip) {
  ApiFixture f;
  auto token = f.token_for(f.admin);
  emucloud::ApiRequest get;
  get.path = std::string("/iam/v1/projects/") + kProject + "/policy";
  get.headers["Authorization"] = "Bearer " + token;
  auto policy = json::parse(f.router.route(get).body);

  emucloud::ApiRequest put = get;
  put.method = "PUT";
  policy["bindings"].push_back({{"role", "roles/logging.viewer"}, {"members", {f.runtime.email}}});
  put.body = policy.dump();
  auto ok = f.router.route(put);
  ASSERT_EQ(ok.status, 200) << ok.body;
  EXPECT_NE(json::parse(ok.body).at("etag"), policy.at("etag"));

  auto stale = f.router.route(put);  // same etag again
  EXPECT_EQ(stale.status, 409);
  EXPECT_EQ(error_code(stale), "stale_etag");
}

TEST(ApiTest, FunctionAndVmRoutesIgnoreBadAuthorization) {
  ApiFixture f;
  emucloud::ApiRequest req;
  req.path = std::string("/fn/") + kProject + "/api-fn";
  req.headers["Authorization"] = "Bearer garbage";
  auto r = f.router.route(req);
  EXPECT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.body, "v1");
}

TEST(ApiTest, SshEndpoint) {
  ApiFixture f;
  auto keys = emucloud::generate_ssh_key_pair();
  f.box.emu->set_instance_metadata(kProject, "api-vm", "ssh-keys", "me:" + keys.public_key);
  emucloud::ApiRequest req;
  req.method = "POST";
  req.path = std::string("/compute/v1/projects/") + kProject + "/instances/api-vm/ssh";
  req.body = json{{"private_key", keys.private_key}, {"command", "whoami"}}.dump();
  auto r = json::parse(f.router.route(req).body);
  EXPECT_EQ(r.at("output"), f.runtime.email);

  req.body = json{{"private_key", keys.private_key},
                  {"command", "metadata"},
                  {"path", "/computeMetadata/v1/instance/zone"},
                  {"headers", {{"Metadata-Flavor", "Google"}}}}
                 .dump();
  EXPECT_EQ(json::parse(f.router.route(req).body).at("output"), "us-east1-b");

  req.body = json{{"private_key", "emussh-private-00"}, {"command", "whoami"}}.dump();
  auto denied = f.router.route(req);
  EXPECT_EQ(denied.status, 403);
  EXPECT_EQ(error_code(denied), "key_rejected");
}

TEST(ApiTest, SplitTarget) {
  auto [path, query] = emucloud::split_target("/a/b?x=1&y=%20z&flag");
  EXPECT_EQ(path, "/a/b");
  EXPECT_EQ(query.at("x"), "1");
  EXPECT_EQ(query.at("y"), " z");
  EXPECT_TRUE(query.contains("flag"));
  EXPECT_EQ(emucloud::url_decode(emucloud::url_encode("a b/c?d=e&f")), "a b/c?d=e&f");
}

TEST(ApiTest, HttpServerServesRouter) {
  testenv::LiveServer server;
  testenv::CliDriver cli(server.address());
  auto r = cli.run({"list-levels"});
  EXPECT_EQ(r.code, 0) << r.err;
}

}  // namespace
