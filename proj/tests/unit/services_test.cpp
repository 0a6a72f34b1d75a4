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

#include <gtest/gtest.h>

#include "emucloud/archive.hpp"
#include "emucloud/crypto.hpp"
#include "emucloud/error.hpp"
#include "sha256_oracle.hpp"
#include "test_env.hpp"

namespace {

using emucloud::Error;
using emucloud::ErrorCode;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an emucloud::Error";
  return ErrorCode::kBadRequest;
}

constexpr const char* kProject = "proj-svc01";

class ServicesTest : public ::testing::Test {
 protected:
  void SetUp() override {
    emu().create_project(kProject, "Services");
    reader = emu().create_service_account(kProject, "reader", "");
    nobody = emu().create_service_account(kProject, "nobody", "");
    runtime = emu().create_service_account(kProject, "runtime", "");
    reader_token = token_for(reader);
    nobody_token = token_for(nobody);
  }

  emucloud::Emulator& emu() { return *box.emu; }

  std::string token_for(const emucloud::ServiceAccount& sa) {
    return emu().mint_access_token(sa.email, sa.key_material).token_id;
  }

  void grant(const std::string& role, const std::string& member) {
    emu().add_binding_members(kProject, role, {member});
  }

  testenv::Sandbox box;
  emucloud::ServiceAccount reader, nobody, runtime;
  std::string reader_token, nobody_token;
};

// -- storage ------------------------------------------------------------------

TEST_F(ServicesTest, StorageReadsNeedPermission) {
  emu().create_bucket(kProject, "data-bkt");
  emu().put_object("data-bkt", "a.txt", "alpha", "text/plain");
  grant("roles/storage.objectViewer", reader.email);

  EXPECT_EQ(emu().buckets_list(reader_token, kProject), std::vector<std::string>{"data-bkt"});
  EXPECT_EQ(emu().objects_list(reader_token, "data-bkt"), std::vector<std::string>{"a.txt"});
  EXPECT_EQ(emu().object_get(reader_token, "data-bkt", "a.txt"), "alpha");

  EXPECT_EQ(code_of([&] { emu().buckets_list(nobody_token, kProject); }), ErrorCode::kPermissionDenied);
  EXPECT_EQ(code_of([&] { emu().object_get(nobody_token, "data-bkt", "a.txt"); }),
            ErrorCode::kPermissionDenied);
  // The API layer turns an anonymous denial into 401; here it is a plain denial.
  EXPECT_EQ(code_of([&] { emu().object_get("", "data-bkt", "a.txt"); }), ErrorCode::kPermissionDenied);
}

TEST_F(ServicesTest, MissingResourcesDoNotLeakToUnauthorizedCallers) {
  emu().create_bucket(kProject, "data-bkt");
  // Same answer whether or not the object or bucket exists.
  EXPECT_EQ(code_of([&] { emu().object_get(nobody_token, "data-bkt", "ghost"); }),
            ErrorCode::kPermissionDenied);
  EXPECT_EQ(code_of([&] { emu().object_get(nobody_token, "no-such-bkt", "ghost"); }),
            ErrorCode::kPermissionDenied);
  EXPECT_EQ(code_of([&] { emu().objects_list(nobody_token, "no-such-bkt"); }),
            ErrorCode::kPermissionDenied);

  grant("roles/storage.objectViewer", reader.email);
  EXPECT_EQ(code_of([&] { emu().object_get(reader_token, "data-bkt", "ghost"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { emu().object_get(reader_token, "no-such-bkt", "x"); }), ErrorCode::kNotFound);
}

TEST_F(ServicesTest, ObjectPutOverwritesAndValidatesNames) {
  emu().create_bucket(kProject, "data-bkt");
  grant("roles/storage.admin", reader.email);
  emu().object_put(reader_token, "data-bkt", "dir/b.txt", "one", "text/plain");
  emu().object_put(reader_token, "data-bkt", "dir/b.txt", "two", "text/plain");
  EXPECT_EQ(emu().object_get(reader_token, "data-bkt", "dir/b.txt"), "two");
  EXPECT_EQ(code_of([&] { emu().object_put(reader_token, "data-bkt", "../up", "x", ""); }),
            ErrorCode::kBadRequest);
  EXPECT_EQ(code_of([&] { emu().object_put(nobody_token, "data-bkt", "c", "x", ""); }),
            ErrorCode::kPermissionDenied);

  auto prev = emu().put_object("data-bkt", "dir/b.txt", "three", "text/plain");
  ASSERT_TRUE(prev.has_value());
  EXPECT_EQ(prev->content, "two");
  EXPECT_EQ(code_of([&] { emu().put_object("gone-bkt", "x", "", ""); }), ErrorCode::kUnknownResource);
  EXPECT_EQ(code_of([&] { emu().create_bucket(kProject, "data-bkt"); }), ErrorCode::kAlreadyExists);
}

TEST_F(ServicesTest, ObjectNameRules) {
  EXPECT_TRUE(emucloud::valid_object_name("a"));
  EXPECT_TRUE(emucloud::valid_object_name("a/..b/c"));
  EXPECT_TRUE(emucloud::valid_object_name("..."));
  EXPECT_FALSE(emucloud::valid_object_name(""));
  EXPECT_FALSE(emucloud::valid_object_name(".."));
  EXPECT_FALSE(emucloud::valid_object_name("a/../b"));
  EXPECT_FALSE(emucloud::valid_object_name("a/.."));
}

// -- compute and ssh ----------------------------------------------------------

class ComputeTest : public ServicesTest {
 protected:
  void SetUp() override {
    ServicesTest::SetUp();
    keys = emucloud::generate_ssh_key_pair();
    emucloud::Instance inst;
    inst.name = "vm-one";
    inst.project_id = kProject;
    inst.zone = "us-central1-a";
    inst.attached_service_account = runtime.email;
    inst.metadata["ssh-keys"] = "admin:" + keys.public_key;
    inst.metadata["startup"] = "echo hi";
    inst.files["/home/admin/note.txt"] = "secret note";
    emu().create_instance(inst);
  }

  emucloud::SshKeyPair keys;
};

TEST_F(ComputeTest, ListHidesDiskContents) {
  grant("roles/compute.viewer", reader.email);
  auto list = emu().instances_list(reader_token, kProject);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].name, "vm-one");
  EXPECT_EQ(list[0].metadata.at("startup"), "echo hi");
  EXPECT_TRUE(list[0].files.empty());
  EXPECT_EQ(code_of([&] { emu().instances_list(nobody_token, kProject); }), ErrorCode::kPermissionDenied);
}

TEST_F(ComputeTest, SetMetadataNeedsInstanceAdmin) {
  grant("roles/compute.viewer", reader.email);
  EXPECT_EQ(code_of([&] { emu().instance_set_metadata(reader_token, kProject, "vm-one", "k", "v"); }),
            ErrorCode::kPermissionDenied);
  grant("roles/compute.instanceAdmin", reader.email);
  emu().instance_set_metadata(reader_token, kProject, "vm-one", "k", "v");
  EXPECT_EQ(emu().instances_list(reader_token, kProject)[0].metadata.at("k"), "v");
  EXPECT_EQ(code_of([&] { emu().instance_set_metadata(reader_token, kProject, "vm-two", "k", "v"); }),
            ErrorCode::kUnknownInstance);
}

TEST_F(ComputeTest, SshKeyMatching) {
  auto session = emu().ssh_connect(kProject, "vm-one", keys.private_key);
  EXPECT_EQ(session.principal, runtime.email);
  // Surrounding whitespace in the key file is tolerated.
  EXPECT_NO_THROW(emu().ssh_connect(kProject, "vm-one", "  " + keys.private_key + "\n"));

  auto other = emucloud::generate_ssh_key_pair();
  EXPECT_EQ(code_of([&] { emu().ssh_connect(kProject, "vm-one", other.private_key); }),
            ErrorCode::kKeyRejected);
  EXPECT_EQ(code_of([&] { emu().ssh_connect(kProject, "vm-nope", keys.private_key); }),
            ErrorCode::kUnknownInstance);

  // A second key appended on its own line is honored too.
  emu().set_instance_metadata(kProject, "vm-one", "ssh-keys",
                              "admin:" + keys.public_key + "\nintruder:" + other.public_key);
  EXPECT_NO_THROW(emu().ssh_connect(kProject, "vm-one", other.private_key));
}

TEST_F(ComputeTest, SessionTokenCarriesAttachedAccountPermissions) {
  grant("roles/storage.objectViewer", runtime.email);
  auto session = emu().ssh_connect(kProject, "vm-one", keys.private_key);
  auto tok = emu().session_token(session);
  EXPECT_EQ(tok.principal, runtime.email);

  const std::vector<std::string> all = {"storage.objects.get", "compute.instances.list",
                                        "logging.logEntries.list", "storage.buckets.list"};
  auto direct = emu().test_iam_permissions(token_for(runtime), all, kProject);
  EXPECT_EQ(emu().test_iam_permissions(tok.token_id, all, kProject), direct);
  EXPECT_EQ(direct, (std::vector<std::string>{"storage.objects.get", "storage.buckets.list"}));
}

TEST_F(ComputeTest, SessionFiles) {
  auto session = emu().ssh_connect(kProject, "vm-one", keys.private_key);
  EXPECT_EQ(emu().session_list_files(session), std::vector<std::string>{"/home/admin/note.txt"});
  EXPECT_EQ(emu().session_read_file(session, "/home/admin/note.txt"), "secret note");
  EXPECT_EQ(code_of([&] { emu().session_read_file(session, "/etc/shadow"); }), ErrorCode::kNotFound);
}

// -- metadata server ----------------------------------------------------------

TEST_F(ComputeTest, MetadataRequiresFlavorHeader) {
  auto ctx = emu().session_context(emu().ssh_connect(kProject, "vm-one", keys.private_key));
  emucloud::HeaderMap none;
  emucloud::HeaderMap flavor{{"Metadata-Flavor", "Google"}};
  emucloud::HeaderMap lower_name{{"metadata-flavor", "Google"}};

  EXPECT_EQ(code_of([&] { emu().metadata_get(ctx, "/computeMetadata/v1/instance/name", none); }),
            ErrorCode::kMissingHeader);
  EXPECT_EQ(emu().metadata_get(ctx, "/computeMetadata/v1/instance/name", flavor), "vm-one");
  EXPECT_EQ(emu().metadata_get(ctx, "/computeMetadata/v1/instance/zone", lower_name), "us-central1-a");
  EXPECT_EQ(emu().metadata_get(ctx, "/computeMetadata/v1/project/project-id", flavor), kProject);
  EXPECT_EQ(emu().metadata_get(ctx, "/computeMetadata/v1/instance/attributes/startup", flavor), "echo hi");
  EXPECT_EQ(emu().metadata_get(ctx, "/computeMetadata/v1/instance/service-accounts/default/email", flavor),
            runtime.email);
  EXPECT_EQ(code_of([&] { emu().metadata_get(ctx, "/computeMetadata/v1/instance/attributes/nope", flavor); }),
            ErrorCode::kUnknownPath);
  EXPECT_EQ(code_of([&] { emu().metadata_get(ctx, "/computeMetadata/v2/whatever", flavor); }),
            ErrorCode::kUnknownPath);
  EXPECT_EQ(code_of([&] {
              emu().metadata_get(ctx, "/computeMetadata/v1/instance/service-accounts/other@x/token", flavor);
            }),
            ErrorCode::kUnknownPath);
}

TEST_F(ComputeTest, MetadataTokenIsTheAttachedAccount) {
  auto ctx = emu().session_context(emu().ssh_connect(kProject, "vm-one", keys.private_key));
  emucloud::HeaderMap flavor{{"Metadata-Flavor", "Google"}};
  auto raw = emu().metadata_get(ctx, emucloud::kMetadataTokenPath, flavor);
  auto tok = emu().resolve_token(raw);
  ASSERT_TRUE(tok.has_value());
  EXPECT_EQ(tok->principal, runtime.email);
}

TEST_F(ComputeTest, StrictHeaderMode) {
  auto ctx = emu().session_context(emu().ssh_connect(kProject, "vm-one", keys.private_key));
  emu().set_metadata_hardening(emucloud::MetadataHardening::kStrictHeader);
  emucloud::HeaderMap flavor{{"Metadata-Flavor", "Google"}};
  emucloud::HeaderMap both{{"Metadata-Flavor", "Google"}, {"X-EmuCloud-Metadata-Request", "true"}};
  EXPECT_EQ(code_of([&] { emu().metadata_get(ctx, "/computeMetadata/v1/instance/name", flavor); }),
            ErrorCode::kMissingHeader);
  EXPECT_EQ(emu().metadata_get(ctx, "/computeMetadata/v1/instance/name", both), "vm-one");
}

// -- functions ----------------------------------------------------------------

class FunctionsTest : public ServicesTest {
 protected:
  void SetUp() override {
    ServicesTest::SetUp();
    emucloud::FunctionDef fn;
    fn.name = "greeter";
    fn.project_id = kProject;
    fn.runtime_account = runtime.email;
    fn.env["GREETING"] = "hello";
    fn.source = "respond(env(\"GREETING\") + \" \" + param(\"who\"))";
    emu().create_function(fn);

    fn.name = "locked";
    fn.require_auth = true;
    fn.source = "respond(\"inside\")";
    emu().create_function(fn);

    fn.name = "broken";
    fn.require_auth = false;
    fn.source = "error(\"bad month \" + param(\"m\") + \" \" + metadata(\"" +
                std::string(emucloud::kMetadataTokenPath) + "\"))";
    emu().create_function(fn);
  }

  emucloud::HandlerRequest req(std::map<std::string, std::string> params = {}) {
    emucloud::HandlerRequest r;
    r.params = std::move(params);
    return r;
  }
};

TEST_F(FunctionsTest, InvokeUsesEnvAndParams) {
  auto out = emu().function_invoke(kProject, "greeter", req({{"who", "world"}}), "");
  EXPECT_EQ(out.status, 200);
  EXPECT_EQ(out.body, "hello world");
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "nope", req(), ""); }), ErrorCode::kNotFound);
}

TEST_F(FunctionsTest, ListOmitsSourceAndCarriesUrl) {
  grant("roles/cloudfunctions.viewer", reader.email);
  auto list = emu().functions_list(reader_token, kProject);
  ASSERT_EQ(list.size(), 3u);
  for (const auto& fn : list) {
    EXPECT_TRUE(fn.source.empty());
    EXPECT_EQ(fn.url, emu().function_url(kProject, fn.name));
  }
  EXPECT_EQ(code_of([&] { emu().function_source_get(reader_token, kProject, "greeter"); }),
            ErrorCode::kPermissionDenied);
}

TEST_F(FunctionsTest, AuthRequiresIdentityTokenForTheUrl) {
  const std::string url = emu().function_url(kProject, "locked");
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "locked", req(), ""); }), ErrorCode::kAuthRequired);
  // An access token is not an identity token.
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "locked", req(), reader_token); }),
            ErrorCode::kAuthRequired);
  auto wrong = emu().mint_identity_token(reader_token, url + "x");
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "locked", req(), wrong.token_id); }),
            ErrorCode::kAuthRequired);
  auto right = emu().mint_identity_token(reader_token, url);
  EXPECT_EQ(emu().function_invoke(kProject, "locked", req(), right.token_id).body, "inside");

  box.clock->advance(std::chrono::milliseconds(emucloud::kTokenTtlMs));
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "locked", req(), right.token_id); }),
            ErrorCode::kAuthRequired);
}

TEST_F(FunctionsTest, UpdateRejectsBadSourceAndKeepsOld) {
  grant("roles/cloudfunctions.developer", reader.email);
  EXPECT_EQ(code_of([&] { emu().function_update(reader_token, kProject, "greeter", "respond(\"x\""); }),
            ErrorCode::kParseError);
  EXPECT_EQ(emu().function_source_get(reader_token, kProject, "greeter"),
            "respond(env(\"GREETING\") + \" \" + param(\"who\"))");
  EXPECT_EQ(code_of([&] { emu().function_update(nobody_token, kProject, "greeter", "respond(\"x\")"); }),
            ErrorCode::kPermissionDenied);
}

TEST_F(FunctionsTest, OverwrittenFunctionLeaksRuntimeCredential) {
  grant("roles/cloudfunctions.developer", reader.email);
  grant("roles/resourcemanager.projectIamAdmin", runtime.email);
  emu().function_update(reader_token, kProject, "greeter",
                        "respond(metadata(\"" + std::string(emucloud::kMetadataTokenPath) + "\"))");
  auto stolen = emu().function_invoke(kProject, "greeter", req(), "").body;
  auto tok = emu().resolve_token(stolen);
  ASSERT_TRUE(tok.has_value());
  EXPECT_EQ(tok->principal, runtime.email);
  EXPECT_TRUE(emu().check_permission(stolen, "resourcemanager.projects.setIamPolicy", kProject));
  EXPECT_FALSE(emu().check_permission(reader_token, "resourcemanager.projects.setIamPolicy", kProject));
}

TEST_F(FunctionsTest, ErrorPathLogsTheMessage) {
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "broken", req({{"m", "dec"}}), ""); }),
            ErrorCode::kHandlerError);
  grant("roles/logging.viewer", reader.email);
  auto logs = emu().logs_list(reader_token, kProject, std::string("broken"));
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_EQ(logs[0].severity, emucloud::Severity::kError);
  const std::string prefix = "bad month dec ";
  ASSERT_EQ(logs[0].message.rfind(prefix, 0), 0u);
  auto tok = emu().resolve_token(logs[0].message.substr(prefix.size()));
  ASSERT_TRUE(tok.has_value());
  EXPECT_EQ(tok->principal, runtime.email);
}

TEST_F(FunctionsTest, ExternalFetchIsBlocked) {
  grant("roles/cloudfunctions.developer", reader.email);
  for (const std::string url : {"http://example.com/", "https://metadata.google.internal/",
                                "ftp://x/", "http://user@169.254.169.254/", "http://10.0.0.1:8080/x"}) {
    emu().function_update(reader_token, kProject, "greeter",
                          "respond(fetch(\"" + url + "\", \"Metadata-Flavor: Google\"))");
    EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "greeter", req(), ""); }),
              ErrorCode::kHandlerError)
        << url;
  }
}

TEST_F(FunctionsTest, FetchToMetadataHostSendsOnlyGivenHeaders) {
  grant("roles/cloudfunctions.developer", reader.email);
  emu().function_update(reader_token, kProject, "greeter",
                        "respond(fetch(\"http://metadata.google.internal/computeMetadata/v1/instance/name\","
                        " param(\"h\")))");
  EXPECT_EQ(code_of([&] { emu().function_invoke(kProject, "greeter", req({{"h", ""}}), ""); }),
            ErrorCode::kMissingHeader);
  EXPECT_EQ(emu().function_invoke(kProject, "greeter", req({{"h", "Metadata-Flavor: Google"}}), "").body,
            "greeter");
  emu().set_metadata_hardening(emucloud::MetadataHardening::kStrictHeader);
  EXPECT_EQ(code_of([&] {
              emu().function_invoke(kProject, "greeter", req({{"h", "Metadata-Flavor: Google"}}), "");
            }),
            ErrorCode::kMissingHeader);
}

// -- logging ------------------------------------------------------------------

TEST_F(ServicesTest, LogsAreOrderedAndFiltered) {
  grant("roles/logging.viewer", reader.email);
  EXPECT_TRUE(emu().logs_list(reader_token, kProject, std::nullopt).empty());
  box.clock->advance(std::chrono::milliseconds(10));
  emu().append_log(kProject, emucloud::Severity::kInfo, "b", "second");
  box.clock->advance(std::chrono::milliseconds(-5));  // a clock step backwards must not reorder by insertion
  emu().append_log(kProject, emucloud::Severity::kInfo, "a", "first");
  emu().append_log(kProject, emucloud::Severity::kDebug, "a", "third");

  auto all = emu().logs_list(reader_token, kProject, std::nullopt);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].message, "first");
  EXPECT_EQ(all[1].message, "third");
  EXPECT_EQ(all[2].message, "second");
  EXPECT_LT(all[0].sequence, all[1].sequence);

  auto only_a = emu().logs_list(reader_token, kProject, std::string("a"));
  EXPECT_EQ(only_a.size(), 2u);
  EXPECT_TRUE(emu().logs_list(reader_token, kProject, std::string("zzz")).empty());
  EXPECT_EQ(code_of([&] { emu().logs_list(nobody_token, kProject, std::nullopt); }),
            ErrorCode::kPermissionDenied);
}

TEST_F(FunctionsTest, EachInvocationAppendsExactlyOnce) {
  grant("roles/logging.viewer", reader.email);
  for (int i = 0; i < 3; ++i) {
    EXPECT_THROW(emu().function_invoke(kProject, "broken", req({{"m", std::to_string(i)}}), ""), Error);
  }
  EXPECT_EQ(emu().logs_list(reader_token, kProject, std::string("broken")).size(), 3u);
  emu().function_invoke(kProject, "greeter", req(), "");
  EXPECT_TRUE(emu().logs_list(reader_token, kProject, std::string("greeter")).empty());
}

// -- source repositories ------------------------------------------------------

TEST_F(ServicesTest, CommitIdsMatchIndependentDigest) {
  emu().create_repo(kProject, "app");
  auto c1 = emu().push_commit(kProject, "app", "initial", {{"id_key", "KEY"}, {"main.py", "print(1)"}});
  auto c2 = emu().push_commit(kProject, "app", "remove key", {{"main.py", "print(2)"}});

  // Built by hand so the test does not share code with the implementation.
  std::string in1 = std::string("commit\nparent \nmessage 7\ninitial\n") + "id_key" + '\0' + "3" + '\0' +
                    "KEY" + "main.py" + '\0' + "8" + '\0' + "print(1)";
  EXPECT_EQ(c1.commit_id, oracle::sha256_hex(in1));
  EXPECT_FALSE(c1.parent_id.has_value());

  std::string in2 = "commit\nparent " + c1.commit_id + "\nmessage 10\nremove key\n" + "main.py" + '\0' +
                    "8" + '\0' + "print(2)";
  EXPECT_EQ(c2.commit_id, oracle::sha256_hex(in2));
  EXPECT_EQ(c2.parent_id, c1.commit_id);
}

TEST_F(ServicesTest, RepoHistoryKeepsDeletedFiles) {
  emu().create_repo(kProject, "app");
  auto c1 = emu().push_commit(kProject, "app", "initial", {{"id_key", "KEY"}});
  auto c2 = emu().push_commit(kProject, "app", "cleanup", {{"README", "hi"}});
  grant("roles/source.reader", reader.email);

  EXPECT_EQ(emu().repos_list(reader_token, kProject), std::vector<std::string>{"app"});
  auto log = emu().repo_log(reader_token, kProject, "app");
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[0].commit_id, c2.commit_id);  // newest first
  EXPECT_EQ(log[1].commit_id, c1.commit_id);

  EXPECT_EQ(code_of([&] { emu().repo_show(reader_token, kProject, "app", "HEAD", "id_key"); }),
            ErrorCode::kPathNotInCommit);
  EXPECT_EQ(emu().repo_show(reader_token, kProject, "app", c1.commit_id, "id_key"), "KEY");
  EXPECT_EQ(emu().repo_show(reader_token, kProject, "app", "HEAD", "README"), "hi");
  EXPECT_EQ(code_of([&] { emu().repo_show(reader_token, kProject, "app", "deadbeef", "README"); }),
            ErrorCode::kUnknownCommit);
  EXPECT_EQ(code_of([&] { emu().repo_log(reader_token, kProject, "other"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { emu().repo_log(nobody_token, kProject, "app"); }), ErrorCode::kPermissionDenied);

  emu().truncate_repo(kProject, "app", 1);
  EXPECT_EQ(emu().repo_size(kProject, "app"), 1u);
}

// -- container registry -------------------------------------------------------

TEST_F(ServicesTest, ImagePullRoundTrip) {
  std::map<std::string, std::string> files{{"/app/server.dsl", "respond(\"ok\")"},
                                           {"/app/README", std::string("bin\0ary", 7)}};
  auto path = emu().create_image(kProject, "web:v1", files);
  EXPECT_EQ(path, std::string(kProject) + "/web:v1");
  grant("roles/containerregistry.viewer", reader.email);

  EXPECT_EQ(emu().images_list(reader_token, kProject), std::vector<std::string>{path});
  EXPECT_EQ(emucloud::unpack_archive(emu().image_pull(reader_token, path)), files);
  EXPECT_EQ(code_of([&] { emu().image_pull(reader_token, std::string(kProject) + "/web:v2"); }),
            ErrorCode::kUnknownImage);
  EXPECT_EQ(code_of([&] { emu().image_pull(nobody_token, path); }), ErrorCode::kPermissionDenied);
  EXPECT_EQ(code_of([&] { emu().image_pull(nobody_token, "proj-elsewhere/web:v1"); }),
            ErrorCode::kPermissionDenied);
  EXPECT_EQ(code_of([&] { emu().create_image(kProject, "web", {}); }), ErrorCode::kValidationError);
  EXPECT_EQ(code_of([&] { emu().create_image(kProject, "web:", {}); }), ErrorCode::kValidationError);
}

TEST(ArchiveTest, LayoutIsLengthPrefixedLittleEndian) {
  auto bytes = emucloud::pack_archive({{"ab", "xyz"}});
  const std::string expected = std::string("\x02\0\0\0", 4) + "ab" + std::string("\x03\0\0\0\0\0\0\0", 8) + "xyz";
  EXPECT_EQ(bytes, expected);
  EXPECT_TRUE(emucloud::pack_archive({}).empty());
  EXPECT_TRUE(emucloud::unpack_archive("").empty());
}

TEST(ArchiveTest, TruncationIsDetectedAtEveryCut) {
  auto bytes = emucloud::pack_archive({{"a", "123"}, {"bb", "4567"}});
  for (std::size_t cut = 1; cut < bytes.size(); ++cut) {
    const auto prefix = std::string_view(bytes).substr(0, cut);
    // Cutting exactly at an entry boundary leaves a valid, shorter archive.
    if (cut == 4 + 1 + 8 + 3) continue;
    EXPECT_THROW(emucloud::unpack_archive(prefix), Error) << "cut at " << cut;
  }
}

TEST(ArchiveTest, DuplicatePathRejected) {
  auto one = emucloud::pack_archive({{"a", "1"}});
  EXPECT_THROW(emucloud::unpack_archive(one + one), Error);
}

// -- container web servers ----------------------------------------------------

TEST_F(ServicesTest, InstanceServesImageHandler) {
  emu().create_image(kProject, "web:v1",
                     {{emucloud::kImageHandlerPath, "if path() == \"/\" { respond(\"home\") } "
                                                    "respond(metadata(\"/computeMetadata/v1/instance/name\"))"}});
  emucloud::Instance inst;
  inst.name = "web-vm";
  inst.project_id = kProject;
  inst.zone = "europe-west1-b";
  inst.attached_service_account = runtime.email;
  inst.container_image = std::string(kProject) + "/web:v1";
  inst.serving_port = 8080;
  emu().create_instance(inst);

  emucloud::HandlerRequest r;
  EXPECT_EQ(emu().instance_http(kProject, "web-vm", r).body, "home");
  r.path = "/other";
  EXPECT_EQ(emu().instance_http(kProject, "web-vm", r).body, "web-vm");
  EXPECT_EQ(code_of([&] { emu().instance_http(kProject, "missing", r); }), ErrorCode::kUnknownInstance);

  inst.name = "half";
  inst.serving_port.reset();
  EXPECT_EQ(code_of([&] { emu().create_instance(inst); }), ErrorCode::kValidationError);
}

// -- leakage ------------------------------------------------------------------

TEST_F(FunctionsTest, LogsNeverContainAccountKeys) {
  for (int i = 0; i < 3; ++i) {
    emu().function_invoke(kProject, "greeter", req({{"who", std::to_string(i)}}), "");
    EXPECT_THROW(emu().function_invoke(kProject, "broken", req(), ""), Error);
  }
  grant("roles/logging.viewer", reader.email);
  for (const auto& e : emu().logs_list(reader_token, kProject, std::nullopt)) {
    for (const auto* sa : {&reader, &nobody, &runtime}) {
      EXPECT_EQ(e.message.find(sa->key_material), std::string::npos);
    }
  }
}

}  // namespace
