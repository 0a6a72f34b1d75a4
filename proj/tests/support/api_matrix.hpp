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

#ifndef THUNDER_TESTS_SUPPORT_API_MATRIX_HPP_
#define THUNDER_TESTS_SUPPORT_API_MATRIX_HPP_

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emucloud/api.hpp"
#include "test_env.hpp"

namespace apimatrix {

inline constexpr const char* kProject = "proj-api01";

std::string emu_admin_token(emucloud::Emulator& emu);

// One gated REST endpoint and the permission that guards it.
struct Endpoint {
  const char* name;
  const char* method;
  std::string path;
  std::string permission;
  // Body may depend on live state (the policy etag).
  std::function<std::string(emucloud::Emulator&)> body;
};

std::vector<Endpoint> gated_endpoints();

// A project holding one of each resource the gated endpoints touch.
class ApiFixture {
 public:
  ApiFixture();

  std::string token_for(const emucloud::ServiceAccount& sa);

  // An account holding every shipped role that lacks `permission` (or, when
  // `with` is set, only the narrowest role that has it).
  std::string account_token(const std::string& name, const std::string& permission, bool with);

  emucloud::ApiResponse call(const Endpoint& ep, const std::string& token);

  struct Gate {
    std::string permission;
    std::string project;
    bool allowed;
  };

  testenv::Sandbox box;
  emucloud::Router router;
  emucloud::ServiceAccount admin, runtime;
  std::vector<Gate> gates;
};

std::string error_code(const emucloud::ApiResponse& r);

}  // namespace apimatrix

#endif  // THUNDER_TESTS_SUPPORT_API_MATRIX_HPP_
