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

#ifndef EMUCLOUD_API_HPP_
#define EMUCLOUD_API_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emucloud/emulator.hpp"
#include "emucloud/error.hpp"
#include "emucloud/handler_dsl.hpp"

namespace emucloud {

struct ApiRequest {
  std::string method = "GET";
  std::string path = "/";
  HeaderMap headers;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

ApiResponse json_response(const nlohmann::json& body, int status = 200);
ApiResponse error_response(const Error& e);
ApiResponse error_response(ErrorCode code, const std::string& message);

/// Splits "a/b?x=1&y=%20" into a path and decoded query parameters.
std::pair<std::string, std::map<std::string, std::string>> split_target(const std::string& target);
std::string url_decode(const std::string& s);
std::string url_encode(const std::string& s);

nlohmann::json policy_to_json(const IamPolicy& policy);
IamPolicy policy_from_json(const nlohmann::json& j);

/// Maps REST paths onto emulator operations. Stateless apart from the
/// emulator reference; safe to call from many threads.
///
/// Authorization header handling: a malformed header, or a bearer token that
/// is unknown or expired, yields 401 `invalid_token`. Requests without a
/// token run as the anonymous principal; if that is denied the answer is 401
/// `unauthenticated`. Authenticated-but-denied is 403 `permission_denied`.
class Router {
 public:
  using Handler = std::function<ApiResponse(const ApiRequest&)>;

  explicit Router(Emulator& emulator);
  ~Router();
  Router(const Router&) = delete;
  Router& operator=(const Router&) = delete;

  ApiResponse route(const ApiRequest& request) const;

  /// Serves every path under `prefix` with `handler` (used for /ctf/v1).
  /// Mounted handlers keep serving while a deployment is in progress.
  void mount(std::string prefix, Handler handler);

  Emulator& emulator() const { return emu_; }

 private:
  ApiResponse dispatch(const ApiRequest& request, const std::string& token) const;

  Emulator& emu_;
  std::vector<std::pair<std::string, Handler>> mounts_;
};

}  // namespace emucloud

#endif  // EMUCLOUD_API_HPP_
