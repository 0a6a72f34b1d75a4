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

#include "emucloud/api.hpp"

#include <cctype>
#include <sstream>

namespace emucloud {
namespace {

using nlohmann::json;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> segs;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) segs.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) segs.push_back(std::move(cur));
  return segs;
}

std::string join_from(const std::vector<std::string>& segs, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < segs.size(); ++i) {
    if (i > from) out += "/";
    out += segs[i];
  }
  return out;
}

std::string query_or(const ApiRequest& r, const std::string& key, const std::string& def = "") {
  auto it = r.query.find(key);
  return it == r.query.end() ? def : it->second;
}

json parse_body(const ApiRequest& r) {
  if (r.body.empty()) return json::object();
  try {
    return json::parse(r.body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kBadRequest, "request body is not valid JSON");
  }
}

std::string body_string(const json& body, const char* key, bool required = true) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    if (!required) return {};
    throw Error(ErrorCode::kBadRequest, std::string("missing string field '") + key + "'");
  }
  return body[key].get<std::string>();
}

ApiResponse raw_response(std::string body, std::string content_type = "application/octet-stream") {
  ApiResponse r;
  r.content_type = std::move(content_type);
  r.body = std::move(body);
  return r;
}

json instance_json(const Instance& inst, const Emulator& emu) {
  json j = {{"name", inst.name},
            {"zone", inst.zone},
            {"metadata", inst.metadata},
            {"service_account", inst.attached_service_account}};
  if (inst.container_image) {
    j["container_image"] = *inst.container_image;
    j["serving_port"] = *inst.serving_port;
    j["http_url"] = emu.options().api_base + "/vm/" + inst.project_id + "/" + inst.name + "/";
  }
  return j;
}

json function_json(const FunctionDef& fn) {
  return {{"name", fn.name},
          {"url", fn.url},
          {"env", fn.env},
          {"require_auth", fn.require_auth},
          {"runtime_account", fn.runtime_account}};
}

json commit_json(const Commit& c) {
  json files = json::array();
  for (const auto& [path, bytes] : c.files) files.push_back(path);
  return {{"commit_id", c.commit_id},
          {"parent_id", c.parent_id ? json(*c.parent_id) : json(nullptr)},
          {"message", c.message},
          {"files", files}};
}

HandlerRequest handler_request(const ApiRequest& r, std::string path) {
  HandlerRequest hr;
  hr.method = r.method;
  hr.path = std::move(path);
  hr.headers = r.headers;
  hr.params = r.query;
  if (!r.body.empty()) {
    try {
      auto body = json::parse(r.body);
      if (body.is_object()) {
        for (const auto& [k, v] : body.items()) hr.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    } catch (const json::parse_error&) {
      // Non-JSON bodies are not exposed to handlers.
    }
  }
  return hr;
}

ApiResponse from_http(const HttpResult& r) {
  ApiResponse out;
  out.status = r.status;
  out.content_type = "text/plain; charset=utf-8";
  out.body = r.body;
  return out;
}

}  // namespace

ApiResponse json_response(const json& body, int status) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

ApiResponse error_response(ErrorCode code, const std::string& message) {
  return json_response({{"error", {{"code", code_name(code)}, {"message", message}}}}, http_status(code));
}

ApiResponse error_response(const Error& e) { return error_response(e.code(), e.what()); }

std::string url_decode(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else if (s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string url_encode(const std::string& s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/' || c == ':') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0f]);
    }
  }
  return out;
}

std::pair<std::string, std::map<std::string, std::string>> split_target(const std::string& target) {
  const auto q = target.find('?');
  std::string path = url_decode(target.substr(0, q));
  std::map<std::string, std::string> query;
  if (q != std::string::npos) {
    std::stringstream ss(target.substr(q + 1));
    std::string pair;
    while (std::getline(ss, pair, '&')) {
      if (pair.empty()) continue;
      const auto eq = pair.find('=');
      query[url_decode(pair.substr(0, eq))] = eq == std::string::npos ? "" : url_decode(pair.substr(eq + 1));
    }
  }
  return {path, query};
}

json policy_to_json(const IamPolicy& policy) {
  json bindings = json::array();
  for (const auto& b : policy.bindings) bindings.push_back({{"role", b.role_name}, {"members", b.members}});
  return {{"project_id", policy.project_id}, {"etag", policy.etag}, {"bindings", bindings}};
}

IamPolicy policy_from_json(const json& j) {
  IamPolicy p;
  try {
    p.etag = j.value("etag", "");
    for (const auto& b : j.value("bindings", json::array())) {
      p.bindings.push_back(
          Binding{b.at("role").get<std::string>(), b.at("members").get<std::set<std::string>>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadRequest, std::string("malformed policy: ") + e.what());
  }
  return p;
}

Router::Router(Emulator& emulator) : emu_(emulator) {
  emu_.set_internal_fetcher([this](const std::string& target, const HeaderMap& headers) {
    auto [path, query] = split_target(target);
    ApiRequest req;
    req.method = "GET";
    req.path = path;
    req.query = query;
    req.headers = headers;
    auto resp = route(req);
    return HttpResult{resp.status, resp.body};
  });
}

Router::~Router() { emu_.set_internal_fetcher(nullptr); }

void Router::mount(std::string prefix, Handler handler) {
  mounts_.emplace_back(std::move(prefix), std::move(handler));
}

ApiResponse Router::route(const ApiRequest& request) const {
  for (const auto& [prefix, handler] : mounts_) {
    if (request.path.rfind(prefix, 0) == 0) {
      try {
        return handler(request);
      } catch (const Error& e) {
        return error_response(e);
      }
    }
  }
  if (emu_.in_maintenance()) {
    return error_response(ErrorCode::kDeploymentInProgress, "a level deployment is in progress; retry shortly");
  }

  std::string token;
  const bool token_routes = request.path.rfind("/fn/", 0) != 0 && request.path.rfind("/vm/", 0) != 0 &&
                            request.path != "/iam/v1/token";
  if (auto it = request.headers.find("Authorization"); it != request.headers.end() && token_routes) {
    constexpr std::string_view kBearer = "Bearer ";
    if (it->second.rfind(kBearer, 0) != 0 || it->second.size() == kBearer.size()) {
      return error_response(ErrorCode::kInvalidToken, "Authorization header must be 'Bearer <token>'");
    }
    token = it->second.substr(kBearer.size());
    if (!emu_.resolve_token(token)) {
      return error_response(ErrorCode::kInvalidToken, "token is unknown or expired");
    }
  }
  try {
    return dispatch(request, token);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kPermissionDenied && token.empty()) {
      return error_response(ErrorCode::kUnauthenticated, std::string("authentication required: ") + e.what());
    }
    return error_response(e);
  }
}

ApiResponse Router::dispatch(const ApiRequest& r, const std::string& token) const {
  const auto s = split_path(r.path);
  const auto& m = r.method;
  auto is = [&](std::size_t n, std::initializer_list<const char*> fixed) {
    if (s.size() < n) return false;
    std::size_t i = 0;
    for (const char* f : fixed) {
      if (f != nullptr && s[i] != f) return false;
      ++i;
    }
    return true;
  };
  auto not_found = [&]() {
    return error_response(ErrorCode::kRouteNotFound, "no route for " + m + " " + r.path);
  };
  if (s.size() < 2) return not_found();

  // ---- IAM
  if (is(2, {"iam", "v1"})) {
    if (s.size() == 3 && s[2] == "token" && m == "POST") {
      auto body = parse_body(r);
      auto tok = emu_.mint_access_token(body_string(body, "client_email"), body_string(body, "private_key"));
      return json_response({{"access_token", tok.token_id},
                            {"token_type", "Bearer"},
                            {"expires_in", (tok.expires_at - emu_.now()) / 1000}});
    }
    if (s.size() == 3 && s[2] == "identityToken" && m == "POST") {
      auto body = parse_body(r);
      if (token.empty()) throw Error(ErrorCode::kUnauthenticated, "an access token is required");
      auto tok = emu_.mint_identity_token(token, body_string(body, "audience", false));
      return json_response({{"token", tok.token_id}, {"audience", tok.audience}});
    }
    if (s.size() == 3 && s[2] == "roles" && m == "GET") {
      json roles = json::array();
      for (const auto& role : emu_.catalog().roles()) {
        roles.push_back({{"role", role.role_name}, {"permissions", role.permissions}});
      }
      return json_response({{"roles", roles}});
    }
    if (s.size() == 5 && s[2] == "projects") {
      const auto& project = s[3];
      if (s[4] == "testPermissions" && m == "POST") {
        auto body = parse_body(r);
        std::vector<std::string> perms;
        try {
          perms = body.at("permissions").get<std::vector<std::string>>();
        } catch (const json::exception&) {
          throw Error(ErrorCode::kBadRequest, "body must be {\"permissions\":[...]}");
        }
        // Gated calls run before building a json literal: g++ 11 leaks the
        // half-built initializer_list if an element's constructor throws.
        const auto granted = emu_.test_iam_permissions(token, perms, project);
        return json_response({{"permissions", granted}});
      }
      if (s[4] == "policy" && m == "GET") return json_response(policy_to_json(emu_.get_iam_policy(token, project)));
      if (s[4] == "policy" && m == "PUT") {
        auto policy = policy_from_json(parse_body(r));
        return json_response(policy_to_json(emu_.set_iam_policy(token, project, std::move(policy))));
      }
    }
    return not_found();
  }

  // ---- storage
  if (is(3, {"storage", "v1", "b"})) {
    if (s.size() == 3 && m == "GET") {
      const auto items = emu_.buckets_list(token, query_or(r, "project"));
      return json_response({{"items", items}});
    }
    if (s.size() == 5 && s[4] == "o" && m == "GET") {
      const auto items = emu_.objects_list(token, s[3]);
      return json_response({{"items", items}});
    }
    if (s.size() >= 6 && s[4] == "o") {
      const std::string object = join_from(s, 5);
      if (m == "GET") return raw_response(emu_.object_get(token, s[3], object));
      if (m == "PUT" || m == "POST") {
        auto ct = r.headers.find("Content-Type");
        emu_.object_put(token, s[3], object, r.body,
                        ct == r.headers.end() ? "application/octet-stream" : ct->second);
        return json_response({{"bucket", s[3]}, {"name", object}, {"size", r.body.size()}});
      }
    }
    return not_found();
  }

  // ---- compute
  if (is(5, {"compute", "v1", "projects", nullptr, "instances"})) {
    const auto& project = s[3];
    if (s.size() == 5 && m == "GET") {
      json items = json::array();
      for (const auto& inst : emu_.instances_list(token, project)) items.push_back(instance_json(inst, emu_));
      return json_response({{"items", items}});
    }
    if (s.size() == 7 && s[6] == "setMetadata" && m == "POST") {
      auto body = parse_body(r);
      emu_.instance_set_metadata(token, project, s[5], body_string(body, "key"), body_string(body, "value"));
      return json_response({{"instance", s[5]}, {"key", body_string(body, "key")}});
    }
    if (s.size() == 7 && s[6] == "ssh" && m == "POST") {
      auto body = parse_body(r);
      auto session = emu_.ssh_connect(project, s[5], body_string(body, "private_key"));
      const std::string command = body_string(body, "command", false);
      const std::string path = body_string(body, "path", false);
      std::string output;
      if (command.empty() || command == "whoami") {
        output = session.principal;
      } else if (command == "token") {
        output = emu_.session_token(session).token_id;
      } else if (command == "ls") {
        for (const auto& f : emu_.session_list_files(session)) output += f + "\n";
      } else if (command == "cat") {
        output = emu_.session_read_file(session, path);
      } else if (command == "metadata") {
        HeaderMap headers;
        if (body.contains("headers") && body["headers"].is_object()) {
          for (const auto& [k, v] : body["headers"].items()) headers[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        output = emu_.metadata_get(emu_.session_context(session), path, headers);
      } else {
        throw Error(ErrorCode::kBadRequest, "unknown ssh command '" + command + "'");
      }
      return json_response({{"instance", s[5]}, {"principal", session.principal}, {"output", output}});
    }
    return not_found();
  }

  // ---- instance web servers
  if (s[0] == "vm" && s.size() >= 3) {
    return from_http(emu_.instance_http(s[1], s[2], handler_request(r, "/" + join_from(s, 3))));
  }

  // ---- functions
  if (is(5, {"functions", "v1", "projects", nullptr, "functions"})) {
    const auto& project = s[3];
    if (s.size() == 5 && m == "GET") {
      json items = json::array();
      for (const auto& fn : emu_.functions_list(token, project)) items.push_back(function_json(fn));
      return json_response({{"items", items}});
    }
    if (s.size() == 7 && s[6] == "source") {
      if (m == "GET") {
        const auto source = emu_.function_source_get(token, project, s[5]);
        return json_response({{"name", s[5]}, {"source", source}});
      }
      if (m == "PUT") {
        auto body = parse_body(r);
        emu_.function_update(token, project, s[5], body_string(body, "source"));
        return json_response({{"name", s[5]}, {"updated", true}});
      }
    }
    return not_found();
  }
  if (s[0] == "fn" && s.size() == 3) {
    std::string bearer;
    if (auto it = r.headers.find("Authorization"); it != r.headers.end() && it->second.rfind("Bearer ", 0) == 0) {
      bearer = it->second.substr(7);
    }
    return from_http(emu_.function_invoke(s[1], s[2], handler_request(r, "/"), bearer));
  }

  // ---- logging
  if (is(5, {"logging", "v1", "projects", nullptr, "entries"}) && s.size() == 5 && m == "GET") {
    std::optional<std::string> logger;
    if (r.query.contains("logger")) logger = r.query.at("logger");
    json entries = json::array();
    for (const auto& e : emu_.logs_list(token, s[3], logger)) {
      entries.push_back({{"timestamp", e.timestamp},
                         {"severity", severity_name(e.severity)},
                         {"logger", e.logger},
                         {"message", e.message}});
    }
    return json_response({{"entries", entries}});
  }

  // ---- source repositories
  if (is(5, {"repos", "v1", "projects", nullptr, "repos"}) && m == "GET") {
    const auto& project = s[3];
    if (s.size() == 5) {
      const auto items = emu_.repos_list(token, project);
      return json_response({{"items", items}});
    }
    if (s.size() == 7 && s[6] == "commits") {
      json commits = json::array();
      for (const auto& c : emu_.repo_log(token, project, s[5])) commits.push_back(commit_json(c));
      return json_response({{"repo", s[5]}, {"commits", commits}});
    }
    if (s.size() >= 10 && s[6] == "commits" && s[8] == "files") {
      return raw_response(emu_.repo_show(token, project, s[5], s[7], join_from(s, 9)));
    }
    return not_found();
  }

  // ---- container registry
  if (is(5, {"registry", "v1", "projects", nullptr, "images"}) && s.size() == 5 && m == "GET") {
    const auto items = emu_.images_list(token, s[3]);
    return json_response({{"items", items}});
  }
  if (is(3, {"registry", "v1", "images"}) && s.size() == 6 && s[5] == "archive" && m == "GET") {
    return raw_response(emu_.image_pull(token, s[3] + "/" + s[4]));
  }

  return not_found();
}

}  // namespace emucloud
