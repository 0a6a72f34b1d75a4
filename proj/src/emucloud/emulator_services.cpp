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
#include <cctype>

#include "emucloud/archive.hpp"
#include "emucloud/crypto.hpp"
#include "emucloud/emulator.hpp"
#include "emucloud/error.hpp"

namespace emucloud {
namespace {

constexpr std::size_t kListCap = 1000;

struct ParsedUrl {
  std::string host;
  std::string port;
  std::string target;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<ParsedUrl> parse_http_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.size() < kScheme.size() || lower(url.substr(0, kScheme.size())) != kScheme) {
    return std::nullopt;
  }
  const std::string rest = url.substr(kScheme.size());
  const auto end = rest.find_first_of("/?#");
  const std::string authority = rest.substr(0, end);
  if (authority.empty() || authority.find('@') != std::string::npos) return std::nullopt;
  ParsedUrl out;
  const auto colon = authority.rfind(':');
  out.host = lower(authority.substr(0, colon));
  if (colon != std::string::npos) out.port = authority.substr(colon + 1);
  out.target = end == std::string::npos ? "/" : rest.substr(end);
  if (out.target[0] != '/') out.target = "/" + out.target;
  return out;
}

bool is_metadata_host(const ParsedUrl& u) {
  const bool host = u.host == "metadata.google.internal" || u.host == "metadata" ||
                    u.host == "169.254.169.254";
  return host && (u.port.empty() || u.port == "80");
}

std::string strip_query(const std::string& path) { return path.substr(0, path.find_first_of("?#")); }

std::string header_value(const HeaderMap& headers, const std::string& name) {
  auto it = headers.find(name);
  return it == headers.end() ? std::string() : it->second;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

// -- workload host ------------------------------------------------------------

class Emulator::WorkloadHost final : public HandlerHost {
 public:
  WorkloadHost(Emulator& emu, RuntimeContext ctx, std::string logger)
      : emu_(emu), ctx_(std::move(ctx)), logger_(std::move(logger)) {}

  std::string fetch(const std::string& url, const HeaderMap& headers) override {
    auto parsed = parse_http_url(url);
    if (!parsed) {
      throw Error(ErrorCode::kHandlerError, "fetch: '" + url + "' is not reachable from the emulator network");
    }
    if (is_metadata_host(*parsed)) return emu_.metadata_get(ctx_, parsed->target, headers);

    InternalFetcher fetcher;
    bool internal = parsed->host == kInternalApiHost;
    {
      std::lock_guard lock(emu_.mu_);
      fetcher = emu_.fetcher_;
      auto base = parse_http_url(emu_.options_.api_base);
      internal = internal || (base && base->host == parsed->host && base->port == parsed->port);
    }
    if (!internal) {
      throw Error(ErrorCode::kHandlerError, "fetch: '" + url + "' is not reachable from the emulator network");
    }
    if (!fetcher) throw Error(ErrorCode::kHandlerError, "fetch: emulator API is not attached");
    auto result = fetcher(parsed->target, headers);
    if (result.status >= 200 && result.status < 300) return result.body;
    auto code = ErrorCode::kHandlerError;
    std::string message = "fetch failed with status " + std::to_string(result.status);
    try {
      auto body = nlohmann::json::parse(result.body);
      if (auto c = code_from_name(body.at("error").at("code").get<std::string>())) code = *c;
      message = body.at("error").value("message", message);
    } catch (const std::exception&) {
    }
    throw Error(code, message);
  }

  std::string metadata(const std::string& path) override {
    std::string target = path;
    if (auto parsed = parse_http_url(path); parsed && is_metadata_host(*parsed)) target = parsed->target;
    // In-workload client library: always sends the right headers.
    HeaderMap headers{{kMetadataFlavorHeader, "Google"}, {kMetadataRequestHeader, "true"}};
    return emu_.metadata_get(ctx_, target, headers);
  }

  void log(Severity severity, const std::string& message) override {
    emu_.append_log(ctx_.project_id, severity, logger_, message);
  }

 private:
  Emulator& emu_;
  RuntimeContext ctx_;
  std::string logger_;
};

HttpResult Emulator::run_handler(const std::string& source, const HandlerRequest& request,
                                 const std::map<std::string, std::string>& env,
                                 const RuntimeContext& ctx, const std::string& logger) {
  WorkloadHost host(*this, ctx, logger);
  HandlerOutcome outcome;
  try {
    outcome = handler_eval(HandlerScript::parse(source), request, env, host);
  } catch (const Error& e) {
    append_log(ctx.project_id, Severity::kError, logger,
               "execution failed: " + std::string(code_name(e.code())) + ": " + e.what());
    throw;
  }
  switch (outcome.kind) {
    case HandlerOutcome::Kind::kResponded:
      return {200, outcome.body};
    case HandlerOutcome::Kind::kCompleted:
      return {200, ""};
    case HandlerOutcome::Kind::kRaised:
      break;
  }
  throw Error(ErrorCode::kHandlerError, "execution failed; details were written to the log of '" +
                                            logger + "'");
}

// -- storage ------------------------------------------------------------------

std::vector<std::string> Emulator::buckets_list(const std::string& token,
                                                const std::string& project_id) const {
  std::lock_guard lock(mu_);
  require_locked(token, "storage.buckets.list", project_id);
  std::vector<std::string> names;
  for (const auto& [name, b] : state_.buckets) {
    if (b.project_id == project_id && names.size() < kListCap) names.push_back(name);
  }
  return names;
}

std::vector<std::string> Emulator::objects_list(const std::string& token,
                                                const std::string& bucket) const {
  std::lock_guard lock(mu_);
  auto it = state_.buckets.find(bucket);
  const std::string owner = it == state_.buckets.end() ? "" : it->second.project_id;
  require_locked(token, "storage.objects.list", gate_project_locked(token, owner));
  if (it == state_.buckets.end()) throw Error(ErrorCode::kNotFound, "bucket '" + bucket + "' not found");
  std::vector<std::string> names;
  for (const auto& [name, o] : it->second.objects) {
    if (names.size() < kListCap) names.push_back(name);
  }
  return names;
}

std::string Emulator::object_get(const std::string& token, const std::string& bucket,
                                 const std::string& object) const {
  std::lock_guard lock(mu_);
  auto it = state_.buckets.find(bucket);
  const std::string owner = it == state_.buckets.end() ? "" : it->second.project_id;
  require_locked(token, "storage.objects.get", gate_project_locked(token, owner));
  if (it == state_.buckets.end()) throw Error(ErrorCode::kNotFound, "bucket '" + bucket + "' not found");
  auto oit = it->second.objects.find(object);
  if (oit == it->second.objects.end()) {
    throw Error(ErrorCode::kNotFound, "object '" + object + "' not found in '" + bucket + "'");
  }
  return oit->second.content;
}

void Emulator::object_put(const std::string& token, const std::string& bucket,
                          const std::string& object, std::string content, std::string content_type) {
  std::lock_guard lock(mu_);
  auto it = state_.buckets.find(bucket);
  const std::string owner = it == state_.buckets.end() ? "" : it->second.project_id;
  require_locked(token, "storage.objects.create", gate_project_locked(token, owner));
  if (it == state_.buckets.end()) throw Error(ErrorCode::kNotFound, "bucket '" + bucket + "' not found");
  if (!valid_object_name(object)) throw Error(ErrorCode::kBadRequest, "invalid object name");
  it->second.objects[object] = StoredObject{std::move(content), std::move(content_type), clock_->now()};
}

void Emulator::create_bucket(const std::string& project_id, const std::string& name) {
  std::lock_guard lock(mu_);
  project_locked(project_id);
  if (name.empty()) throw Error(ErrorCode::kValidationError, "bucket name must be non-empty");
  if (state_.buckets.contains(name)) {
    throw Error(ErrorCode::kAlreadyExists, "bucket '" + name + "' already exists");
  }
  state_.buckets[name] = Bucket{name, project_id, {}};
}

void Emulator::delete_bucket(const std::string& name) {
  std::lock_guard lock(mu_);
  state_.buckets.erase(name);
}

std::optional<StoredObject> Emulator::put_object(const std::string& bucket, const std::string& name,
                                                 std::string content, std::string content_type) {
  std::lock_guard lock(mu_);
  auto it = state_.buckets.find(bucket);
  if (it == state_.buckets.end()) {
    throw Error(ErrorCode::kUnknownResource, "bucket '" + bucket + "' does not exist");
  }
  if (!valid_object_name(name)) throw Error(ErrorCode::kValidationError, "invalid object name '" + name + "'");
  std::optional<StoredObject> previous;
  if (auto oit = it->second.objects.find(name); oit != it->second.objects.end()) previous = oit->second;
  it->second.objects[name] = StoredObject{std::move(content), std::move(content_type), clock_->now()};
  return previous;
}

void Emulator::delete_object(const std::string& bucket, const std::string& name) {
  std::lock_guard lock(mu_);
  if (auto it = state_.buckets.find(bucket); it != state_.buckets.end()) it->second.objects.erase(name);
}

bool Emulator::has_bucket(const std::string& name) const {
  std::lock_guard lock(mu_);
  return state_.buckets.contains(name);
}

// -- compute ------------------------------------------------------------------

std::vector<Instance> Emulator::instances_list(const std::string& token,
                                               const std::string& project_id) const {
  std::lock_guard lock(mu_);
  require_locked(token, "compute.instances.list", project_id);
  std::vector<Instance> out;
  for (const auto& [name, inst] : project_locked(project_id).instances) {
    if (out.size() >= kListCap) break;
    Instance summary = inst;
    summary.files.clear();  // disk contents are only visible over ssh
    out.push_back(std::move(summary));
  }
  return out;
}

void Emulator::instance_set_metadata(const std::string& token, const std::string& project_id,
                                     const std::string& instance, const std::string& key,
                                     const std::string& value) {
  std::lock_guard lock(mu_);
  require_locked(token, "compute.instances.setMetadata", project_id);
  auto& instances = project_locked(project_id).instances;
  auto it = instances.find(instance);
  if (it == instances.end()) throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + instance + "'");
  if (key.empty()) throw Error(ErrorCode::kBadRequest, "metadata key must be non-empty");
  it->second.metadata[key] = value;
}

void Emulator::create_instance(Instance instance) {
  std::lock_guard lock(mu_);
  auto& ps = project_locked(instance.project_id);
  if (instance.name.empty()) throw Error(ErrorCode::kValidationError, "instance name must be non-empty");
  if (ps.instances.contains(instance.name)) {
    throw Error(ErrorCode::kAlreadyExists, "instance '" + instance.name + "' already exists");
  }
  if (!ps.service_accounts.contains(instance.attached_service_account)) {
    throw Error(ErrorCode::kUnknownResource,
                "service account '" + instance.attached_service_account + "' is not in project");
  }
  if (instance.container_image.has_value() != instance.serving_port.has_value()) {
    throw Error(ErrorCode::kValidationError, "container_image and serving_port go together");
  }
  ps.instances[instance.name] = std::move(instance);
}

void Emulator::delete_instance(const std::string& project_id, const std::string& name) {
  std::lock_guard lock(mu_);
  if (auto it = state_.projects.find(project_id); it != state_.projects.end()) {
    it->second.instances.erase(name);
  }
}

std::optional<std::string> Emulator::set_instance_metadata(const std::string& project_id,
                                                           const std::string& instance,
                                                           const std::string& key,
                                                           std::optional<std::string> value) {
  std::lock_guard lock(mu_);
  auto& instances = project_locked(project_id).instances;
  auto it = instances.find(instance);
  if (it == instances.end()) throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + instance + "'");
  auto& md = it->second.metadata;
  std::optional<std::string> previous;
  if (auto mit = md.find(key); mit != md.end()) previous = mit->second;
  if (value) {
    md[key] = std::move(*value);
  } else {
    md.erase(key);
  }
  return previous;
}

std::optional<std::string> Emulator::set_instance_file(const std::string& project_id,
                                                       const std::string& instance,
                                                       const std::string& path,
                                                       std::optional<std::string> content) {
  std::lock_guard lock(mu_);
  auto& instances = project_locked(project_id).instances;
  auto it = instances.find(instance);
  if (it == instances.end()) throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + instance + "'");
  auto& files = it->second.files;
  std::optional<std::string> previous;
  if (auto fit = files.find(path); fit != files.end()) previous = fit->second;
  if (content) {
    files[path] = std::move(*content);
  } else {
    files.erase(path);
  }
  return previous;
}

InstanceSession Emulator::ssh_connect(const std::string& project_id, const std::string& instance,
                                      const std::string& private_key) const {
  std::lock_guard lock(mu_);
  const auto& instances = project_locked(project_id).instances;
  auto it = instances.find(instance);
  if (it == instances.end()) throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + instance + "'");
  const std::string public_key = ssh_public_from_private(trim(private_key));
  auto md = it->second.metadata.find("ssh-keys");
  if (md != it->second.metadata.end()) {
    for (const auto& line : split_lines(md->second)) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      if (trim(line.substr(colon + 1)) == public_key) {
        return InstanceSession{project_id, instance, it->second.attached_service_account};
      }
    }
  }
  throw Error(ErrorCode::kKeyRejected, "no ssh-keys entry on '" + instance + "' matches this key");
}

AccessToken Emulator::session_token(const InstanceSession& session) {
  std::lock_guard lock(mu_);
  return mint_locked(session.principal, session.project_id, TokenKind::kAccess, "");
}

std::string Emulator::session_read_file(const InstanceSession& session, const std::string& path) const {
  std::lock_guard lock(mu_);
  const auto& instances = project_locked(session.project_id).instances;
  auto it = instances.find(session.instance);
  if (it == instances.end()) throw Error(ErrorCode::kUnknownInstance, "instance is gone");
  auto fit = it->second.files.find(path);
  if (fit == it->second.files.end()) throw Error(ErrorCode::kNotFound, "cat: " + path + ": No such file");
  return fit->second;
}

std::vector<std::string> Emulator::session_list_files(const InstanceSession& session) const {
  std::lock_guard lock(mu_);
  const auto& instances = project_locked(session.project_id).instances;
  auto it = instances.find(session.instance);
  if (it == instances.end()) throw Error(ErrorCode::kUnknownInstance, "instance is gone");
  std::vector<std::string> paths;
  for (const auto& [path, content] : it->second.files) paths.push_back(path);
  return paths;
}

RuntimeContext Emulator::session_context(const InstanceSession& session) const {
  return RuntimeContext{session.project_id, session.principal, session.instance, ""};
}

std::string Emulator::metadata_get(const RuntimeContext& caller, const std::string& path,
                                   const HeaderMap& headers) {
  std::lock_guard lock(mu_);
  if (header_value(headers, kMetadataFlavorHeader) != "Google") {
    throw Error(ErrorCode::kMissingHeader, "missing required header 'Metadata-Flavor: Google'");
  }
  if (options_.metadata_hardening == MetadataHardening::kStrictHeader &&
      header_value(headers, kMetadataRequestHeader) != "true") {
    throw Error(ErrorCode::kMissingHeader,
                std::string("missing required header '") + kMetadataRequestHeader + ": true'");
  }
  const std::string p = strip_query(path);
  const std::string account_prefix = "/computeMetadata/v1/instance/service-accounts/";
  auto unknown = [&]() { return Error(ErrorCode::kUnknownPath, "no metadata at '" + p + "'"); };

  if (p == "/computeMetadata/v1/project/project-id") return caller.project_id;
  if (p == account_prefix) return "default/\n" + caller.runtime_account + "/\n";
  if (p.rfind(account_prefix, 0) == 0) {
    const std::string rest = p.substr(account_prefix.size());
    const auto slash = rest.find('/');
    const std::string who = rest.substr(0, slash);
    const std::string leaf = slash == std::string::npos ? "" : rest.substr(slash + 1);
    if (who != "default" && who != caller.runtime_account) throw unknown();
    if (leaf == "email") return caller.runtime_account;
    if (leaf == "token") {
      return mint_locked(caller.runtime_account, caller.project_id, TokenKind::kAccess, "").token_id;
    }
    throw unknown();
  }
  if (caller.instance.empty()) {
    if (p == "/computeMetadata/v1/instance/name") return caller.function;
    throw unknown();
  }
  const auto& instances = project_locked(caller.project_id).instances;
  auto it = instances.find(caller.instance);
  if (it == instances.end()) throw unknown();
  const Instance& inst = it->second;
  if (p == "/computeMetadata/v1/instance/name") return inst.name;
  if (p == "/computeMetadata/v1/instance/zone") return inst.zone;
  const std::string attr_prefix = "/computeMetadata/v1/instance/attributes/";
  if (p == attr_prefix) {
    std::string keys;
    for (const auto& [k, v] : inst.metadata) keys += k + "\n";
    return keys;
  }
  if (p.rfind(attr_prefix, 0) == 0) {
    auto mit = inst.metadata.find(p.substr(attr_prefix.size()));
    if (mit != inst.metadata.end()) return mit->second;
  }
  throw unknown();
}

HttpResult Emulator::instance_http(const std::string& project_id, const std::string& instance,
                                   const HandlerRequest& request) {
  std::string source;
  RuntimeContext ctx;
  {
    std::lock_guard lock(mu_);
    const auto& ps = project_locked(project_id);
    auto it = ps.instances.find(instance);
    if (it == ps.instances.end()) throw Error(ErrorCode::kUnknownInstance, "unknown instance '" + instance + "'");
    if (!it->second.container_image) {
      throw Error(ErrorCode::kNotFound, "instance '" + instance + "' is not serving HTTP");
    }
    const std::string& ref = *it->second.container_image;
    const auto pit = state_.projects.find(ref.substr(0, ref.find('/')));
    const ContainerImage* image = nullptr;
    if (pit != state_.projects.end()) {
      if (auto iit = pit->second.images.find(ref); iit != pit->second.images.end()) image = &iit->second;
    }
    if (image == nullptr) throw Error(ErrorCode::kUnknownImage, "image '" + ref + "' not found");
    auto sit = image->files.find(kImageHandlerPath);
    if (sit == image->files.end()) throw Error(ErrorCode::kHandlerError, "image has no handler script");
    source = sit->second;
    ctx = RuntimeContext{project_id, it->second.attached_service_account, instance, ""};
  }
  return run_handler(source, request, {}, ctx, instance);
}

// -- functions ----------------------------------------------------------------

std::string Emulator::function_url(const std::string& project_id, const std::string& name) const {
  return options_.api_base + "/fn/" + project_id + "/" + name;
}

std::vector<FunctionDef> Emulator::functions_list(const std::string& token,
                                                  const std::string& project_id) const {
  std::lock_guard lock(mu_);
  require_locked(token, "cloudfunctions.functions.list", project_id);
  std::vector<FunctionDef> out;
  for (const auto& [name, fn] : project_locked(project_id).functions) {
    if (out.size() >= kListCap) break;
    FunctionDef summary = fn;
    summary.source.clear();
    out.push_back(std::move(summary));
  }
  return out;
}

std::string Emulator::function_source_get(const std::string& token, const std::string& project_id,
                                          const std::string& name) const {
  std::lock_guard lock(mu_);
  require_locked(token, "cloudfunctions.functions.sourceCodeGet", project_id);
  const auto& fns = project_locked(project_id).functions;
  auto it = fns.find(name);
  if (it == fns.end()) throw Error(ErrorCode::kNotFound, "function '" + name + "' not found");
  return it->second.source;
}

void Emulator::function_update(const std::string& token, const std::string& project_id,
                               const std::string& name, const std::string& source) {
  std::lock_guard lock(mu_);
  require_locked(token, "cloudfunctions.functions.update", project_id);
  auto& fns = project_locked(project_id).functions;
  auto it = fns.find(name);
  if (it == fns.end()) throw Error(ErrorCode::kNotFound, "function '" + name + "' not found");
  (void)HandlerScript::parse(source);
  it->second.source = source;
}

HttpResult Emulator::function_invoke(const std::string& project_id, const std::string& name,
                                     const HandlerRequest& request, const std::string& bearer) {
  FunctionDef fn;
  {
    std::lock_guard lock(mu_);
    const auto& fns = project_locked(project_id).functions;
    auto it = fns.find(name);
    if (it == fns.end()) throw Error(ErrorCode::kNotFound, "function '" + name + "' not found");
    fn = it->second;
    if (fn.require_auth) {
      auto tok = resolve_locked(bearer);
      const bool ok = tok && tok->kind == TokenKind::kIdentity && tok->audience == fn.url;
      if (!ok) {
        throw Error(ErrorCode::kAuthRequired,
                    "this function requires an identity token with audience " + fn.url);
      }
    }
  }
  RuntimeContext ctx{project_id, fn.runtime_account, "", fn.name};
  return run_handler(fn.source, request, fn.env, ctx, fn.name);
}

void Emulator::create_function(FunctionDef fn) {
  (void)HandlerScript::parse(fn.source);
  std::lock_guard lock(mu_);
  auto& ps = project_locked(fn.project_id);
  if (fn.name.empty()) throw Error(ErrorCode::kValidationError, "function name must be non-empty");
  if (ps.functions.contains(fn.name)) {
    throw Error(ErrorCode::kAlreadyExists, "function '" + fn.name + "' already exists");
  }
  if (!ps.service_accounts.contains(fn.runtime_account)) {
    throw Error(ErrorCode::kUnknownResource,
                "service account '" + fn.runtime_account + "' is not in project");
  }
  fn.url = function_url(fn.project_id, fn.name);
  ps.functions[fn.name] = std::move(fn);
}

void Emulator::delete_function(const std::string& project_id, const std::string& name) {
  std::lock_guard lock(mu_);
  if (auto it = state_.projects.find(project_id); it != state_.projects.end()) {
    it->second.functions.erase(name);
  }
}

std::optional<std::string> Emulator::set_function_env(const std::string& project_id,
                                                      const std::string& name,
                                                      const std::string& key,
                                                      std::optional<std::string> value) {
  std::lock_guard lock(mu_);
  auto& fns = project_locked(project_id).functions;
  auto it = fns.find(name);
  if (it == fns.end()) throw Error(ErrorCode::kUnknownResource, "function '" + name + "' does not exist");
  auto& env = it->second.env;
  std::optional<std::string> previous;
  if (auto eit = env.find(key); eit != env.end()) previous = eit->second;
  if (value) {
    env[key] = std::move(*value);
  } else {
    env.erase(key);
  }
  return previous;
}

// -- logging ------------------------------------------------------------------

std::vector<LogEntry> Emulator::logs_list(const std::string& token, const std::string& project_id,
                                          const std::optional<std::string>& logger) const {
  std::lock_guard lock(mu_);
  require_locked(token, "logging.logEntries.list", project_id);
  std::vector<LogEntry> out;
  for (const auto& e : project_locked(project_id).logs) {
    if (logger && e.logger != *logger) continue;
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const LogEntry& a, const LogEntry& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.sequence < b.sequence;
  });
  if (out.size() > kListCap) out.erase(out.begin(), out.end() - kListCap);
  return out;
}

void Emulator::append_log_locked(const std::string& project_id, Severity severity,
                                 const std::string& logger, const std::string& message) {
  auto& ps = project_locked(project_id);
  ps.logs.push_back(LogEntry{project_id, clock_->now(), ++state_.log_sequence, severity, logger, message});
}

void Emulator::append_log(const std::string& project_id, Severity severity, const std::string& logger,
                          const std::string& message) {
  std::lock_guard lock(mu_);
  append_log_locked(project_id, severity, logger, message);
}

// -- source repositories ------------------------------------------------------

std::vector<std::string> Emulator::repos_list(const std::string& token,
                                              const std::string& project_id) const {
  std::lock_guard lock(mu_);
  require_locked(token, "sourcerepo.repos.list", project_id);
  std::vector<std::string> out;
  for (const auto& [name, r] : project_locked(project_id).repos) out.push_back(name);
  return out;
}

std::vector<Commit> Emulator::repo_log(const std::string& token, const std::string& project_id,
                                       const std::string& repo) const {
  std::lock_guard lock(mu_);
  require_locked(token, "sourcerepo.repos.get", project_id);
  const auto& repos = project_locked(project_id).repos;
  auto it = repos.find(repo);
  if (it == repos.end()) throw Error(ErrorCode::kNotFound, "repository '" + repo + "' not found");
  return {it->second.commits.rbegin(), it->second.commits.rend()};
}

std::string Emulator::repo_show(const std::string& token, const std::string& project_id,
                                const std::string& repo, const std::string& commit_id,
                                const std::string& path) const {
  std::lock_guard lock(mu_);
  require_locked(token, "sourcerepo.repos.get", project_id);
  const auto& repos = project_locked(project_id).repos;
  auto it = repos.find(repo);
  if (it == repos.end()) throw Error(ErrorCode::kNotFound, "repository '" + repo + "' not found");
  const auto& commits = it->second.commits;
  const Commit* commit = nullptr;
  if (commit_id == "HEAD") {
    if (!commits.empty()) commit = &commits.back();
  } else {
    for (const auto& c : commits) {
      if (c.commit_id == commit_id) commit = &c;
    }
  }
  if (commit == nullptr) throw Error(ErrorCode::kUnknownCommit, "unknown commit '" + commit_id + "'");
  auto fit = commit->files.find(path);
  if (fit == commit->files.end()) {
    throw Error(ErrorCode::kPathNotInCommit, "'" + path + "' does not exist in " + commit->commit_id);
  }
  return fit->second;
}

void Emulator::create_repo(const std::string& project_id, const std::string& name) {
  std::lock_guard lock(mu_);
  auto& repos = project_locked(project_id).repos;
  if (name.empty()) throw Error(ErrorCode::kValidationError, "repository name must be non-empty");
  if (repos.contains(name)) throw Error(ErrorCode::kAlreadyExists, "repository '" + name + "' already exists");
  repos[name] = SourceRepo{name, project_id, {}};
}

void Emulator::delete_repo(const std::string& project_id, const std::string& name) {
  std::lock_guard lock(mu_);
  if (auto it = state_.projects.find(project_id); it != state_.projects.end()) it->second.repos.erase(name);
}

Commit Emulator::push_commit(const std::string& project_id, const std::string& repo,
                             const std::string& message, std::map<std::string, std::string> files) {
  std::lock_guard lock(mu_);
  auto& repos = project_locked(project_id).repos;
  auto it = repos.find(repo);
  if (it == repos.end()) throw Error(ErrorCode::kUnknownResource, "repository '" + repo + "' does not exist");
  Commit c;
  c.repo_name = repo;
  if (!it->second.commits.empty()) c.parent_id = it->second.commits.back().commit_id;
  c.message = message;
  c.files = std::move(files);
  c.commit_id = compute_commit_id(c.parent_id, c.message, c.files);
  it->second.commits.push_back(c);
  return c;
}

std::size_t Emulator::repo_size(const std::string& project_id, const std::string& repo) const {
  std::lock_guard lock(mu_);
  const auto& repos = project_locked(project_id).repos;
  auto it = repos.find(repo);
  return it == repos.end() ? 0 : it->second.commits.size();
}

void Emulator::truncate_repo(const std::string& project_id, const std::string& repo, std::size_t n) {
  std::lock_guard lock(mu_);
  auto pit = state_.projects.find(project_id);
  if (pit == state_.projects.end()) return;
  auto it = pit->second.repos.find(repo);
  if (it != pit->second.repos.end() && it->second.commits.size() > n) it->second.commits.resize(n);
}

// -- container registry -------------------------------------------------------

std::vector<std::string> Emulator::images_list(const std::string& token,
                                               const std::string& project_id) const {
  std::lock_guard lock(mu_);
  require_locked(token, "containerregistry.images.list", project_id);
  std::vector<std::string> out;
  for (const auto& [path, img] : project_locked(project_id).images) out.push_back(path);
  return out;
}

std::string Emulator::image_pull(const std::string& token, const std::string& registry_path) const {
  std::lock_guard lock(mu_);
  const std::string owner = registry_path.substr(0, registry_path.find('/'));
  auto pit = state_.projects.find(owner);
  require_locked(token, "containerregistry.images.pull",
                 gate_project_locked(token, pit == state_.projects.end() ? "" : owner));
  if (pit != state_.projects.end()) {
    if (auto it = pit->second.images.find(registry_path); it != pit->second.images.end()) {
      return pack_archive(it->second.files);
    }
  }
  throw Error(ErrorCode::kUnknownImage, "image '" + registry_path + "' not found");
}

std::string Emulator::create_image(const std::string& project_id, const std::string& name_tag,
                                   std::map<std::string, std::string> files) {
  std::lock_guard lock(mu_);
  auto& images = project_locked(project_id).images;
  const auto colon = name_tag.find(':');
  if (name_tag.empty() || colon == 0 || colon == std::string::npos || colon + 1 == name_tag.size()) {
    throw Error(ErrorCode::kValidationError, "image reference must be <name>:<tag>");
  }
  const std::string path = project_id + "/" + name_tag;
  if (images.contains(path)) throw Error(ErrorCode::kAlreadyExists, "image '" + path + "' already exists");
  images[path] = ContainerImage{path, std::move(files)};
  return path;
}

void Emulator::delete_image(const std::string& registry_path) {
  std::lock_guard lock(mu_);
  auto pit = state_.projects.find(registry_path.substr(0, registry_path.find('/')));
  if (pit != state_.projects.end()) pit->second.images.erase(registry_path);
}

std::map<std::string, std::string> Emulator::set_image_files(const std::string& registry_path,
                                                             std::map<std::string, std::string> files) {
  std::lock_guard lock(mu_);
  auto pit = state_.projects.find(registry_path.substr(0, registry_path.find('/')));
  if (pit != state_.projects.end()) {
    if (auto it = pit->second.images.find(registry_path); it != pit->second.images.end()) {
      std::swap(it->second.files, files);
      return files;
    }
  }
  throw Error(ErrorCode::kUnknownResource, "image '" + registry_path + "' does not exist");
}

}  // namespace emucloud
