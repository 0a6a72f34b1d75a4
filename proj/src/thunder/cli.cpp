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

#include "thunder/cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "emucloud/api.hpp"
#include "emucloud/archive.hpp"
#include "emucloud/crypto.hpp"
#include "emucloud/server.hpp"
#include "thunder/hints.hpp"
#include "thunder/level.hpp"
#include "thunder/platform.hpp"

namespace thunder::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kDefaultAddress = "127.0.0.1:8085";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConnectError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiFailure : std::runtime_error {
  ApiFailure(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status(status), code(std::move(code)) {}
  int status;
  std::string code;
};

struct Response {
  int status = 0;
  std::string body;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

void write_private_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + p.string());
    out << content;
  }
  fs::permissions(p, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
}

/// Splits "Name: value".
std::pair<std::string, std::string> split_header(const std::string& h) {
  const auto colon = h.find(':');
  if (colon == std::string::npos || colon == 0) throw UsageError("header must look like 'Name: value': " + h);
  return {trim(h.substr(0, colon)), trim(h.substr(colon + 1))};
}

std::pair<std::string, std::string> split_param(const std::string& p) {
  const auto eq = p.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("parameter must look like key=value: " + p);
  return {p.substr(0, eq), p.substr(eq + 1)};
}

std::string seg(const std::string& s) { return emucloud::url_encode(s); }

std::string query_string(const std::vector<std::pair<std::string, std::string>>& params) {
  std::string q;
  for (const auto& [k, v] : params) {
    q += q.empty() ? "?" : "&";
    q += emucloud::url_encode(k) + "=" + emucloud::url_encode(v);
  }
  return q;
}

class Session {
 public:
  Session(const std::map<std::string, std::string>& env, std::ostream& out, std::ostream& err)
      : env_(env), out_(out), err_(err) {}

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  fs::path home() const {
    if (auto it = env_.find("THUNDER_HOME"); it != env_.end() && !it->second.empty()) return it->second;
    if (auto it = env_.find("HOME"); it != env_.end() && !it->second.empty()) return fs::path(it->second) / ".thunder";
    return ".thunder";
  }
  fs::path config_path() const { return home() / "config.json"; }

  void load() {
    if (!fs::exists(config_path())) return;
    json j = json::parse(read_text(config_path()), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UsageError("corrupt config file " + config_path().string());
    cfg.api_address = j.value("api_address", "");
    cfg.project = j.value("project", "");
    cfg.token = j.value("token", "");
    cfg.output = j.value("output", "text");
  }

  void save() const {
    json j = {{"api_address", cfg.api_address}, {"project", cfg.project}, {"token", cfg.token}, {"output", cfg.output}};
    write_private_file(config_path(), j.dump(2) + "\n");
  }

  std::string address() const {
    if (!addr_flag.empty()) return addr_flag;
    if (auto it = env_.find("EMUCLOUD_ADDR"); it != env_.end() && !it->second.empty()) return it->second;
    if (!cfg.api_address.empty()) return cfg.api_address;
    return kDefaultAddress;
  }

  std::string project() const {
    if (!project_flag.empty()) return project_flag;
    if (!cfg.project.empty()) return cfg.project;
    throw UsageError("no project set; pass --project or run 'thunder config set project <id>'");
  }

  bool json_mode() const { return json_flag || cfg.output == "json"; }

  Response request(const std::string& method, const std::string& target, const std::string& body = "",
                   httplib::Headers headers = {}, bool send_token = true) {
    auto [host, port] = parse_addr(address());
    httplib::Client client(host, port);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(60, 0);
    if (send_token && !cfg.token.empty() && !headers.count("Authorization")) {
      headers.emplace("Authorization", "Bearer " + cfg.token);
    }
    httplib::Result res;
    if (method == "GET") {
      res = client.Get(target, headers);
    } else if (method == "POST") {
      res = client.Post(target, headers, body, "application/json");
    } else if (method == "PUT") {
      res = client.Put(target, headers, body, "application/json");
    } else {
      throw UsageError("unsupported method " + method);
    }
    if (!res) {
      throw ConnectError("cannot reach the emulator at " + address() + ": " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

  /// request() that turns HTTP errors into ApiFailure.
  Response call(const std::string& method, const std::string& target, const std::string& body = "",
                httplib::Headers headers = {}, bool send_token = true) {
    Response r = request(method, target, body, std::move(headers), send_token);
    if (r.status >= 400) {
      json j = json::parse(r.body, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("error") && j["error"].is_object()) {
        throw ApiFailure(r.status, j["error"].value("code", "error"), j["error"].value("message", ""));
      }
      throw ApiFailure(r.status, "http_" + std::to_string(r.status), r.body);
    }
    return r;
  }

  /// JSON mode prints the body untouched; text mode calls `text`.
  void emit(const Response& r, const std::function<void(const json&)>& text) {
    if (json_mode()) {
      out_ << r.body;
      return;
    }
    text(json::parse(r.body));
  }

  CliConfig cfg;
  std::string addr_flag;
  std::string project_flag;
  bool json_flag = false;

 private:
  static std::pair<std::string, int> parse_addr(const std::string& a) {
    try {
      return emucloud::parse_address(a);
    } catch (const emucloud::Error& e) {
      throw UsageError(std::string("bad address '") + a + "': " + e.what());
    }
  }

  const std::map<std::string, std::string>& env_;
  std::ostream& out_;
  std::ostream& err_;
};

using Action = std::function<int()>;

/// A CLI11 subcommand whose callback stores `fn` as the action to run.
CLI::App* verb(CLI::App& parent, const std::string& name, const std::string& desc, Action& slot, Action fn) {
  auto* sub = parent.add_subcommand(name, desc);
  sub->fallthrough();
  sub->callback([&slot, fn = std::move(fn)] { slot = fn; });
  return sub;
}

CLI::App* group(CLI::App& parent, const std::string& name, const std::string& desc) {
  auto* sub = parent.add_subcommand(name, desc);
  sub->fallthrough();
  sub->require_subcommand(1);
  return sub;
}

std::string key_file_path(Session& s, const std::string& level) {
  std::string flat = level;
  for (auto& c : flat) {
    if (c == '/') c = '-';
  }
  return (s.home() / "keys" / (flat + ".json")).string();
}

void print_hints(Session& s, const json& j) {
  s.out() << j["level"].get<std::string>() << ": " << j["revealed"].get<std::size_t>() << " of "
          << j["total"].get<std::size_t>() << " hints revealed\n";
  for (const auto& h : j["hints"]) {
    s.out() << "\n[" << h["index"].get<std::size_t>() << "] " << h["title"].get<std::string>() << "\n";
    s.out() << strip_markup(h["body"].get<std::string>()) << "\n";
  }
}

int serve(Session& s, const std::string& addr_opt, const std::string& levels, const std::string& roles,
          const std::vector<std::string>& projects, const std::string& hardening, const std::string& ledger) {
  PlatformOptions opts;
  opts.levels_dir = levels;
  opts.roles_file = roles;
  opts.projects = projects;
  if (hardening == "strict-header") {
    opts.emulator.metadata_hardening = emucloud::MetadataHardening::kStrictHeader;
  } else if (hardening != "default") {
    throw UsageError("--metadata-hardening must be 'default' or 'strict-header'");
  }
  opts.ledger_file = ledger.empty() ? s.home() / "progress.json" : fs::path(ledger);
  const std::string address = addr_opt.empty() ? s.address() : addr_opt;
  auto [host, port] = emucloud::parse_address(address);
  Platform platform(std::move(opts));
  emucloud::HttpServer server(platform.router());
  const int bound = server.bind(host, port);
  if (bound < 0) throw ConnectError("cannot bind " + address);
  const std::string public_host = host == "0.0.0.0" ? "127.0.0.1" : host;
  platform.emulator().set_api_base("http://" + public_host + ":" + std::to_string(bound));
  s.out() << "emucloud listening on http://" << host << ":" << bound << " ("
          << platform.registry().list_levels().size() << " levels)" << std::endl;
  server.serve();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::map<std::string, std::string>& env) {
  Session s(env, out, err);
  CLI::App app{"Thunder CTF: cloud security levels on an emulated cloud", "thunder"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--addr", s.addr_flag, "API address host:port (overrides EMUCLOUD_ADDR and config)");
  app.add_option("--project", s.project_flag, "Project id (overrides config)");
  app.add_flag("--json", s.json_flag, "Print raw API response bodies");

  Action action;

  // ---- operator verbs
  std::string serve_addr, serve_levels, serve_roles, serve_hardening = "default", serve_ledger;
  std::vector<std::string> serve_projects;
  auto* serve_cmd = verb(app, "serve", "Run the emulator and CTF API", action, [&] {
    return serve(s, serve_addr, serve_levels, serve_roles, serve_projects, serve_hardening, serve_ledger);
  });
  serve_cmd->add_option("--listen", serve_addr, "host:port to bind (default: --addr or 127.0.0.1:8085)");
  serve_cmd->add_option("--levels", serve_levels, "Levels directory");
  serve_cmd->add_option("--roles", serve_roles, "Role catalog YAML");
  serve_cmd->add_option("--create-project", serve_projects, "Project to create at startup");
  serve_cmd->add_option("--metadata-hardening", serve_hardening, "default | strict-header");
  serve_cmd->add_option("--ledger", serve_ledger, "Progress ledger file");

  std::string level_ref;
  verb(app, "create", "Deploy a level into the active project", action, [&] {
    const std::string project = s.project();
    auto r = s.call("POST", "/ctf/v1/levels/create", json{{"level", level_ref}, {"project_id", project}}.dump());
    const json j = json::parse(r.body);
    // Credentials from an earlier level belong to infrastructure that no longer exists.
    s.cfg.token.clear();
    s.cfg.project = project;
    s.save();
    std::string key_path;
    if (!j["handout_key"].is_null()) {
      key_path = key_file_path(s, level_ref);
      write_private_file(key_path, j["handout_key"].dump(2) + "\n");
    }
    if (s.json_mode()) {
      out << r.body;
      return kOk;
    }
    out << "Created " << level_ref << " in project " << project << "\n\n" << trim(j["intro"].get<std::string>()) << "\n";
    if (!key_path.empty()) {
      out << "\nStarting credential (" << j["handout_key"]["client_email"].get<std::string>() << "):\n"
          << j["handout_key"].dump(2) << "\n"
          << "Saved to " << key_path << "\nActivate it with: thunder auth activate-key " << key_path << "\n";
    } else {
      out << "\nNo starting credential: you begin as an anonymous user.\n";
    }
    out << "Hints: " << j["hints_url"].get<std::string>() << "\n";
    return kOk;
  })->add_option("level", level_ref, "namespace/name")->required();

  verb(app, "destroy", "Tear down the active level", action, [&] {
    auto r = s.call("POST", "/ctf/v1/levels/destroy");
    s.emit(r, [&](const json& j) { out << "Destroyed " << j["destroyed"].get<std::string>() << "\n"; });
    return kOk;
  });

  std::string ns_filter;
  verb(app, "list-levels", "List available levels", action, [&] {
    auto r = s.call("GET", "/ctf/v1/levels", "", {}, false);
    s.emit(r, [&](const json& j) {
      for (const auto& l : j["levels"]) {
        if (ns_filter.empty() || l["namespace"] == ns_filter) out << l["level"].get<std::string>() << "\n";
      }
    });
    return kOk;
  })->add_option("--namespace", ns_filter, "Only this namespace");

  auto* hints = group(app, "hints", "Sequential hints for a level");
  verb(*hints, "show", "Show hints revealed so far", action, [&] {
    auto r = s.call("GET", "/ctf/v1/hints" + query_string({{"level", level_ref}, {"project_id", s.project()}}), "",
                    {}, false);
    s.emit(r, [&](const json& j) { print_hints(s, j); });
    return kOk;
  })->add_option("level", level_ref)->required();
  verb(*hints, "reveal", "Reveal the next hint", action, [&] {
    const std::string project = s.project();
    auto r = s.call("POST", "/ctf/v1/hints/reveal", json{{"level", level_ref}, {"project_id", project}}.dump(),
                    {}, false);
    s.emit(r, [&](const json& j) { print_hints(s, j); });
    return kOk;
  })->add_option("level", level_ref)->required();

  std::string flag_text;
  auto* validate = verb(app, "validate", "Check a flag", action, [&] {
    const std::string project = s.project();
    auto r = s.call("POST", "/ctf/v1/validate",
                    json{{"level", level_ref}, {"project_id", project}, {"flag", flag_text}}.dump(), {}, false);
    const json j = json::parse(r.body);
    if (s.json_mode()) {
      out << r.body;
    } else {
      out << j["result"].get<std::string>() << "\n";
    }
    return j["result"] == "correct" ? kOk : kApiError;
  });
  validate->add_option("level", level_ref)->required();
  validate->add_option("flag", flag_text)->required();

  verb(app, "progress", "Show hint and flag progress for the project", action, [&] {
    auto r = s.call("GET", "/ctf/v1/progress" + query_string({{"project_id", s.project()}}), "", {}, false);
    s.emit(r, [&](const json& j) {
      for (const auto& [level, p] : j["levels"].items()) {
        out << level << ": " << (p["solved"].get<bool>() ? "solved" : "unsolved") << ", "
            << p["revealed"].get<std::size_t>() << " hints revealed, " << p["submissions"].size()
            << " submissions\n";
      }
    });
    return kOk;
  });

  std::string render_out = "site", render_levels;
  std::vector<std::string> render_refs;
  auto* render = verb(app, "render-hints", "Write static hint slideshows", action, [&] {
    LevelRegistry registry;
    registry.load_directory(render_levels.empty() ? default_data_dir() / "levels" : fs::path(render_levels));
    auto refs = render_refs.empty() ? registry.list_levels() : render_refs;
    for (const auto& ref : refs) {
      const auto& level = registry.get(ref);
      out << write_slideshow(load_hint_deck(level.hint_deck_path, ref), render_out).string() << "\n";
    }
    return kOk;
  });
  render->add_option("levels", render_refs, "Levels to render (default: all)");
  render->add_option("--out", render_out, "Site root");
  render->add_option("--levels-dir", render_levels, "Levels directory");

  auto* config = group(app, "config", "Client settings");
  std::string config_key, config_value;
  auto* config_set = verb(*config, "set", "Set addr, project or output", action, [&] {
    if (config_key == "addr" || config_key == "api_address") {
      (void)emucloud::parse_address(config_value);
      s.cfg.api_address = config_value;
    } else if (config_key == "project") {
      s.cfg.project = config_value;
    } else if (config_key == "output") {
      if (config_value != "text" && config_value != "json") throw UsageError("output must be text or json");
      s.cfg.output = config_value;
    } else {
      throw UsageError("unknown config key '" + config_key + "' (addr, project, output)");
    }
    s.save();
    return kOk;
  });
  config_set->add_option("key", config_key)->required();
  config_set->add_option("value", config_value)->required();
  verb(*config, "show", "Print settings", action, [&] {
    out << "addr: " << s.address() << "\nproject: " << s.cfg.project << "\noutput: " << s.cfg.output
        << "\ntoken: " << (s.cfg.token.empty() ? "(none)" : "(set)") << "\nfile: " << s.config_path().string()
        << "\n";
    return kOk;
  });

  // ---- auth
  auto* auth = group(app, "auth", "Credentials");
  std::string key_path_arg, token_arg, audience;
  verb(*auth, "activate-key", "Exchange a service-account key file for an access token", action, [&] {
    json key = json::parse(read_text(key_path_arg), nullptr, false);
    if (key.is_discarded() || !key.is_object() || !key.contains("client_email") || !key.contains("private_key")) {
      throw UsageError(key_path_arg + " is not a service-account key file");
    }
    auto r = s.call("POST", "/iam/v1/token",
                    json{{"client_email", key["client_email"]}, {"private_key", key["private_key"]}}.dump(), {},
                    false);
    const json j = json::parse(r.body);
    s.cfg.token = j["access_token"].get<std::string>();
    if (key.contains("project_id") && key["project_id"].is_string()) s.cfg.project = key["project_id"];
    s.save();
    s.emit(r, [&](const json&) { out << "Activated " << key["client_email"].get<std::string>() << "\n"; });
    return kOk;
  })->add_option("file", key_path_arg)->required();
  verb(*auth, "activate-token", "Use an access token obtained elsewhere", action, [&] {
    s.cfg.token = trim(token_arg);
    s.save();
    out << "Token activated\n";
    return kOk;
  })->add_option("token", token_arg)->required();
  verb(*auth, "revoke", "Forget the active token (act anonymously)", action, [&] {
    s.cfg.token.clear();
    s.save();
    out << "Token cleared\n";
    return kOk;
  });
  verb(*auth, "print-token", "Print the active access token", action, [&] {
    if (s.cfg.token.empty()) throw UsageError("no active token");
    out << s.cfg.token << "\n";
    return kOk;
  });
  verb(*auth, "print-identity-token", "Mint an identity token for an audience URL", action, [&] {
    auto r = s.call("POST", "/iam/v1/identityToken", json{{"audience", audience}}.dump());
    s.emit(r, [&](const json& j) { out << j["token"].get<std::string>() << "\n"; });
    return kOk;
  })->add_option("--audience", audience, "Function URL")->required();

  // ---- iam
  auto* iam = group(app, "iam", "Permissions and policy");
  std::string perms_csv;
  verb(*iam, "test-permissions", "List permissions the active credential holds", action, [&] {
    std::vector<std::string> perms;
    if (perms_csv.empty()) {
      auto roles = json::parse(s.call("GET", "/iam/v1/roles").body);
      std::set<std::string> all;
      for (const auto& role : roles["roles"]) {
        for (const auto& p : role["permissions"]) all.insert(p.get<std::string>());
      }
      perms.assign(all.begin(), all.end());
    } else {
      std::stringstream ss(perms_csv);
      for (std::string p; std::getline(ss, p, ',');) {
        if (!trim(p).empty()) perms.push_back(trim(p));
      }
    }
    auto r = s.call("POST", "/iam/v1/projects/" + seg(s.project()) + "/testPermissions",
                    json{{"permissions", perms}}.dump());
    s.emit(r, [&](const json& j) {
      for (const auto& p : j["permissions"]) out << p.get<std::string>() << "\n";
    });
    return kOk;
  })->add_option("--permissions", perms_csv, "Comma-separated list (default: whole catalog)");
  verb(*iam, "get-policy", "Show the project IAM policy", action, [&] {
    auto r = s.call("GET", "/iam/v1/projects/" + seg(s.project()) + "/policy");
    s.emit(r, [&](const json& j) {
      out << "etag: " << j["etag"].get<std::string>() << "\n";
      for (const auto& b : j["bindings"]) {
        out << b["role"].get<std::string>() << ":\n";
        for (const auto& m : b["members"]) out << "  " << m.get<std::string>() << "\n";
      }
    });
    return kOk;
  });
  std::string role_arg, member_arg;
  auto* add_binding = verb(*iam, "add-binding", "Add a member to a role (read-modify-write)", action, [&] {
    const std::string path = "/iam/v1/projects/" + seg(s.project()) + "/policy";
    json policy = json::parse(s.call("GET", path).body);
    bool merged = false;
    for (auto& b : policy["bindings"]) {
      if (b["role"] == role_arg) {
        b["members"].push_back(member_arg);
        merged = true;
      }
    }
    if (!merged) policy["bindings"].push_back({{"role", role_arg}, {"members", {member_arg}}});
    auto r = s.call("PUT", path, policy.dump());
    s.emit(r, [&](const json& j) {
      out << "Added " << member_arg << " to " << role_arg << " (etag " << j["etag"].get<std::string>() << ")\n";
    });
    return kOk;
  });
  add_binding->add_option("--role", role_arg)->required();
  add_binding->add_option("--member", member_arg)->required();

  // ---- storage
  auto* buckets = group(app, "buckets", "Storage buckets");
  verb(*buckets, "list", "List the project's buckets", action, [&] {
    auto r = s.call("GET", "/storage/v1/b" + query_string({{"project", s.project()}}));
    s.emit(r, [&](const json& j) {
      for (const auto& b : j["items"]) out << b.get<std::string>() << "\n";
    });
    return kOk;
  });
  auto* objects = group(app, "objects", "Storage objects");
  std::string bucket_arg, object_arg;
  verb(*objects, "list", "List objects in a bucket", action, [&] {
    auto r = s.call("GET", "/storage/v1/b/" + seg(bucket_arg) + "/o");
    s.emit(r, [&](const json& j) {
      for (const auto& o : j["items"]) out << o.get<std::string>() << "\n";
    });
    return kOk;
  })->add_option("bucket", bucket_arg)->required();
  auto* cat = verb(*objects, "cat", "Write an object's bytes to stdout", action, [&] {
    out << s.call("GET", "/storage/v1/b/" + seg(bucket_arg) + "/o/" + seg(object_arg)).body;
    return kOk;
  });
  cat->add_option("bucket", bucket_arg)->required();
  cat->add_option("object", object_arg)->required();

  // ---- compute
  auto* instances = group(app, "instances", "Compute instances");
  std::string instance_arg, ssh_user = "player", ssh_key_file, http_path = "/";
  std::vector<std::string> header_args, param_args;
  verb(*instances, "list", "List instances with metadata", action, [&] {
    auto r = s.call("GET", "/compute/v1/projects/" + seg(s.project()) + "/instances");
    s.emit(r, [&](const json& j) {
      for (const auto& i : j["items"]) {
        out << i["name"].get<std::string>() << "\n  zone: " << i["zone"].get<std::string>()
            << "\n  service_account: " << i["service_account"].get<std::string>() << "\n";
        if (i.contains("container_image")) {
          out << "  container_image: " << i["container_image"].get<std::string>()
              << "\n  http_url: " << i["http_url"].get<std::string>() << "\n";
        }
        for (const auto& [k, v] : i["metadata"].items()) out << "  metadata." << k << ": " << v.get<std::string>() << "\n";
      }
    });
    return kOk;
  });
  auto* add_key = verb(*instances, "add-ssh-key", "Append a public key to an instance's ssh-keys", action, [&] {
    std::string pub = trim(read_text(ssh_key_file));
    if (pub.rfind("emussh-private-", 0) == 0) pub = emucloud::ssh_public_from_private(pub);
    const std::string base = "/compute/v1/projects/" + seg(s.project()) + "/instances";
    std::string current;
    const json listing = json::parse(s.call("GET", base).body);
    for (const auto& i : listing["items"]) {
      if (i["name"] == instance_arg && i["metadata"].contains("ssh-keys")) current = i["metadata"]["ssh-keys"];
    }
    std::string value = current;
    if (!value.empty() && value.back() != '\n') value += "\n";
    value += ssh_user + ":" + pub;
    auto r = s.call("POST", base + "/" + seg(instance_arg) + "/setMetadata",
                    json{{"key", "ssh-keys"}, {"value", value}}.dump());
    s.emit(r, [&](const json&) { out << "Added key for " << ssh_user << " to " << instance_arg << "\n"; });
    return kOk;
  });
  add_key->add_option("instance", instance_arg)->required();
  add_key->add_option("--key", ssh_key_file, "Public (or private) key file")->required();
  add_key->add_option("--user", ssh_user, "Login name");
  auto* http = verb(*instances, "http", "Send a GET to an instance's web server", action, [&] {
    std::vector<std::pair<std::string, std::string>> params;
    for (const auto& p : param_args) params.push_back(split_param(p));
    httplib::Headers headers;
    for (const auto& h : header_args) headers.insert(split_header(h));
    std::string path = http_path.empty() || http_path[0] != '/' ? "/" + http_path : http_path;
    auto r = s.call("GET", "/vm/" + seg(s.project()) + "/" + seg(instance_arg) + seg(path) + query_string(params),
                    "", headers, false);
    out << r.body;
    if (!s.json_mode() && (r.body.empty() || r.body.back() != '\n')) out << "\n";
    return kOk;
  });
  http->add_option("instance", instance_arg)->required();
  http->add_option("path", http_path, "Request path");
  http->add_option("--param", param_args, "key=value query parameter");
  http->add_option("--header", header_args, "'Name: value' request header");

  verb(app, "ssh-keygen", "Create an emulator ssh key pair (<file> and <file>.pub)", action, [&] {
    auto pair = emucloud::generate_ssh_key_pair();
    write_private_file(ssh_key_file, pair.private_key + "\n");
    {
      std::ofstream pub(ssh_key_file + ".pub", std::ios::trunc);
      pub << pair.public_key << "\n";
    }
    out << "Wrote " << ssh_key_file << " and " << ssh_key_file << ".pub\n";
    return kOk;
  })->add_option("file", ssh_key_file)->required();

  std::vector<std::string> exec_args;
  auto* ssh = verb(app, "ssh", "Open a session on an instance and run one command", action, [&] {
    json body = {{"private_key", trim(read_text(ssh_key_file))}};
    if (exec_args.size() == 1) {
      // Accept the quoted form too: --exec "cat /etc/motd".
      const auto space = exec_args[0].find(' ');
      if (space != std::string::npos) exec_args = {exec_args[0].substr(0, space), trim(exec_args[0].substr(space + 1))};
    }
    if (!exec_args.empty()) {
      body["command"] = exec_args[0];
      if (exec_args.size() > 1) body["path"] = exec_args[1];
    }
    json headers = json::object();
    for (const auto& h : header_args) {
      auto [k, v] = split_header(h);
      headers[k] = v;
    }
    if (!headers.empty()) body["headers"] = headers;
    auto r = s.call("POST", "/compute/v1/projects/" + seg(s.project()) + "/instances/" + seg(instance_arg) + "/ssh",
                    body.dump());
    s.emit(r, [&](const json& j) {
      const std::string output = j["output"].get<std::string>();
      out << output;
      const std::string command = body.value("command", "");
      const bool raw = command == "cat" || command == "ls";
      if (!raw && (output.empty() || output.back() != '\n')) out << "\n";
    });
    return kOk;
  });
  ssh->add_option("instance", instance_arg)->required();
  ssh->add_option("--key", ssh_key_file, "Private key file")->required();
  ssh->add_option("--exec", exec_args, "whoami | token | ls | cat <path> | metadata <path>")->expected(1, 2);
  ssh->add_option("--header", header_args, "'Name: value' header for metadata requests");

  // ---- functions
  auto* functions = group(app, "functions", "Serverless functions");
  std::string fn_name, id_token, source_file;
  bool fn_auth = false;
  const auto fn_base = [&] { return "/functions/v1/projects/" + seg(s.project()) + "/functions"; };
  verb(*functions, "list", "List functions with their settings", action, [&] {
    auto r = s.call("GET", fn_base());
    s.emit(r, [&](const json& j) {
      for (const auto& f : j["items"]) {
        out << f["name"].get<std::string>() << "\n  url: " << f["url"].get<std::string>()
            << "\n  require_auth: " << (f["require_auth"].get<bool>() ? "true" : "false")
            << "\n  runtime_account: " << f["runtime_account"].get<std::string>() << "\n";
        for (const auto& [k, v] : f["env"].items()) out << "  env." << k << ": " << v.get<std::string>() << "\n";
      }
    });
    return kOk;
  });
  verb(*functions, "source", "Download a function's source", action, [&] {
    auto r = s.call("GET", fn_base() + "/" + seg(fn_name) + "/source");
    s.emit(r, [&](const json& j) { out << j["source"].get<std::string>(); });
    return kOk;
  })->add_option("name", fn_name)->required();
  auto* deploy = verb(*functions, "deploy", "Replace a function's source", action, [&] {
    const std::string source = read_text(source_file);
    auto r = s.call("PUT", fn_base() + "/" + seg(fn_name) + "/source", json{{"source", source}}.dump());
    s.emit(r, [&](const json&) { out << "Updated " << fn_name << "\n"; });
    return kOk;
  });
  deploy->add_option("name", fn_name)->required();
  deploy->add_option("--source", source_file, "Handler script file")->required();
  auto* call = verb(*functions, "call", "Invoke a function by URL", action, [&] {
    json params = json::object();
    for (const auto& p : param_args) {
      auto [k, v] = split_param(p);
      params[k] = v;
    }
    std::string token = id_token;
    if (fn_auth && token.empty()) {
      std::string url = "http://" + s.address() + "/fn/" + s.project() + "/" + fn_name;
      try {
        const json listing = json::parse(s.call("GET", fn_base()).body);
        for (const auto& f : listing["items"]) {
          if (f["name"] == fn_name) url = f["url"];
        }
      } catch (const ApiFailure&) {
        // Callers often may invoke a function without being allowed to list them.
      }
      token = json::parse(s.call("POST", "/iam/v1/identityToken", json{{"audience", url}}.dump()).body)["token"];
    }
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto r = s.call("POST", "/fn/" + seg(s.project()) + "/" + seg(fn_name), params.dump(), headers, false);
    out << r.body;
    if (!s.json_mode() && (r.body.empty() || r.body.back() != '\n')) out << "\n";
    return kOk;
  });
  call->add_option("name", fn_name)->required();
  call->add_option("--param", param_args, "key=value request field");
  call->add_option("--id-token", id_token, "Identity token to present");
  call->add_flag("--auth", fn_auth, "Mint an identity token for the function URL first");

  // ---- logging
  auto* logs = group(app, "logs", "Log entries");
  std::string logger;
  verb(*logs, "read", "Read the project's log entries", action, [&] {
    std::vector<std::pair<std::string, std::string>> q;
    if (!logger.empty()) q.emplace_back("logger", logger);
    auto r = s.call("GET", "/logging/v1/projects/" + seg(s.project()) + "/entries" + query_string(q));
    s.emit(r, [&](const json& j) {
      for (const auto& e : j["entries"]) {
        out << e["timestamp"].get<std::int64_t>() << " " << e["severity"].get<std::string>() << " "
            << e["logger"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
      }
    });
    return kOk;
  })->add_option("--logger", logger, "Only entries from this logger");

  // ---- source repositories
  auto* repo = group(app, "repo", "Source repositories");
  std::string repo_name, commit_arg, path_arg;
  const auto repo_base = [&] { return "/repos/v1/projects/" + seg(s.project()) + "/repos"; };
  verb(*repo, "list", "List repositories", action, [&] {
    auto r = s.call("GET", repo_base());
    s.emit(r, [&](const json& j) {
      for (const auto& n : j["items"]) out << n.get<std::string>() << "\n";
    });
    return kOk;
  });
  verb(*repo, "log", "Commit history, newest first", action, [&] {
    auto r = s.call("GET", repo_base() + "/" + seg(repo_name) + "/commits");
    s.emit(r, [&](const json& j) {
      for (const auto& c : j["commits"]) {
        out << "commit " << c["commit_id"].get<std::string>() << "\n    " << c["message"].get<std::string>()
            << "\n    files:";
        for (const auto& f : c["files"]) out << " " << f.get<std::string>();
        out << "\n";
      }
    });
    return kOk;
  })->add_option("repo", repo_name)->required();
  auto* show = verb(*repo, "show", "Write a file at a commit to stdout", action, [&] {
    out << s.call("GET", repo_base() + "/" + seg(repo_name) + "/commits/" + seg(commit_arg) + "/files/" +
                             seg(path_arg))
               .body;
    return kOk;
  });
  show->add_option("repo", repo_name)->required();
  show->add_option("commit", commit_arg, "Commit id or HEAD")->required();
  show->add_option("path", path_arg)->required();

  // ---- container registry
  auto* images = group(app, "images", "Container images");
  std::string image_arg, image_out, image_cat;
  verb(*images, "list", "List the project's images", action, [&] {
    auto r = s.call("GET", "/registry/v1/projects/" + seg(s.project()) + "/images");
    s.emit(r, [&](const json& j) {
      for (const auto& n : j["items"]) out << n.get<std::string>() << "\n";
    });
    return kOk;
  });
  auto* pull = verb(*images, "pull", "Download an image archive", action, [&] {
    std::string path = image_arg.find('/') == std::string::npos ? s.project() + "/" + image_arg : image_arg;
    auto r = s.call("GET", "/registry/v1/images/" + seg(path) + "/archive");
    if (!image_out.empty()) {
      std::ofstream f(image_out, std::ios::binary | std::ios::trunc);
      f << r.body;
    }
    if (s.json_mode()) {
      out << r.body;
      return kOk;
    }
    auto files = emucloud::unpack_archive(r.body);
    if (!image_cat.empty()) {
      auto it = files.find(image_cat);
      if (it == files.end()) throw UsageError("image has no file " + image_cat);
      out << it->second;
      return kOk;
    }
    for (const auto& [p, data] : files) out << p << " (" << data.size() << " bytes)\n";
    return kOk;
  });
  pull->add_option("image", image_arg, "[project/]name:tag")->required();
  pull->add_option("--out", image_out, "Save the archive here");
  pull->add_option("--cat", image_cat, "Print one file from the image");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    s.load();
    return action ? action() : kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConnectError& e) {
    err << "error: " << e.what() << "\n";
    return kConnectivity;
  } catch (const ApiFailure& e) {
    err << "error: " << e.code << ": " << e.what() << "\n";
    return kApiError;
  } catch (const emucloud::Error& e) {
    err << "error: " << emucloud::code_name(e.code()) << ": " << e.what() << "\n";
    return kApiError;
  } catch (const json::exception& e) {
    err << "error: unexpected response: " << e.what() << "\n";
    return kApiError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace thunder::cli
