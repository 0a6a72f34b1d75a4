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

#include "thunder/ctf_service.hpp"

namespace thunder {

using emucloud::ApiRequest;
using emucloud::ApiResponse;
using emucloud::Error;
using emucloud::ErrorCode;
using nlohmann::json;

namespace {

constexpr const char* kPrefix = "/ctf/v1/";

json body_object(const ApiRequest& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kBadRequest, "body must be a JSON object");
  return j;
}

std::string required(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string() || body[key].get<std::string>().empty()) {
    throw Error(ErrorCode::kBadRequest, std::string("missing field '") + key + "'");
  }
  return body[key].get<std::string>();
}

std::string required_query(const ApiRequest& req, const char* key) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) {
    throw Error(ErrorCode::kBadRequest, std::string("missing query parameter '") + key + "'");
  }
  return it->second;
}

}  // namespace

CtfService::CtfService(emucloud::Emulator& emulator, const LevelRegistry& registry, DeployManager& deployer,
                       ProgressLedger& ledger)
    : emu_(emulator), registry_(registry), deployer_(deployer), ledger_(ledger) {}

void CtfService::install(emucloud::Router& router) {
  router.mount(kPrefix, [this](const ApiRequest& req) { return handle(req); });
}

const HintDeck& CtfService::deck(const std::string& level) {
  const LevelModule& module = registry_.get(level);
  std::lock_guard lock(decks_mu_);
  auto it = decks_.find(level);
  if (it == decks_.end()) it = decks_.emplace(level, load_hint_deck(module.hint_deck_path, level)).first;
  return it->second;
}

StartInfo CtfService::create(const std::string& level, const std::string& project_id) {
  (void)registry_.get(level);
  if (!emu_.has_project(project_id)) emu_.create_project(project_id, project_id);
  return create_level(registry_, deployer_, emu_, level, project_id);
}

json CtfService::hints_json(const std::string& level, const std::string& project_id) {
  const HintDeck& d = deck(level);
  const auto revealed = ledger_.get(project_id, level).revealed;
  json hints = json::array();
  for (std::size_t i = 0; i < revealed && i < d.hints.size(); ++i) {
    hints.push_back({{"index", i + 1},
                     {"title", d.hints[i].title},
                     {"body", d.hints[i].body},
                     {"html", render_body_html(d.hints[i].body)}});
  }
  return {{"level", level}, {"project_id", project_id}, {"total", d.hints.size()},
          {"revealed", hints.size()}, {"hints", hints}};
}

ApiResponse CtfService::handle(const ApiRequest& req) {
  const std::string route = req.path.substr(std::string(kPrefix).size());
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";

  if (get && route == "levels") {
    json levels = json::array();
    for (const auto& ref : registry_.list_levels()) {
      const auto& m = registry_.get(ref);
      levels.push_back({{"level", ref}, {"namespace", m.namespace_name}, {"name", m.name}});
    }
    return emucloud::json_response({{"levels", levels}});
  }
  if (post && route == "levels/create") {
    const json body = body_object(req);
    const auto level = required(body, "level");
    const auto info = create(level, required(body, "project_id"));
    json key = info.handout_key.empty() ? json(nullptr) : json::parse(info.handout_key);
    return emucloud::json_response({{"level", info.level},
                                    {"project_id", info.project_id},
                                    {"handout_key", key},
                                    {"intro", info.intro},
                                    {"hints_url", emu_.options().api_base + "/ctf/v1/hints.html?level=" +
                                                      emucloud::url_encode(level)}});
  }
  if (post && route == "levels/destroy") {
    auto active = deployer_.active();
    deployer_.destroy();
    return emucloud::json_response({{"destroyed", active ? active->level_name : ""}});
  }
  if (get && route == "levels/active") {
    auto active = deployer_.active();
    if (!active) return emucloud::json_response({{"active", nullptr}});
    json resources = json::array();
    for (const auto& r : active->created) resources.push_back({{"name", r.name}, {"type", r.type}});
    return emucloud::json_response({{"active",
                                     {{"level", active->level_name},
                                      {"project_id", active->context.project_id},
                                      {"nonce", active->context.nonce},
                                      {"resources", resources}}}});
  }
  if (get && route == "hints") {
    return emucloud::json_response(hints_json(required_query(req, "level"), required_query(req, "project_id")));
  }
  if (post && route == "hints/reveal") {
    const json body = body_object(req);
    const auto level = required(body, "level");
    const auto project = required(body, "project_id");
    ledger_.reveal(project, level, deck(level).hints.size());
    return emucloud::json_response(hints_json(level, project));
  }
  if (get && route == "hints.html") {
    auto html = render_slideshow(deck(required_query(req, "level")));
    return {200, "text/html; charset=utf-8", std::move(html)};
  }
  if (post && route == "validate") {
    const json body = body_object(req);
    if (!body.contains("flag") || !body["flag"].is_string()) throw Error(ErrorCode::kBadRequest, "missing field 'flag'");
    const bool ok = validate_flag(registry_, ledger_, required(body, "level"), required(body, "project_id"),
                                  body["flag"].get<std::string>(), emu_.now());
    return emucloud::json_response({{"result", ok ? "correct" : "incorrect"}});
  }
  if (get && route == "progress") {
    const auto project = required_query(req, "project_id");
    return emucloud::json_response({{"project_id", project}, {"levels", ledger_.project_json(project)}});
  }
  if (get && route == "writeup") {
    const auto level = required_query(req, "level");
    const auto& writeup = registry_.get(level).writeup;
    return emucloud::json_response({{"level", level}, {"writeup", writeup}});
  }
  throw Error(ErrorCode::kRouteNotFound, "no route for " + req.method + " " + req.path);
}

}  // namespace thunder
