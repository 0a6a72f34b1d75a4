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

#ifndef THUNDER_CTF_SERVICE_HPP_
#define THUNDER_CTF_SERVICE_HPP_

#include <map>
#include <mutex>
#include <string>

#include "emucloud/api.hpp"
#include "thunder/deploy.hpp"
#include "thunder/hints.hpp"
#include "thunder/level.hpp"
#include "thunder/progress.hpp"

namespace thunder {

/// The /ctf/v1 endpoints: level lifecycle, gated hints, flag validation and
/// progress. None of them take a bearer token; they are the operator and
/// companion-site surface, not part of the emulated cloud.
///
///   GET  /ctf/v1/levels                      registered levels
///   POST /ctf/v1/levels/create               {level, project_id} -> start info
///   POST /ctf/v1/levels/destroy              tears down the active level
///   GET  /ctf/v1/levels/active               {active: null | {...}}
///   GET  /ctf/v1/hints?level=&project_id=    revealed hints only
///   POST /ctf/v1/hints/reveal                {level, project_id}
///   GET  /ctf/v1/hints.html?level=           full slideshow document
///   POST /ctf/v1/validate                    {level, project_id, flag}
///   GET  /ctf/v1/progress?project_id=
///   GET  /ctf/v1/writeup?level=
class CtfService {
 public:
  CtfService(emucloud::Emulator& emulator, const LevelRegistry& registry, DeployManager& deployer,
             ProgressLedger& ledger);

  /// Mounts handle() under /ctf/v1/ on `router`.
  void install(emucloud::Router& router);
  emucloud::ApiResponse handle(const emucloud::ApiRequest& request);

  /// Parsed deck for a registered level, cached after first use.
  const HintDeck& deck(const std::string& level);
  /// Creates the project first when it does not exist yet.
  StartInfo create(const std::string& level, const std::string& project_id);

 private:
  nlohmann::json hints_json(const std::string& level, const std::string& project_id);

  emucloud::Emulator& emu_;
  const LevelRegistry& registry_;
  DeployManager& deployer_;
  ProgressLedger& ledger_;
  std::mutex decks_mu_;
  std::map<std::string, HintDeck> decks_;
};

}  // namespace thunder

#endif  // THUNDER_CTF_SERVICE_HPP_
