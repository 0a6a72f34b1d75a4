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

#ifndef THUNDER_PLATFORM_HPP_
#define THUNDER_PLATFORM_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "emucloud/api.hpp"
#include "emucloud/clock.hpp"
#include "emucloud/emulator.hpp"
#include "thunder/ctf_service.hpp"
#include "thunder/deploy.hpp"
#include "thunder/level.hpp"
#include "thunder/progress.hpp"

namespace thunder {

/// Root holding `levels/` and `data/roles.yaml`. `THUNDER_DATA_DIR` in the
/// environment wins over the build-time default.
std::filesystem::path default_data_dir();

struct PlatformOptions {
  std::filesystem::path levels_dir;  // empty: <data dir>/levels
  std::filesystem::path roles_file;  // empty: <data dir>/data/roles.yaml
  std::filesystem::path ledger_file;  // empty: in-memory ledger
  std::vector<std::string> projects;  // created at startup
  emucloud::EmulatorOptions emulator;
  std::shared_ptr<emucloud::Clock> clock;  // null: system clock
};

/// Everything `thunder serve` runs: emulator, router, deployment manager,
/// level registry and the /ctf/v1 service, wired together.
class Platform {
 public:
  explicit Platform(PlatformOptions options);
  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  emucloud::Emulator& emulator() { return *emulator_; }
  emucloud::Router& router() { return *router_; }
  DeployManager& deployer() { return *deployer_; }
  const LevelRegistry& registry() const { return registry_; }
  ProgressLedger& ledger() { return *ledger_; }
  CtfService& ctf() { return *ctf_; }

 private:
  LevelRegistry registry_;
  std::unique_ptr<emucloud::Emulator> emulator_;
  std::unique_ptr<emucloud::Router> router_;
  std::unique_ptr<DeployManager> deployer_;
  std::unique_ptr<ProgressLedger> ledger_;
  std::unique_ptr<CtfService> ctf_;
};

}  // namespace thunder

#endif  // THUNDER_PLATFORM_HPP_
