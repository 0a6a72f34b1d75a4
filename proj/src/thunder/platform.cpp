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

#include "thunder/platform.hpp"

#include <cstdlib>

#ifndef THUNDER_DEFAULT_DATA_DIR
#define THUNDER_DEFAULT_DATA_DIR "."
#endif

namespace thunder {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("THUNDER_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return THUNDER_DEFAULT_DATA_DIR;
}

Platform::Platform(PlatformOptions options) {
  const auto data = default_data_dir();
  if (options.levels_dir.empty()) options.levels_dir = data / "levels";
  if (options.roles_file.empty()) options.roles_file = data / "data" / "roles.yaml";
  registry_.load_directory(options.levels_dir);
  emulator_ = std::make_unique<emucloud::Emulator>(emucloud::RoleCatalog::load_yaml_file(options.roles_file),
                                                   options.clock, options.emulator);
  for (const auto& p : options.projects) {
    if (!emulator_->has_project(p)) emulator_->create_project(p, p);
  }
  router_ = std::make_unique<emucloud::Router>(*emulator_);
  deployer_ = std::make_unique<DeployManager>(*emulator_);
  ledger_ = std::make_unique<ProgressLedger>(options.ledger_file);
  ctf_ = std::make_unique<CtfService>(*emulator_, registry_, *deployer_, *ledger_);
  ctf_->install(*router_);
}

}  // namespace thunder
