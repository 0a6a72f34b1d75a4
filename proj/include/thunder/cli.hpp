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

#ifndef THUNDER_CLI_HPP_
#define THUNDER_CLI_HPP_

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace thunder::cli {

/// Exit codes shared by every verb.
enum ExitCode : int { kOk = 0, kApiError = 1, kConnectivity = 2, kUsage = 3 };

/// Persistent client settings, stored as `config.json` in the thunder home
/// directory ($THUNDER_HOME, else ~/.thunder) with mode 0600.
struct CliConfig {
  std::string api_address;  // host:port
  std::string project;
  std::string token;
  std::string output = "text";  // text | json
};

/// Runs one invocation. `args` excludes the program name. Only `HOME`,
/// `THUNDER_HOME` and `EMUCLOUD_ADDR` are read from `env`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::map<std::string, std::string>& env);

}  // namespace thunder::cli

#endif  // THUNDER_CLI_HPP_
