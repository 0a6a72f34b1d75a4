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

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "thunder/cli.hpp"

int main(int argc, char** argv) {
  std::map<std::string, std::string> env;
  for (const char* key : {"HOME", "THUNDER_HOME", "EMUCLOUD_ADDR"}) {
    if (const char* v = std::getenv(key)) env[key] = v;
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  return thunder::cli::run(args, std::cout, std::cerr, env);
}
