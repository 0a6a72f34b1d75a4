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

#ifndef THUNDER_YAML_JSON_HPP_
#define THUNDER_YAML_JSON_HPP_

#include <string>

#include <json.hpp>

namespace thunder {

/// Parses YAML text into JSON. Plain scalars that read as booleans or
/// integers become JSON booleans/numbers; quoted scalars stay strings.
/// Throws Error(kYamlParseError).
nlohmann::json parse_yaml(const std::string& text);

}  // namespace thunder

#endif  // THUNDER_YAML_JSON_HPP_
