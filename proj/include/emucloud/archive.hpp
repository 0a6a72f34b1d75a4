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

#ifndef EMUCLOUD_ARCHIVE_HPP_
#define EMUCLOUD_ARCHIVE_HPP_

#include <map>
#include <string>
#include <string_view>

namespace emucloud {

/// Image archive stream: for each file in path order,
///   [u32 path_len][path utf-8][u64 data_len][data]
/// little-endian, no padding, no trailer.
std::string pack_archive(const std::map<std::string, std::string>& files);

/// Inverse of pack_archive. Throws Error(kBadRequest) on truncated input or
/// duplicate paths.
std::map<std::string, std::string> unpack_archive(std::string_view bytes);

}  // namespace emucloud

#endif  // EMUCLOUD_ARCHIVE_HPP_
