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

#include "emucloud/archive.hpp"

#include <cstdint>

#include "emucloud/error.hpp"

namespace emucloud {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::string_view& in) {
  if (in.size() < sizeof(T)) throw Error(ErrorCode::kBadRequest, "truncated archive");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  in.remove_prefix(sizeof(T));
  return value;
}

std::string_view take(std::string_view& in, std::uint64_t n) {
  if (in.size() < n) throw Error(ErrorCode::kBadRequest, "truncated archive");
  auto out = in.substr(0, n);
  in.remove_prefix(n);
  return out;
}

}  // namespace

std::string pack_archive(const std::map<std::string, std::string>& files) {
  std::string out;
  for (const auto& [path, data] : files) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.size()));
    out += path;
    put_le<std::uint64_t>(out, data.size());
    out += data;
  }
  return out;
}

std::map<std::string, std::string> unpack_archive(std::string_view bytes) {
  std::map<std::string, std::string> files;
  while (!bytes.empty()) {
    const auto path_len = get_le<std::uint32_t>(bytes);
    std::string path(take(bytes, path_len));
    const auto data_len = get_le<std::uint64_t>(bytes);
    std::string data(take(bytes, data_len));
    if (!files.emplace(std::move(path), std::move(data)).second) {
      throw Error(ErrorCode::kBadRequest, "duplicate path in archive");
    }
  }
  return files;
}

}  // namespace emucloud
