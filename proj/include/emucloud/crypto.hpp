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

#ifndef EMUCLOUD_CRYPTO_HPP_
#define EMUCLOUD_CRYPTO_HPP_

#include <cstddef>
#include <string>
#include <string_view>

namespace emucloud {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// `n_bytes` of CSPRNG output, hex encoded (2 * n_bytes chars).
std::string random_hex(std::size_t n_bytes);

/// Compares in time dependent only on the lengths of the inputs.
bool constant_time_equal(std::string_view a, std::string_view b);

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

/// Emulator ssh key pairs. These are opaque strings, not real asymmetric
/// keys: the public half is a digest of the private half.
struct SshKeyPair {
  std::string private_key;
  std::string public_key;
};

SshKeyPair generate_ssh_key_pair();
std::string ssh_public_from_private(std::string_view private_key);

}  // namespace emucloud

#endif  // EMUCLOUD_CRYPTO_HPP_
