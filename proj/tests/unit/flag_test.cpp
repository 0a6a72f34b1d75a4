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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "emucloud/crypto.hpp"
#include "sha256_oracle.hpp"
#include "thunder/level.hpp"

namespace {

TEST(OracleSha256, KnownVectors) {
  // FIPS 180-4 examples; these pin the oracle itself.
  EXPECT_EQ(oracle::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(oracle::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(oracle::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Sha256, MatchesOracleAcrossBlockBoundaries) {
  std::mt19937 rng(7);
  for (std::size_t len = 0; len < 200; ++len) {
    std::string data(len, '\0');
    for (auto& c : data) c = static_cast<char>(rng());
    ASSERT_EQ(emucloud::sha256_hex(data), oracle::sha256_hex(data)) << "length " << len;
  }
}

TEST(GenerateFlag, ReferenceValue) {
  EXPECT_EQ(thunder::generate_flag("a1openbucket-seed-v1", "proj-a"), "CTF{afe22d2854086fa9}");
  EXPECT_EQ(thunder::generate_flag("a1openbucket-seed-v1", "proj-a"),
            oracle::expected_flag("a1openbucket-seed-v1", "proj-a"));
}

TEST(GenerateFlag, DeterministicAndPolymorphic) {
  const auto a = thunder::generate_flag("a1openbucket-seed-v1", "proj-a");
  EXPECT_EQ(a, thunder::generate_flag("a1openbucket-seed-v1", "proj-a"));
  EXPECT_NE(a, thunder::generate_flag("a1openbucket-seed-v1", "proj-b"));
}

TEST(GenerateFlag, HundredRandomPairsMatchOracle) {
  std::mt19937_64 rng(20260419);
  std::uniform_int_distribution<int> len(1, 40);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-";
  auto random_string = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
  };
  std::set<std::string> flags;
  const std::string seed = random_string(12);
  for (int i = 0; i < 100; ++i) {
    const auto any_seed = random_string(len(rng));
    const auto project = "p" + random_string(len(rng) % 25 + 5);
    const auto flag = thunder::generate_flag(any_seed, project);
    EXPECT_EQ(flag, oracle::expected_flag(any_seed, project));
    EXPECT_EQ(flag.size(), 21u);
    flags.insert(thunder::generate_flag(seed, "proj-" + std::to_string(i)));
  }
  EXPECT_EQ(flags.size(), 100u);
}

TEST(ConstantTimeEqual, ExactMatchOnly) {
  EXPECT_TRUE(emucloud::constant_time_equal("CTF{x}", "CTF{x}"));
  EXPECT_FALSE(emucloud::constant_time_equal("CTF{x}", "CTF{x} "));
  EXPECT_FALSE(emucloud::constant_time_equal("CTF{x}", "CTF{y}"));
  EXPECT_FALSE(emucloud::constant_time_equal("", "a"));
}

TEST(Crypto, Base64RoundTrip) {
  for (std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"}) {
    EXPECT_EQ(emucloud::base64_decode(emucloud::base64_encode(s)), s);
  }
  EXPECT_EQ(emucloud::base64_encode("foobar"), "Zm9vYmFy");
}

TEST(Crypto, SshPairsAreDigestLinked) {
  auto kp = emucloud::generate_ssh_key_pair();
  EXPECT_EQ(emucloud::ssh_public_from_private(kp.private_key), kp.public_key);
  EXPECT_NE(kp.private_key, emucloud::generate_ssh_key_pair().private_key);
}

TEST(Crypto, RandomHexLength) {
  EXPECT_EQ(emucloud::random_hex(16).size(), 32u);
  EXPECT_NE(emucloud::random_hex(16), emucloud::random_hex(16));
}

}  // namespace
