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

#ifndef EMUCLOUD_SERVER_HPP_
#define EMUCLOUD_SERVER_HPP_

#include <memory>
#include <string>
#include <thread>

#include "emucloud/api.hpp"

namespace emucloud {

/// Binds a Router to a TCP listener. All methods and paths are forwarded.
class HttpServer {
 public:
  explicit HttpServer(const Router& router);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port or
  /// -1 on failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void serve();
  /// serve() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

/// Splits "host:port"; throws Error(kBadRequest) if malformed.
std::pair<std::string, int> parse_address(const std::string& address);

}  // namespace emucloud

#endif  // EMUCLOUD_SERVER_HPP_
