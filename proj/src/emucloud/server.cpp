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

#include "emucloud/server.hpp"

#include <httplib.h>

namespace emucloud {

struct HttpServer::Impl {
  const Router& router;
  httplib::Server server;

  explicit Impl(const Router& r) : router(r) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest api;
      api.method = req.method;
      api.path = req.path;
      api.body = req.body;
      for (const auto& [k, v] : req.headers) api.headers[k] = v;
      for (const auto& [k, v] : req.params) api.query[k] = v;
      auto out = router.route(api);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    server.Patch(".*", handler);
  }
};

HttpServer::HttpServer(const Router& router) : impl_(std::make_unique<Impl>(router)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::pair<std::string, int> parse_address(const std::string& address) {
  std::string a = address;
  if (a.rfind("http://", 0) == 0) a = a.substr(7);
  while (!a.empty() && a.back() == '/') a.pop_back();
  const auto colon = a.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kBadRequest, "address must be host:port, got '" + address + "'");
  }
  try {
    std::size_t used = 0;
    const int port = std::stoi(a.substr(colon + 1), &used);
    if (used != a.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("port");
    return {a.substr(0, colon), port};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kBadRequest, "bad port in address '" + address + "'");
  }
}

}  // namespace emucloud
