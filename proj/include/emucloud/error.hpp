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

#ifndef EMUCLOUD_ERROR_HPP_
#define EMUCLOUD_ERROR_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emucloud {

/// Every failure the emulator and the level framework can report. Each code
/// has a fixed HTTP status and a stable machine-readable name used in
/// `{"error":{"code":...}}` bodies and by the CLI.
enum class ErrorCode {
  kBadRequest,
  kMalformedProjectId,
  kDuplicateProject,
  kUnknownProject,
  kAlreadyExists,
  kInvalidCredentials,
  kInvalidToken,
  kUnauthenticated,
  kMissingAudience,
  kPermissionDenied,
  kStaleEtag,
  kUnknownRole,
  kNotFound,
  kUnknownInstance,
  kKeyRejected,
  kMissingHeader,
  kUnknownPath,
  kAuthRequired,
  kParseError,
  kHandlerError,
  kLimitExceeded,
  kUnknownCommit,
  kPathNotInCommit,
  kUnknownImage,
  kRouteNotFound,
  kUnknownPlaceholder,
  kYamlParseError,
  kValidationError,
  kActiveDeploymentExists,
  kResourceCreateError,
  kNotActive,
  kDeploymentInProgress,
  kUnknownLevel,
  kDuplicateLevel,
  kUnknownResource,
  kHelperError,
  kHintParseError,
  kAlreadyAtEnd,
};

int http_status(ErrorCode code);
std::string_view code_name(ErrorCode code);
std::optional<ErrorCode> code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int status() const { return http_status(code_); }

 private:
  ErrorCode code_;
};

}  // namespace emucloud

#endif  // EMUCLOUD_ERROR_HPP_
