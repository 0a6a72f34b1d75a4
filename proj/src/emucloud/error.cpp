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

#include "emucloud/error.hpp"

#include <array>
#include <utility>

namespace emucloud {
namespace {

struct CodeInfo {
  ErrorCode code;
  int status;
  std::string_view name;
};

constexpr std::array kCodes = {
    CodeInfo{ErrorCode::kBadRequest, 400, "bad_request"},
    CodeInfo{ErrorCode::kMalformedProjectId, 400, "malformed_project_id"},
    CodeInfo{ErrorCode::kDuplicateProject, 409, "duplicate_project"},
    CodeInfo{ErrorCode::kUnknownProject, 404, "unknown_project"},
    CodeInfo{ErrorCode::kAlreadyExists, 409, "already_exists"},
    CodeInfo{ErrorCode::kInvalidCredentials, 401, "invalid_credentials"},
    CodeInfo{ErrorCode::kInvalidToken, 401, "invalid_token"},
    CodeInfo{ErrorCode::kUnauthenticated, 401, "unauthenticated"},
    CodeInfo{ErrorCode::kMissingAudience, 400, "missing_audience"},
    CodeInfo{ErrorCode::kPermissionDenied, 403, "permission_denied"},
    CodeInfo{ErrorCode::kStaleEtag, 409, "stale_etag"},
    CodeInfo{ErrorCode::kUnknownRole, 400, "unknown_role"},
    CodeInfo{ErrorCode::kNotFound, 404, "not_found"},
    CodeInfo{ErrorCode::kUnknownInstance, 404, "unknown_instance"},
    CodeInfo{ErrorCode::kKeyRejected, 403, "key_rejected"},
    CodeInfo{ErrorCode::kMissingHeader, 403, "missing_header"},
    CodeInfo{ErrorCode::kUnknownPath, 404, "unknown_path"},
    CodeInfo{ErrorCode::kAuthRequired, 401, "auth_required"},
    CodeInfo{ErrorCode::kParseError, 400, "parse_error"},
    CodeInfo{ErrorCode::kHandlerError, 400, "handler_error"},
    CodeInfo{ErrorCode::kLimitExceeded, 400, "limit_exceeded"},
    CodeInfo{ErrorCode::kUnknownCommit, 404, "unknown_commit"},
    CodeInfo{ErrorCode::kPathNotInCommit, 404, "path_not_in_commit"},
    CodeInfo{ErrorCode::kUnknownImage, 404, "unknown_image"},
    CodeInfo{ErrorCode::kRouteNotFound, 404, "route_not_found"},
    CodeInfo{ErrorCode::kUnknownPlaceholder, 400, "unknown_placeholder"},
    CodeInfo{ErrorCode::kYamlParseError, 400, "yaml_parse_error"},
    CodeInfo{ErrorCode::kValidationError, 400, "validation_error"},
    CodeInfo{ErrorCode::kActiveDeploymentExists, 409, "active_deployment_exists"},
    CodeInfo{ErrorCode::kResourceCreateError, 409, "resource_create_error"},
    CodeInfo{ErrorCode::kNotActive, 409, "not_active"},
    CodeInfo{ErrorCode::kDeploymentInProgress, 409, "deployment_in_progress"},
    CodeInfo{ErrorCode::kUnknownLevel, 404, "unknown_level"},
    CodeInfo{ErrorCode::kDuplicateLevel, 409, "duplicate_level"},
    CodeInfo{ErrorCode::kUnknownResource, 404, "unknown_resource"},
    CodeInfo{ErrorCode::kHelperError, 400, "helper_error"},
    CodeInfo{ErrorCode::kHintParseError, 400, "hint_parse_error"},
    CodeInfo{ErrorCode::kAlreadyAtEnd, 409, "already_at_end"},
};

const CodeInfo& info(ErrorCode code) {
  for (const auto& c : kCodes) {
    if (c.code == code) return c;
  }
  return kCodes.front();
}

}  // namespace

int http_status(ErrorCode code) { return info(code).status; }

std::string_view code_name(ErrorCode code) { return info(code).name; }

std::optional<ErrorCode> code_from_name(std::string_view name) {
  for (const auto& c : kCodes) {
    if (c.name == name) return c.code;
  }
  return std::nullopt;
}

}  // namespace emucloud
