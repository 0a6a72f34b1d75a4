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

#ifndef EMUCLOUD_HANDLER_DSL_HPP_
#define EMUCLOUD_HANDLER_DSL_HPP_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emucloud/error.hpp"
#include "emucloud/resources.hpp"

namespace emucloud {

// Handler scripts back both cloud functions and container web servers. The
// language has no loops or user-defined calls, so every script terminates;
// the runtime additionally caps executed statements and outbound requests.
//
//   script    = { statement } ;
//   statement = if_stmt | action [ ";" ] ;
//   if_stmt   = "if" expr block [ "else" ( block | if_stmt ) ] ;
//   block     = "{" { statement } "}" ;
//   action    = ( "respond" | "error" | "log" ) "(" expr ")" ;
//   expr      = concat [ "==" concat ] ;
//   concat    = primary { "+" primary } ;
//   primary   = string | call | "(" expr ")" ;
//   call      = ( "env" | "param" | "header" | "metadata" ) "(" expr ")"
//             | "path" "(" ")"
//             | "fetch" "(" expr "," expr ")" ;
//   string    = '"' { char | "\\" ( '"' | "\\" | "n" | "t" ) } '"' ;
//
// `#` starts a comment running to end of line. `==` yields a boolean, which
// is only accepted as an `if` condition; every other expression is a string.
//
// Blocks nest at most kMaxNesting deep (an else-if counts as one level
// deeper than its `if`). Expressions nest at most kMaxNesting deep, where a
// statement's argument is level 1 and each parenthesis or call argument adds
// one.

inline constexpr int kMaxStatements = 1000;
inline constexpr int kMaxFetches = 4;
inline constexpr int kMaxNesting = 64;

class HandlerParseError : public Error {
 public:
  HandlerParseError(int line, int column, const std::string& what)
      : Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace dsl {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { kString, kEnv, kParam, kHeader, kMetadata, kPath, kFetch, kConcat, kEquals };
  Kind kind = Kind::kString;
  std::string literal;
  std::vector<ExprPtr> args;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind { kIf, kRespond, kError, kLog };
  Kind kind = Kind::kRespond;
  ExprPtr expr;
  std::vector<StmtPtr> then_branch;
  std::vector<StmtPtr> else_branch;
};

}  // namespace dsl

class HandlerScript {
 public:
  /// Throws HandlerParseError.
  static HandlerScript parse(std::string_view source);

  const std::vector<dsl::StmtPtr>& statements() const { return *body_; }

 private:
  std::shared_ptr<std::vector<dsl::StmtPtr>> body_;
};

/// Header names compare case-insensitively.
struct HeaderLess {
  bool operator()(const std::string& a, const std::string& b) const;
};
using HeaderMap = std::map<std::string, std::string, HeaderLess>;

struct HandlerRequest {
  std::string method = "GET";
  std::string path = "/";
  std::map<std::string, std::string> params;
  HeaderMap headers;
};

struct HandlerOutcome {
  enum class Kind { kResponded, kRaised, kCompleted };
  Kind kind = Kind::kCompleted;
  std::string body;
};

/// What a script may touch outside itself. Implementations throw Error to
/// abort evaluation.
class HandlerHost {
 public:
  virtual ~HandlerHost() = default;
  virtual std::string fetch(const std::string& url, const HeaderMap& headers) = 0;
  virtual std::string metadata(const std::string& path) = 0;
  virtual void log(Severity severity, const std::string& message) = 0;
};

/// Parses a `fetch` header block: `Name: value` lines separated by newlines.
HeaderMap parse_header_block(std::string_view block);

/// Runs a parsed script. `error(e)` logs `e` at ERROR and ends the run with
/// kRaised; `respond(e)` ends it with kResponded. Throws Error(kLimitExceeded)
/// once more than kMaxStatements statements or kMaxFetches outbound requests
/// would run.
HandlerOutcome handler_eval(const HandlerScript& script, const HandlerRequest& request,
                            const std::map<std::string, std::string>& env, HandlerHost& host);

}  // namespace emucloud

#endif  // EMUCLOUD_HANDLER_DSL_HPP_
