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

#include "emucloud/handler_dsl.hpp"

#include <algorithm>
#include <cctype>

namespace emucloud {
namespace {

using dsl::Expr;
using dsl::ExprPtr;
using dsl::Stmt;
using dsl::StmtPtr;

enum class Tok { kIdent, kString, kLParen, kRParen, kLBrace, kRBrace, kComma, kSemi, kPlus, kEqEq, kEnd };

struct Token {
  Tok type = Tok::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

std::string describe(const Token& t) {
  switch (t.type) {
    case Tok::kIdent:
      return "'" + t.text + "'";
    case Tok::kString:
      return "string literal";
    case Tok::kEnd:
      return "end of script";
    default:
      return "'" + t.text + "'";
  }
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      tok.type = Tok::kIdent;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      advance();
      std::string value;
      bool closed = false;
      while (i < src.size()) {
        const char d = src[i];
        if (d == '"') {
          advance();
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (i + 1 >= src.size()) break;
          const char e = src[i + 1];
          switch (e) {
            case '"':
              value.push_back('"');
              break;
            case '\\':
              value.push_back('\\');
              break;
            case 'n':
              value.push_back('\n');
              break;
            case 't':
              value.push_back('\t');
              break;
            default:
              throw HandlerParseError(line, col, std::string("unknown escape '\\") + e + "'");
          }
          advance(2);
          continue;
        }
        value.push_back(d);
        advance();
      }
      if (!closed) throw HandlerParseError(tok.line, tok.column, "unterminated string literal");
      tok.type = Tok::kString;
      tok.text = std::move(value);
    } else if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
      tok.type = Tok::kEqEq;
      tok.text = "==";
      advance(2);
    } else {
      switch (c) {
        case '(':
          tok.type = Tok::kLParen;
          break;
        case ')':
          tok.type = Tok::kRParen;
          break;
        case '{':
          tok.type = Tok::kLBrace;
          break;
        case '}':
          tok.type = Tok::kRBrace;
          break;
        case ',':
          tok.type = Tok::kComma;
          break;
        case ';':
          tok.type = Tok::kSemi;
          break;
        case '+':
          tok.type = Tok::kPlus;
          break;
        default:
          throw HandlerParseError(line, col, std::string("unexpected character '") + c + "'");
      }
      tok.text = std::string(1, c);
      advance();
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.type = Tok::kEnd;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

bool is_bool(const Expr& e) { return e.kind == Expr::Kind::kEquals; }

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<StmtPtr> script() {
    std::vector<StmtPtr> body;
    while (peek().type != Tok::kEnd) body.push_back(statement(0));
    return body;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& at, const std::string& what) {
    throw HandlerParseError(at.line, at.column, what);
  }

  const Token& expect(Tok type, const char* what) {
    if (peek().type != type) fail(peek(), std::string("expected ") + what + ", found " + describe(peek()));
    return next();
  }

  // `depth` counts enclosing blocks for statements and enclosing
  // expressions (parentheses, call arguments) for expressions.
  void check_depth(int depth, const Token& at, const char* what) {
    if (depth > kMaxNesting) fail(at, std::string(what) + " nested deeper than " + std::to_string(kMaxNesting));
  }

  StmtPtr statement(int depth) {
    const Token& t = peek();
    if (t.type != Tok::kIdent) fail(t, "expected statement, found " + describe(t));
    if (t.text == "if") return if_statement(depth);
    auto stmt = std::make_unique<Stmt>();
    if (t.text == "respond") {
      stmt->kind = Stmt::Kind::kRespond;
    } else if (t.text == "error") {
      stmt->kind = Stmt::Kind::kError;
    } else if (t.text == "log") {
      stmt->kind = Stmt::Kind::kLog;
    } else {
      fail(t, "unknown statement '" + t.text + "'");
    }
    next();
    expect(Tok::kLParen, "'('");
    const Token& arg_at = peek();
    stmt->expr = expression(1);
    if (is_bool(*stmt->expr)) fail(arg_at, "'" + t.text + "' takes a string, not a comparison");
    expect(Tok::kRParen, "')'");
    if (peek().type == Tok::kSemi) next();
    return stmt;
  }

  StmtPtr if_statement(int depth) {
    next();  // if
    auto stmt = std::make_unique<Stmt>();
    stmt->kind = Stmt::Kind::kIf;
    const Token& cond_at = peek();
    stmt->expr = expression(1);
    if (!is_bool(*stmt->expr)) fail(cond_at, "'if' condition must be a comparison ('==')");
    stmt->then_branch = block(depth + 1);
    if (peek().type == Tok::kIdent && peek().text == "else") {
      next();
      if (peek().type == Tok::kIdent && peek().text == "if") {
        // An else-if sits inside the else branch, one block deeper.
        check_depth(depth + 1, peek(), "blocks");
        stmt->else_branch.push_back(if_statement(depth + 1));
      } else {
        stmt->else_branch = block(depth + 1);
      }
    }
    return stmt;
  }

  std::vector<StmtPtr> block(int depth) {
    check_depth(depth, peek(), "blocks");
    expect(Tok::kLBrace, "'{'");
    std::vector<StmtPtr> body;
    while (peek().type != Tok::kRBrace) {
      if (peek().type == Tok::kEnd) fail(peek(), "expected '}', found end of script");
      body.push_back(statement(depth));
    }
    next();
    return body;
  }

  ExprPtr expression(int depth) {
    check_depth(depth, peek(), "expressions");
    auto lhs = concat(depth);
    if (peek().type == Tok::kEqEq) {
      next();
      auto rhs = concat(depth);
      auto eq = std::make_unique<Expr>();
      eq->kind = Expr::Kind::kEquals;
      eq->args.push_back(std::move(lhs));
      eq->args.push_back(std::move(rhs));
      return eq;
    }
    return lhs;
  }

  ExprPtr concat(int depth) {
    const Token& first_at = peek();
    auto first = primary(depth);
    if (peek().type != Tok::kPlus) return first;
    auto cat = std::make_unique<Expr>();
    cat->kind = Expr::Kind::kConcat;
    if (is_bool(*first)) fail(first_at, "cannot concatenate a comparison");
    cat->args.push_back(std::move(first));
    while (peek().type == Tok::kPlus) {
      next();
      const Token& at = peek();
      auto operand = primary(depth);
      if (is_bool(*operand)) fail(at, "cannot concatenate a comparison");
      cat->args.push_back(std::move(operand));
    }
    return cat;
  }

  ExprPtr string_arg(int depth, const char* fn) {
    const Token& at = peek();
    auto e = expression(depth + 1);
    if (is_bool(*e)) fail(at, std::string("'") + fn + "' takes a string, not a comparison");
    return e;
  }

  ExprPtr primary(int depth) {
    const Token& t = peek();
    if (t.type == Tok::kString) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::kString;
      e->literal = next().text;
      return e;
    }
    if (t.type == Tok::kLParen) {
      next();
      auto e = expression(depth + 1);
      expect(Tok::kRParen, "')'");
      return e;
    }
    if (t.type != Tok::kIdent) fail(t, "expected expression, found " + describe(t));
    const std::string name = t.text;
    auto e = std::make_unique<Expr>();
    if (name == "env") {
      e->kind = Expr::Kind::kEnv;
    } else if (name == "param") {
      e->kind = Expr::Kind::kParam;
    } else if (name == "header") {
      e->kind = Expr::Kind::kHeader;
    } else if (name == "metadata") {
      e->kind = Expr::Kind::kMetadata;
    } else if (name == "path") {
      e->kind = Expr::Kind::kPath;
    } else if (name == "fetch") {
      e->kind = Expr::Kind::kFetch;
    } else {
      fail(t, "unknown function '" + name + "'");
    }
    next();
    expect(Tok::kLParen, "'('");
    if (e->kind == Expr::Kind::kFetch) {
      e->args.push_back(string_arg(depth, "fetch"));
      expect(Tok::kComma, "','");
      e->args.push_back(string_arg(depth, "fetch"));
    } else if (e->kind != Expr::Kind::kPath) {
      e->args.push_back(string_arg(depth, name.c_str()));
    }
    expect(Tok::kRParen, "')'");
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

class Evaluator {
 public:
  Evaluator(const HandlerRequest& request, const std::map<std::string, std::string>& env,
            HandlerHost& host)
      : request_(request), env_(env), host_(host) {}

  // Returns true once the script has finished (respond or error).
  bool run(const std::vector<StmtPtr>& body, HandlerOutcome& out) {
    for (const auto& stmt : body) {
      if (++statements_ > kMaxStatements) {
        throw Error(ErrorCode::kLimitExceeded,
                    "statement limit of " + std::to_string(kMaxStatements) + " exceeded");
      }
      switch (stmt->kind) {
        case Stmt::Kind::kIf:
          if (truthy(*stmt->expr)) {
            if (run(stmt->then_branch, out)) return true;
          } else if (run(stmt->else_branch, out)) {
            return true;
          }
          break;
        case Stmt::Kind::kRespond:
          out.kind = HandlerOutcome::Kind::kResponded;
          out.body = str(*stmt->expr);
          return true;
        case Stmt::Kind::kError:
          out.kind = HandlerOutcome::Kind::kRaised;
          out.body = str(*stmt->expr);
          host_.log(Severity::kError, out.body);
          return true;
        case Stmt::Kind::kLog:
          host_.log(Severity::kInfo, str(*stmt->expr));
          break;
      }
    }
    return false;
  }

 private:
  bool truthy(const Expr& e) { return str(*e.args[0]) == str(*e.args[1]); }

  void count_request() {
    if (++requests_ > kMaxFetches) {
      throw Error(ErrorCode::kLimitExceeded,
                  "fetch limit of " + std::to_string(kMaxFetches) + " exceeded");
    }
  }

  static std::string lookup(const std::map<std::string, std::string>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? std::string() : it->second;
  }

  std::string str(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kString:
        return e.literal;
      case Expr::Kind::kEnv:
        return lookup(env_, str(*e.args[0]));
      case Expr::Kind::kParam:
        return lookup(request_.params, str(*e.args[0]));
      case Expr::Kind::kHeader: {
        auto it = request_.headers.find(str(*e.args[0]));
        return it == request_.headers.end() ? std::string() : it->second;
      }
      case Expr::Kind::kPath:
        return request_.path;
      case Expr::Kind::kMetadata: {
        auto path = str(*e.args[0]);
        count_request();
        return host_.metadata(path);
      }
      case Expr::Kind::kFetch: {
        auto url = str(*e.args[0]);
        auto headers = parse_header_block(str(*e.args[1]));
        count_request();
        return host_.fetch(url, headers);
      }
      case Expr::Kind::kConcat: {
        std::string out;
        for (const auto& a : e.args) out += str(*a);
        return out;
      }
      case Expr::Kind::kEquals:
        return truthy(e) ? "true" : "false";
    }
    return {};
  }

  const HandlerRequest& request_;
  const std::map<std::string, std::string>& env_;
  HandlerHost& host_;
  int statements_ = 0;
  int requests_ = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

HandlerScript HandlerScript::parse(std::string_view source) {
  HandlerScript script;
  script.body_ = std::make_shared<std::vector<StmtPtr>>(Parser(tokenize(source)).script());
  return script;
}

bool HeaderLess::operator()(const std::string& a, const std::string& b) const {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) < std::tolower(static_cast<unsigned char>(y));
  });
}

HeaderMap parse_header_block(std::string_view block) {
  HeaderMap headers;
  std::size_t start = 0;
  while (start <= block.size()) {
    auto end = block.find('\n', start);
    if (end == std::string_view::npos) end = block.size();
    auto line = block.substr(start, end - start);
    if (!trim(line).empty()) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos || trim(line.substr(0, colon)).empty()) {
        throw Error(ErrorCode::kHandlerError, "malformed header line '" + trim(line) + "'");
      }
      headers[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
    }
    start = end + 1;
  }
  return headers;
}

HandlerOutcome handler_eval(const HandlerScript& script, const HandlerRequest& request,
                            const std::map<std::string, std::string>& env, HandlerHost& host) {
  HandlerOutcome out;
  Evaluator(request, env, host).run(script.statements(), out);
  return out;
}

}  // namespace emucloud
