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

#include "thunder/hints.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "thunder/yaml_json.hpp"

namespace thunder {

using emucloud::Error;
using emucloud::ErrorCode;

namespace {

struct Inline {
  enum class Kind { kText, kCode, kLink } kind;
  std::string text;
  std::string url;
};

struct Block {
  bool code = false;
  std::string language;
  std::string code_text;
  std::vector<Inline> inlines;
};

[[noreturn]] void markup_error(const std::string& reason) { throw HintParseError(0, reason); }

bool is_fence(const std::string& line) { return line.rfind("```", 0) == 0; }

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

bool valid_url(const std::string& url) {
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) return false;
  for (unsigned char c : url) {
    if (c <= ' ' || c == '"' || c == '\'' || c == '<' || c == '>' || c == '`' || c >= 0x7f) return false;
  }
  return url.size() > url.find("//") + 2;
}

std::vector<Inline> parse_inlines(const std::string& text) {
  std::vector<Inline> out;
  std::string plain;
  auto flush = [&] {
    if (!plain.empty()) out.push_back({Inline::Kind::kText, plain, ""});
    plain.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '`') {
      const auto end = text.find('`', i + 1);
      if (end == std::string::npos) markup_error("unclosed inline code");
      if (end == i + 1) markup_error("empty inline code");
      flush();
      out.push_back({Inline::Kind::kCode, text.substr(i + 1, end - i - 1), ""});
      i = end + 1;
    } else if (c == '<' && i + 1 < text.size() &&
               (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/' ||
                text[i + 1] == '!' || text[i + 1] == '?')) {
      markup_error("raw HTML is not allowed");
    } else if (c == '[') {
      const auto close = text.find(']', i + 1);
      if (close != std::string::npos && close + 1 < text.size() && text[close + 1] == '(') {
        const auto paren = text.find(')', close + 2);
        if (paren == std::string::npos) markup_error("unclosed link target");
        std::string label = text.substr(i + 1, close - i - 1);
        std::string url = text.substr(close + 2, paren - close - 2);
        if (label.empty()) markup_error("link without text");
        if (label.find_first_of("`[<") != std::string::npos) markup_error("unsupported markup inside link text");
        if (!valid_url(url)) markup_error("link target must be an http or https URL: " + url);
        flush();
        out.push_back({Inline::Kind::kLink, label, url});
        i = paren + 1;
      } else {
        plain += c;
        ++i;
      }
    } else {
      plain += c;
      ++i;
    }
  }
  flush();
  return out;
}

std::vector<Block> parse_body(const std::string& body) {
  std::vector<std::string> lines;
  {
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) lines.push_back(rtrim(line));
  }
  std::vector<Block> blocks;
  std::vector<std::string> para;
  auto flush_para = [&] {
    if (para.empty()) return;
    std::string joined;
    for (std::size_t k = 0; k < para.size(); ++k) joined += (k ? "\n" : "") + para[k];
    Block b;
    b.inlines = parse_inlines(joined);
    blocks.push_back(std::move(b));
    para.clear();
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (is_fence(line)) {
      flush_para();
      Block b;
      b.code = true;
      b.language = line.substr(3);
      for (char ch : b.language) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') {
          markup_error("bad code block language '" + b.language + "'");
        }
      }
      std::size_t j = i + 1;
      std::string code;
      for (; j < lines.size() && lines[j] != "```"; ++j) code += (j > i + 1 ? "\n" : "") + lines[j];
      if (j == lines.size()) markup_error("unclosed code block");
      b.code_text = code;
      blocks.push_back(std::move(b));
      i = j;
    } else if (line.find_first_not_of(" \t") == std::string::npos) {
      flush_para();
    } else {
      para.push_back(line);
    }
  }
  flush_para();
  if (blocks.empty()) markup_error("body is empty");
  return blocks;
}

std::string escape_html(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string blocks_html(const std::vector<Block>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    const Block& b = blocks[i];
    if (b.code) {
      out += "<pre><code";
      if (!b.language.empty()) out += " class=\"language-" + b.language + "\"";
      out += ">" + escape_html(b.code_text) + "</code></pre>";
      continue;
    }
    out += "<p>";
    for (const auto& in : b.inlines) {
      switch (in.kind) {
        case Inline::Kind::kText: out += escape_html(in.text); break;
        case Inline::Kind::kCode: out += "<code>" + escape_html(in.text) + "</code>"; break;
        case Inline::Kind::kLink:
          out += "<a href=\"" + escape_html(in.url) + "\" rel=\"noopener noreferrer\">" + escape_html(in.text) + "</a>";
          break;
      }
    }
    out += "</p>";
  }
  return out;
}

std::string blocks_text(const std::vector<Block>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    if (blocks[i].code) {
      out += blocks[i].code_text;
    } else {
      for (const auto& in : blocks[i].inlines) out += in.text;
    }
  }
  return out;
}

constexpr const char* kStyle = R"(body{font-family:system-ui,sans-serif;max-width:46rem;margin:2rem auto;padding:0 1rem;color:#1b1f24}
h1{font-size:1.4rem}
.slide{border:1px solid #d0d7de;border-radius:6px;padding:1rem 1.25rem;margin-bottom:1rem}
.js .slide{display:none}
.js .slide.current{display:block}
pre{background:#f6f8fa;padding:.75rem;overflow-x:auto}
code{font-family:ui-monospace,monospace}
.deck-nav{display:flex;gap:1rem;align-items:center}
)";

constexpr const char* kScript = R"((function () {
  document.documentElement.classList.add('js');
  var slides = document.querySelectorAll('.slide');
  var pos = 0;
  function show() {
    for (var i = 0; i < slides.length; i++) slides[i].classList.toggle('current', i === pos);
    document.getElementById('position').textContent = (pos + 1) + ' / ' + slides.length;
    document.getElementById('prev').disabled = pos === 0;
    document.getElementById('next').disabled = pos === slides.length - 1;
  }
  document.getElementById('prev').addEventListener('click', function () { if (pos > 0) { pos--; show(); } });
  document.getElementById('next').addEventListener('click', function () { if (pos < slides.length - 1) { pos++; show(); } });
  show();
})();
)";

}  // namespace

HintParseError::HintParseError(std::size_t index, std::string reason)
    : Error(ErrorCode::kHintParseError, (index ? "hint " + std::to_string(index) + ": " : std::string()) + reason),
      index_(index),
      reason_(std::move(reason)) {}

HintDeck parse_hint_file(const std::string& text, const std::string& level) {
  nlohmann::json doc;
  try {
    doc = parse_yaml(text);
  } catch (const Error& e) {
    throw HintParseError(0, std::string("invalid YAML: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("hints")) throw HintParseError(0, "missing 'hints' list");
  const auto& list = doc["hints"];
  if (list.is_null() || (list.is_array() && list.empty())) throw HintParseError(0, "'hints' is empty");
  if (!list.is_array()) throw HintParseError(0, "'hints' must be a list");
  HintDeck deck;
  deck.level = level;
  std::size_t index = 0;
  for (const auto& entry : list) {
    ++index;
    if (!entry.is_object()) throw HintParseError(index, "entry must be a map with title and body");
    for (const auto& [key, value] : entry.items()) {
      if (key != "title" && key != "body") throw HintParseError(index, "unknown field '" + key + "'");
      if (!value.is_string()) throw HintParseError(index, "'" + key + "' must be a string");
    }
    Hint hint{entry.value("title", ""), entry.value("body", "")};
    if (hint.title.empty()) throw HintParseError(index, "missing title");
    if (hint.title.find('\n') != std::string::npos) throw HintParseError(index, "title must be one line");
    if (hint.body.find_first_not_of(" \t\r\n") == std::string::npos) throw HintParseError(index, "missing body");
    try {
      (void)parse_body(hint.body);
    } catch (const HintParseError& e) {
      throw HintParseError(index, e.reason());
    }
    deck.hints.push_back(std::move(hint));
  }
  return deck;
}

HintDeck load_hint_deck(const std::filesystem::path& file, const std::string& level) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw HintParseError(0, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_hint_file(ss.str(), level);
}

std::string render_body_html(const std::string& body) { return blocks_html(parse_body(body)); }

std::string strip_markup(const std::string& body) { return blocks_text(parse_body(body)); }

std::string render_slideshow(const HintDeck& deck) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>Hints: " + escape_html(deck.level) + "</title>\n";
  out += "<style>\n" + std::string(kStyle) + "</style>\n</head>\n<body>\n";
  out += "<h1>" + escape_html(deck.level) + "</h1>\n";
  out += "<main id=\"deck\" data-level=\"" + escape_html(deck.level) + "\">\n";
  for (std::size_t i = 0; i < deck.hints.size(); ++i) {
    const auto n = std::to_string(i + 1);
    out += "<section class=\"slide\" id=\"hint-" + n + "\" data-index=\"" + n + "\">\n";
    out += "<h2>Hint " + n + ": " + escape_html(deck.hints[i].title) + "</h2>\n";
    out += "<div class=\"hint-body\">" + render_body_html(deck.hints[i].body) + "</div>\n";
    out += "</section>\n";
  }
  out += "</main>\n";
  out += "<nav class=\"deck-nav\"><button type=\"button\" id=\"prev\">Previous</button>"
         "<span id=\"position\"></span><button type=\"button\" id=\"next\">Next</button></nav>\n";
  out += "<script>\n" + std::string(kScript) + "</script>\n</body>\n</html>\n";
  return out;
}

std::filesystem::path write_slideshow(const HintDeck& deck, const std::filesystem::path& site_root) {
  const auto dir = site_root / deck.level;
  std::filesystem::create_directories(dir);
  const auto file = dir / "index.html";
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kBadRequest, "cannot write " + file.string());
  out << render_slideshow(deck);
  return file;
}

}  // namespace thunder
