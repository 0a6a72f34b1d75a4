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

#ifndef THUNDER_HINTS_HPP_
#define THUNDER_HINTS_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "emucloud/error.hpp"

namespace thunder {

struct Hint {
  std::string title;
  std::string body;  // restricted markup, see parse_hint_file
};

struct HintDeck {
  std::string level;  // namespace/name
  std::vector<Hint> hints;
};

/// Raised for malformed hint files. `index` is the 1-based hint position,
/// or 0 when the problem is with the file as a whole.
class HintParseError : public emucloud::Error {
 public:
  HintParseError(std::size_t index, std::string reason);
  std::size_t index() const { return index_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t index_;
  std::string reason_;
};

/// Parses `hints: [{title, body}, ...]`.
///
/// Body markup:
///   - blocks are separated by blank lines
///   - a line of three backticks (optionally followed by a language word)
///     opens a code block that runs to the next such line
///   - inside paragraphs, `text` is inline code and [text](http://...) is
///     a link; only http and https targets are allowed
///   - raw HTML tags are rejected
HintDeck parse_hint_file(const std::string& text, const std::string& level = "");
HintDeck load_hint_deck(const std::filesystem::path& file, const std::string& level);

/// HTML for one body. Throws HintParseError(0, ...) on invalid markup.
std::string render_body_html(const std::string& body);

/// Text content of the rendered body: markup delimiters removed, block
/// separators kept as blank lines.
std::string strip_markup(const std::string& body);

/// A single self-contained HTML document with one `<section id="hint-N">`
/// per hint and previous/next navigation. Same deck, same bytes.
std::string render_slideshow(const HintDeck& deck);

/// Writes render_slideshow output to `<site_root>/<namespace>/<name>/index.html`.
std::filesystem::path write_slideshow(const HintDeck& deck, const std::filesystem::path& site_root);

}  // namespace thunder

#endif  // THUNDER_HINTS_HPP_
