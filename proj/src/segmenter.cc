// Copyright 2026 The auxcrf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "auxcrf/segmenter.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "auxcrf/error.h"

namespace auxcrf {

std::vector<std::string_view> utf8_characters(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) {
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
    }
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

WordPieceSegmenter::WordPieceSegmenter(std::span<const std::string> vocabulary,
                                       bool lowercase)
    : vocab_(vocabulary.begin(), vocabulary.end()), lowercase_(lowercase) {}

WordPieceSegmenter WordPieceSegmenter::from_file(
    const std::filesystem::path& path, bool lowercase) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open vocabulary " + path.string());
  }
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) entries.push_back(line);
  }
  return WordPieceSegmenter(entries, lowercase);
}

std::vector<std::string> WordPieceSegmenter::operator()(std::string_view word) const {
  std::string text(word);
  if (lowercase_) {
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
      return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
    });
  }
  const auto chars = utf8_characters(text);

  // Byte offset of every character boundary, including the end.
  std::vector<std::size_t> bounds;
  bounds.reserve(chars.size() + 1);
  std::size_t offset = 0;
  for (auto c : chars) {
    bounds.push_back(offset);
    offset += c.size();
  }
  bounds.push_back(offset);

  std::vector<std::string> pieces;
  std::size_t start = 0;
  bool covered = true;
  while (start < chars.size()) {
    std::size_t end = chars.size();
    std::string match;
    while (end > start) {
      std::string candidate = text.substr(bounds[start], bounds[end] - bounds[start]);
      if (start > 0) candidate.insert(0, kContinuationPrefix);
      if (vocab_.contains(candidate)) {
        match = std::move(candidate);
        break;
      }
      --end;
    }
    if (match.empty()) {
      covered = false;
      break;
    }
    pieces.push_back(std::move(match));
    start = end;
  }
  if (covered && !pieces.empty()) return pieces;

  pieces.clear();
  for (std::size_t i = 0; i < chars.size(); ++i) {
    std::string piece = i == 0 ? std::string() : std::string(kContinuationPrefix);
    piece += chars[i];
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

Segmenter whole_word_segmenter() {
  return [](std::string_view word) {
    return std::vector<std::string>{std::string(word)};
  };
}

}  // namespace auxcrf
