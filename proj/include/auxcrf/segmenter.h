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

#ifndef AUXCRF_SEGMENTER_H_
#define AUXCRF_SEGMENTER_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "auxcrf/align.h"

namespace auxcrf {

inline constexpr std::string_view kContinuationPrefix = "##";

// Greedy longest-match-first subword segmentation against a fixed
// vocabulary. Continuation pieces carry the "##" prefix. A word that cannot
// be covered by vocabulary pieces is split into its UTF-8 characters.
class WordPieceSegmenter {
 public:
  explicit WordPieceSegmenter(std::span<const std::string> vocabulary,
                              bool lowercase = true);

  // One entry per line, UTF-8. Blank lines are skipped.
  static WordPieceSegmenter from_file(const std::filesystem::path& path,
                                      bool lowercase = true);

  std::vector<std::string> operator()(std::string_view word) const;

  std::size_t vocabulary_size() const { return vocab_.size(); }

 private:
  std::unordered_set<std::string> vocab_;
  bool lowercase_;
};

// Every word is a single subword.
Segmenter whole_word_segmenter();

// Splits a UTF-8 string into code points; malformed bytes stand alone.
std::vector<std::string_view> utf8_characters(std::string_view text);

}  // namespace auxcrf

#endif  // AUXCRF_SEGMENTER_H_
