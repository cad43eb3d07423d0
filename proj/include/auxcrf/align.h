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

#ifndef AUXCRF_ALIGN_H_
#define AUXCRF_ALIGN_H_

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auxcrf/labelspace.h"

namespace auxcrf {

inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
// Subword cap including both markers.
inline constexpr std::size_t kDefaultMaxSubwords = 512;
inline constexpr std::size_t kNoWord = std::numeric_limits<std::size_t>::max();

// Inclusive range of subword indices covered by one word.
struct WordSpan {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  bool operator==(const WordSpan&) const = default;
};

// A word-level sentence together with its subword expansion.
//
// Invariants (established by project()):
//   subwords = [CLS] s_1 ... s_n [SEP], labelled A ... Z;
//   spans tile subwords[1 .. n] in order;
//   the first subword of a word carries the word label, trailing subwords
//   carry X-ASPECT / X-SENTIMENT / Y according to the word's family.
struct AlignedSentence {
  std::string id;
  std::vector<std::string> words;
  std::vector<Tag> word_labels;
  std::vector<std::string> subwords;
  std::vector<Tag> subword_labels;
  std::vector<WordSpan> spans;

  std::size_t size() const { return subwords.size(); }
};

using Segmenter = std::function<std::vector<std::string>(std::string_view)>;

// Label carried by the trailing subwords of a word labelled `word_label`.
Tag trailing_label(Tag word_label);

// Original tag substituted for an auxiliary prediction that landed on the
// first subword of a word. Original tags map to themselves.
Tag repair_first_subword(Tag predicted);

AlignedSentence project(std::span<const std::string> words,
                        std::span<const Tag> word_labels,
                        const Segmenter& segmenter,
                        std::size_t max_subwords = kDefaultMaxSubwords);

// Same as above with the segmentation given explicitly, one piece list per
// word (used with externally produced segmentations).
AlignedSentence project_segmented(
    std::span<const std::string> words, std::span<const Tag> word_labels,
    std::span<const std::vector<std::string>> pieces,
    std::size_t max_subwords = kDefaultMaxSubwords);

struct CollapseResult {
  std::vector<Tag> labels;
  // Words whose first-subword prediction was auxiliary and got repaired.
  std::vector<std::size_t> repaired_words;
};

// Word labels read off the first subword of every span. Predictions at
// trailing and marker positions are ignored.
CollapseResult collapse(const AlignedSentence& aligned,
                        std::span<const Tag> predicted);

// For every subword position, the index of the word it belongs to, or
// kNoWord for the markers.
std::vector<std::size_t> subword_owners(const AlignedSentence& aligned);

}  // namespace auxcrf

#endif  // AUXCRF_ALIGN_H_
