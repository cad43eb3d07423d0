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

#include "auxcrf/align.h"

#include "auxcrf/error.h"

namespace auxcrf {

Tag trailing_label(Tag word_label) {
  switch (family_of(word_label)) {
    case Family::kAspect: return Tag::kXAspect;
    case Family::kSentiment: return Tag::kXSentiment;
    case Family::kOther: return Tag::kY;
  }
  return Tag::kY;
}

Tag repair_first_subword(Tag predicted) {
  switch (predicted) {
    case Tag::kXAspect: return Tag::kIAspect;
    case Tag::kXSentiment: return Tag::kISentiment;
    case Tag::kY:
    case Tag::kA:
    case Tag::kZ:
      return Tag::kO;
    default:
      return predicted;
  }
}

AlignedSentence project_segmented(
    std::span<const std::string> words, std::span<const Tag> word_labels,
    std::span<const std::vector<std::string>> pieces,
    std::size_t max_subwords) {
  if (words.empty()) {
    throw Error(ErrorCode::kEmptySentence, "sentence has no words");
  }
  if (words.size() != word_labels.size() || words.size() != pieces.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(words.size()) + " words but " +
                    std::to_string(word_labels.size()) + " labels and " +
                    std::to_string(pieces.size()) + " segmentations");
  }

  AlignedSentence out;
  out.words.assign(words.begin(), words.end());
  out.word_labels.assign(word_labels.begin(), word_labels.end());
  out.subwords.emplace_back(kClsToken);
  out.subword_labels.push_back(Tag::kA);

  for (std::size_t i = 0; i < words.size(); ++i) {
    const Tag label = word_labels[i];
    if (!is_original(label)) {
      throw Error(ErrorCode::kAuxiliaryLabelInInput,
                  "word " + std::to_string(i) + " is labelled " +
                      std::string(to_string(label)),
                  i);
    }
    if (pieces[i].empty()) {
      throw Error(ErrorCode::kEmptySegmentation,
                  "word '" + words[i] + "' produced no subwords", i);
    }
    WordSpan span{out.subwords.size(), out.subwords.size() + pieces[i].size() - 1};
    for (std::size_t k = 0; k < pieces[i].size(); ++k) {
      out.subwords.push_back(pieces[i][k]);
      out.subword_labels.push_back(k == 0 ? label : trailing_label(label));
    }
    out.spans.push_back(span);
  }

  out.subwords.emplace_back(kSepToken);
  out.subword_labels.push_back(Tag::kZ);
  if (out.subwords.size() > max_subwords) {
    throw Error(ErrorCode::kSentenceTooLong,
                std::to_string(out.subwords.size()) + " subwords exceed the cap of " +
                    std::to_string(max_subwords),
                out.subwords.size());
  }
  return out;
}

AlignedSentence project(std::span<const std::string> words,
                        std::span<const Tag> word_labels,
                        const Segmenter& segmenter, std::size_t max_subwords) {
  std::vector<std::vector<std::string>> pieces;
  pieces.reserve(words.size());
  for (const auto& word : words) pieces.push_back(segmenter(word));
  return project_segmented(words, word_labels, pieces, max_subwords);
}

CollapseResult collapse(const AlignedSentence& aligned,
                        std::span<const Tag> predicted) {
  if (predicted.size() != aligned.subwords.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(aligned.subwords.size()) + " subwords");
  }
  CollapseResult out;
  out.labels.reserve(aligned.spans.size());
  for (std::size_t i = 0; i < aligned.spans.size(); ++i) {
    const Tag head = predicted[aligned.spans[i].first];
    const Tag repaired = repair_first_subword(head);
    if (repaired != head) out.repaired_words.push_back(i);
    out.labels.push_back(repaired);
  }
  return out;
}

std::vector<std::size_t> subword_owners(const AlignedSentence& aligned) {
  std::vector<std::size_t> owner(aligned.subwords.size(), kNoWord);
  for (std::size_t i = 0; i < aligned.spans.size(); ++i) {
    for (std::size_t t = aligned.spans[i].first; t <= aligned.spans[i].last; ++t) {
      owner[t] = i;
    }
  }
  return owner;
}

}  // namespace auxcrf
