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

#ifndef AUXCRF_EVAL_H_
#define AUXCRF_EVAL_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auxcrf/corpus.h"
#include "auxcrf/labelspace.h"

namespace auxcrf {

// Raw counts behind precision, recall and F1.
struct Prf {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const;
  double recall() const;
  // Harmonic mean; 0 when precision + recall = 0.
  double f1() const;

  Prf& operator+=(const Prf& other);
  bool operator==(const Prf&) const = default;
};

using LabelSequences = std::span<const std::vector<Tag>>;

struct TokenScores {
  std::array<Prf, kNumOriginalTags> per_label{};

  const Prf& operator[](Tag tag) const { return per_label[index_of(tag)]; }
  // Pooled counts over B-ASPECT, I-ASPECT, B-SENTIMENT and I-SENTIMENT.
  Prf micro() const;
};

// Per-label scores over word labels, counts pooled across sentences.
// Throws Error(kLengthMismatch) on any sentence count or length mismatch.
TokenScores token_f1(LabelSequences gold, LabelSequences pred);

enum class EntityDefinition {
  // B-/I- prefixes stripped, scored per token.
  kCollapsedToken,
  // Maximal B-X I-X* runs, credited on exact boundaries and type.
  kSpanExact,
};

struct EntityScores {
  Prf aspect;
  Prf sentiment;

  Prf micro() const;
};

EntityScores entity_f1(LabelSequences gold, LabelSequences pred,
                       EntityDefinition definition);

struct EntitySpan {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  Family type = Family::kOther;
  // False when the span opens with a stray I-X. Such spans never match.
  bool valid_start = true;

  bool operator==(const EntitySpan&) const = default;
};

std::vector<EntitySpan> extract_spans(std::span<const Tag> labels);

struct BioViolation {
  std::string sentence_id;
  std::size_t position = 0;
  std::optional<Tag> previous;  // empty at sentence start
  Tag tag = Tag::kO;
  std::string context;  // e.g. "kost(O) nya(I-ASPECT) cukup(B-SENTIMENT)"
};

struct ViolationCensus {
  std::vector<BioViolation> violations;

  std::size_t count() const { return violations.size(); }
};

// Positions holding I-X whose predecessor is neither B-X nor I-X.
std::vector<std::size_t> bio_violations(std::span<const Tag> labels);

// Census over predicted word labels. Words are used for the context
// snippets and may be empty.
ViolationCensus audit_bio(std::span<const Sentence> predicted);

void write_violations_csv(std::ostream& out, const ViolationCensus& census);

// Most frequent training label per token string.
class ArgmaxBaseline {
 public:
  // Throws Error(kEmptyTraining) for an empty training split.
  static ArgmaxBaseline fit(std::span<const Sentence> train);

  // Ties go to the lexicographically smaller tag string; unseen tokens get
  // the global majority label.
  Tag predict(std::string_view token) const;
  std::vector<Tag> predict(std::span<const std::string> words) const;

  Tag majority() const { return majority_; }
  std::size_t vocabulary_size() const { return counts_.size(); }

 private:
  std::map<std::string, std::array<std::size_t, kNumOriginalTags>, std::less<>> counts_;
  Tag majority_ = Tag::kO;
};

// Label with the highest count; ties to the smaller tag string.
Tag argmax_label(const std::array<std::size_t, kNumOriginalTags>& counts);

struct EvalReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  TokenScores token;
  EntityScores entity_collapsed;
  EntityScores entity_span;
  ViolationCensus census;
  std::size_t repairs = 0;  // auxiliary first-subword predictions repaired
};

// Compares two corpora sentence by sentence (same order and lengths).
EvalReport evaluate(const Corpus& gold, const Corpus& pred, std::size_t repairs = 0);

std::string format_report_table(const EvalReport& report);
// "key=value" lines, e.g. "token.B-ASPECT.f1=0.924000".
std::string format_report_kv(const EvalReport& report);

}  // namespace auxcrf

#endif  // AUXCRF_EVAL_H_
