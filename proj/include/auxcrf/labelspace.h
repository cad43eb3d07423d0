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

#ifndef AUXCRF_LABELSPACE_H_
#define AUXCRF_LABELSPACE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace auxcrf {

// The order of the enumerators is the column order of every score matrix and
// of the model file. Do not reorder.
enum class Tag : std::uint8_t {
  kO,
  kBAspect,
  kIAspect,
  kBSentiment,
  kISentiment,
  kA,  // [CLS]
  kZ,  // [SEP]
  kXAspect,
  kXSentiment,
  kY,
};

inline constexpr std::size_t kNumTags = 10;
inline constexpr std::size_t kNumOriginalTags = 5;

inline constexpr std::array<Tag, kNumTags> kAllTags = {
    Tag::kO,          Tag::kBAspect, Tag::kIAspect, Tag::kBSentiment,
    Tag::kISentiment, Tag::kA,       Tag::kZ,       Tag::kXAspect,
    Tag::kXSentiment, Tag::kY,
};

inline constexpr std::array<Tag, kNumOriginalTags> kOriginalTags = {
    Tag::kO, Tag::kBAspect, Tag::kIAspect, Tag::kBSentiment, Tag::kISentiment,
};

constexpr std::size_t index_of(Tag tag) { return static_cast<std::size_t>(tag); }
constexpr Tag tag_at(std::size_t index) { return static_cast<Tag>(index); }
constexpr bool is_original(Tag tag) { return index_of(tag) < kNumOriginalTags; }

// Entity family a tag belongs to. Auxiliary tags inherit the family of the
// word they continue; the sentence markers are kOther.
enum class Family { kOther, kAspect, kSentiment };
Family family_of(Tag tag);

// Canonical spelling: "O", "B-ASPECT", ..., "A", "Z", "X-ASPECT", "Y".
std::string_view to_string(Tag tag);
// Spelling used in evaluation tables ("OTHER" instead of "O").
std::string_view report_name(Tag tag);

// Case-insensitive. "O" and "OTHER" are the same tag. Throws
// Error(kUnknownLabel) for anything else.
Tag parse_tag(std::string_view text);

// Hard transition grammar over the expanded tag set.
// transition[i][j] is true iff tag j may immediately follow tag i.
struct ConstraintMask {
  std::array<std::array<bool, kNumTags>, kNumTags> transition{};
  std::array<bool, kNumTags> start{};
  std::array<bool, kNumTags> end{};

  bool allows(Tag from, Tag to) const {
    return transition[index_of(from)][index_of(to)];
  }
  bool allows_start(Tag tag) const { return start[index_of(tag)]; }
  bool allows_end(Tag tag) const { return end[index_of(tag)]; }

  // True iff the non-empty sequence starts, continues and ends legally.
  bool is_legal(std::span<const Tag> labels) const;

  static ConstraintMask allow_all();
  static ConstraintMask forbid_all();
};

ConstraintMask default_constraint_mask();

struct GrammarViolation {
  enum class Kind { kStart, kTransition, kEnd };
  Kind kind;
  std::size_t position;  // index of the offending tag
};

// Every place where `labels` leaves the grammar of `mask`.
std::vector<GrammarViolation> grammar_violations(std::span<const Tag> labels,
                                                 const ConstraintMask& mask);

// Plain-text table of the mask, one row per source tag.
std::string format_mask(const ConstraintMask& mask);

// The fixed tag inventory together with its default grammar. Immutable.
class LabelSpace {
 public:
  LabelSpace() : mask_(default_constraint_mask()) {}

  std::span<const Tag> tags() const { return kAllTags; }
  std::size_t size() const { return kNumTags; }
  std::size_t index(Tag tag) const { return index_of(tag); }
  Tag tag(std::size_t index) const;
  const ConstraintMask& mask() const { return mask_; }

  static const LabelSpace& standard();

 private:
  ConstraintMask mask_;
};

}  // namespace auxcrf

#endif  // AUXCRF_LABELSPACE_H_
