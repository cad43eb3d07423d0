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

#include "auxcrf/labelspace.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "auxcrf/error.h"

namespace auxcrf {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kEmptySentence: return "EmptySentence";
    case ErrorCode::kAuxiliaryLabelInInput: return "AuxiliaryLabelInInput";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSentenceTooLong: return "SentenceTooLong";
    case ErrorCode::kEmptySegmentation: return "EmptySegmentation";
    case ErrorCode::kGoldViolatesMask: return "GoldViolatesMask";
    case ErrorCode::kNoLegalPath: return "NoLegalPath";
    case ErrorCode::kMissingSentence: return "MissingSentence";
    case ErrorCode::kSubwordMismatch: return "SubwordMismatch";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kEmptyTraining: return "EmptyTraining";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kModelFormat: return "ModelFormat";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Family family_of(Tag tag) {
  switch (tag) {
    case Tag::kBAspect:
    case Tag::kIAspect:
    case Tag::kXAspect:
      return Family::kAspect;
    case Tag::kBSentiment:
    case Tag::kISentiment:
    case Tag::kXSentiment:
      return Family::kSentiment;
    default:
      return Family::kOther;
  }
}

std::string_view to_string(Tag tag) {
  static constexpr std::array<std::string_view, kNumTags> kNames = {
      "O", "B-ASPECT", "I-ASPECT", "B-SENTIMENT", "I-SENTIMENT",
      "A", "Z",        "X-ASPECT", "X-SENTIMENT", "Y",
  };
  return kNames[index_of(tag)];
}

std::string_view report_name(Tag tag) {
  return tag == Tag::kO ? std::string_view("OTHER") : to_string(tag);
}

Tag parse_tag(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "OTHER") return Tag::kO;
  for (Tag tag : kAllTags) {
    if (upper == to_string(tag)) return tag;
  }
  throw Error(ErrorCode::kUnknownLabel,
              "unknown label '" + std::string(text) + "'");
}

bool ConstraintMask::is_legal(std::span<const Tag> labels) const {
  if (labels.empty()) return false;
  if (!allows_start(labels.front()) || !allows_end(labels.back())) return false;
  for (std::size_t t = 1; t < labels.size(); ++t) {
    if (!allows(labels[t - 1], labels[t])) return false;
  }
  return true;
}

ConstraintMask ConstraintMask::allow_all() {
  ConstraintMask mask;
  for (auto& row : mask.transition) row.fill(true);
  mask.start.fill(true);
  mask.end.fill(true);
  return mask;
}

ConstraintMask ConstraintMask::forbid_all() { return ConstraintMask{}; }

namespace {

// Outgoing edges shared by every tag that closes a word (everything except
// the markers). X-* and Y inherit the successors of the word they continue.
void allow_word_successors(ConstraintMask& mask, Tag from) {
  auto& row = mask.transition[index_of(from)];
  row[index_of(Tag::kO)] = true;
  row[index_of(Tag::kBAspect)] = true;
  row[index_of(Tag::kBSentiment)] = true;
  row[index_of(Tag::kZ)] = true;
  switch (family_of(from)) {
    case Family::kAspect:
      row[index_of(Tag::kIAspect)] = true;
      row[index_of(Tag::kXAspect)] = true;
      break;
    case Family::kSentiment:
      row[index_of(Tag::kISentiment)] = true;
      row[index_of(Tag::kXSentiment)] = true;
      break;
    case Family::kOther:
      row[index_of(Tag::kY)] = true;
      break;
  }
}

}  // namespace

ConstraintMask default_constraint_mask() {
  ConstraintMask mask;
  mask.start[index_of(Tag::kA)] = true;
  mask.end[index_of(Tag::kZ)] = true;

  auto& from_cls = mask.transition[index_of(Tag::kA)];
  from_cls[index_of(Tag::kO)] = true;
  from_cls[index_of(Tag::kBAspect)] = true;
  from_cls[index_of(Tag::kBSentiment)] = true;

  for (Tag from : {Tag::kO, Tag::kBAspect, Tag::kIAspect, Tag::kBSentiment,
                   Tag::kISentiment, Tag::kXAspect, Tag::kXSentiment, Tag::kY}) {
    allow_word_successors(mask, from);
  }
  // Z has no successors.
  return mask;
}

std::vector<GrammarViolation> grammar_violations(std::span<const Tag> labels,
                                                 const ConstraintMask& mask) {
  std::vector<GrammarViolation> out;
  if (labels.empty()) return out;
  if (!mask.allows_start(labels.front())) {
    out.push_back({GrammarViolation::Kind::kStart, 0});
  }
  for (std::size_t t = 1; t < labels.size(); ++t) {
    if (!mask.allows(labels[t - 1], labels[t])) {
      out.push_back({GrammarViolation::Kind::kTransition, t});
    }
  }
  if (!mask.allows_end(labels.back())) {
    out.push_back({GrammarViolation::Kind::kEnd, labels.size() - 1});
  }
  return out;
}

std::string format_mask(const ConstraintMask& mask) {
  std::size_t width = 0;
  for (Tag tag : kAllTags) width = std::max(width, to_string(tag).size());
  auto pad = [width](std::string_view s) {
    std::string out(s);
    out.resize(width + 2, ' ');
    return out;
  };

  std::ostringstream os;
  os << pad("from\\to");
  for (Tag to : kAllTags) os << pad(to_string(to));
  os << '\n';
  for (Tag from : kAllTags) {
    os << pad(to_string(from));
    for (Tag to : kAllTags) os << pad(mask.allows(from, to) ? "1" : ".");
    os << '\n';
  }
  os << pad("start");
  for (Tag tag : kAllTags) os << pad(mask.allows_start(tag) ? "1" : ".");
  os << '\n' << pad("end");
  for (Tag tag : kAllTags) os << pad(mask.allows_end(tag) ? "1" : ".");
  os << '\n';
  return os.str();
}

Tag LabelSpace::tag(std::size_t index) const {
  if (index >= kNumTags) {
    throw Error(ErrorCode::kUnknownLabel,
                "tag index " + std::to_string(index) + " out of range", index);
  }
  return tag_at(index);
}

const LabelSpace& LabelSpace::standard() {
  static const LabelSpace space;
  return space;
}

}  // namespace auxcrf
