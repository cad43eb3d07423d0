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

#ifndef AUXCRF_EMIT_H_
#define AUXCRF_EMIT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auxcrf/align.h"
#include "auxcrf/crf.h"

namespace auxcrf {

inline constexpr std::uint32_t kDefaultHashDim = 1u << 18;
inline constexpr std::uint32_t kMinHashDim = 1u << 16;
inline constexpr std::uint64_t kDefaultHashSeed = 0x5eed;

using FeatureId = std::uint32_t;

// 64-bit FNV-1a, seeded by folding the seed into the offset basis.
std::uint64_t hash_feature(std::string_view text, std::uint64_t seed);

// Sparse linear emission model over hashed feature templates:
//   sw=<subword>, w=<lowercased word>, p1..p3=<word prefix>,
//   s1..s3=<word suffix>, cont (## piece), cls, sep, prev=<subword>,
//   next=<subword>, first (first subword of its word).
// Each feature owns a row of kNumTags weights. Rows are created on
// registration; unknown features contribute nothing.
class FeatureEmitter {
 public:
  explicit FeatureEmitter(std::uint32_t hash_dim = kDefaultHashDim,
                          std::uint64_t hash_seed = kDefaultHashSeed);

  std::uint32_t hash_dim() const { return hash_dim_; }
  std::uint64_t hash_seed() const { return hash_seed_; }

  // Sorted, duplicate-free feature ids firing at `position`.
  std::vector<FeatureId> featurize(const AlignedSentence& aligned,
                                   std::size_t position) const;
  std::vector<std::vector<FeatureId>> featurize(const AlignedSentence& aligned) const;

  FeatureId feature_id(std::string_view feature) const;

  EmissionMatrix emit(const AlignedSentence& aligned) const;
  EmissionMatrix emit(std::span<const std::vector<FeatureId>> features) const;

  // Ensures every feature of `aligned` has a weight row.
  void register_features(const AlignedSentence& aligned);
  // Returns the row slot of `id`, creating a zero row if needed.
  std::size_t register_feature(FeatureId id);

  // Row slot of `id`, or npos.
  std::size_t slot(FeatureId id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  TagScores weights(FeatureId id) const;
  void set_weights(FeatureId id, const TagScores& row);

  std::size_t num_features() const { return ids_.size(); }
  // Feature id of each slot, in slot order.
  std::span<const FeatureId> ids() const { return ids_; }

  // All weights, slot-major: slot s occupies [s * kNumTags, (s + 1) * kNumTags).
  std::span<double> parameters() { return weights_; }
  std::span<const double> parameters() const { return weights_; }

  // Same hashing and the same weights per feature id; slot order ignored.
  bool operator==(const FeatureEmitter& other) const;

 private:
  std::uint32_t hash_dim_;
  std::uint64_t hash_seed_;
  std::map<FeatureId, std::size_t> slots_;
  std::vector<FeatureId> ids_;
  std::vector<double> weights_;
};

// One sentence worth of externally produced per-subword scores.
// `tag_order` names the column of each score; it holds either the five
// original tags or all ten.
struct LogitsRecord {
  std::string id;
  std::vector<std::string> subwords;
  std::vector<Tag> tag_order;
  std::vector<std::vector<double>> scores;

  bool operator==(const LogitsRecord&) const = default;
};

// Optional first line of a logits file.
struct LogitsHeader {
  std::string format = "auxcrf-logits";
  int version = 1;
  std::string tokenizer;
};

struct LogitsFile {
  LogitsHeader header;
  std::vector<LogitsRecord> records;
};

// JSON lines: an optional {"header": {...}} line, then one
// {"id", "subwords", "tag_order", "scores"} object per line.
// Throws Error(kMalformedRecord) with the 1-based line number.
LogitsFile read_logits(std::istream& in);
LogitsFile read_logits_file(const std::filesystem::path& path);
void write_logits(std::ostream& out, const LogitsFile& file);
void write_logits_file(const std::filesystem::path& path, const LogitsFile& file);

// Reorders the record's columns into tag order and widens five-column
// scores: X-ASPECT <- I-ASPECT, X-SENTIMENT <- I-SENTIMENT, Y <- O, A/Z <- 0.
EmissionMatrix to_emissions(const LogitsRecord& record);

// Record for an emission matrix in the canonical ten-column order.
LogitsRecord to_record(const std::string& id, std::span<const std::string> subwords,
                       const EmissionMatrix& emissions);

// Checks that every sentence has a record with exactly its subwords and
// returns the expanded matrices by sentence id. Throws kMissingSentence or
// kSubwordMismatch (detail = first divergent position).
std::map<std::string, EmissionMatrix> load_external(
    const LogitsFile& file, std::span<const AlignedSentence> corpus);
std::map<std::string, EmissionMatrix> load_external(
    const std::filesystem::path& path, std::span<const AlignedSentence> corpus);

// Word-to-subword segmentation produced alongside external logits.
// spans are inclusive subword indices (the [CLS] marker is index 0).
struct SegmentationRecord {
  std::string id;
  std::vector<std::string> words;
  std::vector<std::string> subwords;
  std::vector<WordSpan> spans;

  // Subword pieces of every word.
  std::vector<std::vector<std::string>> pieces() const;
  bool operator==(const SegmentationRecord&) const = default;
};

std::map<std::string, SegmentationRecord> read_segmentation(std::istream& in);
std::map<std::string, SegmentationRecord> read_segmentation_file(
    const std::filesystem::path& path);
void write_segmentation(std::ostream& out, std::span<const SegmentationRecord> records);

}  // namespace auxcrf

#endif  // AUXCRF_EMIT_H_
