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

#ifndef AUXCRF_CORPUS_H_
#define AUXCRF_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "auxcrf/labelspace.h"

namespace auxcrf {

enum class Split { kTrain, kValidation, kTest };
std::string_view split_name(Split split);

struct Sentence {
  std::string id;
  std::vector<std::string> words;
  std::vector<Tag> labels;  // original tags only, one per word
  Split split = Split::kTrain;

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;

  std::size_t token_count() const;
  std::vector<Sentence> in_split(Split split) const;
  bool operator==(const Corpus&) const = default;
};

struct ConllOptions {
  // When false, a line without a tab is a bare token and gets label O.
  bool labels_required = true;
  Split split = Split::kTrain;
};

// CoNLL-style text: "token<TAB>label" per line, blank line between
// sentences. A "# id = NAME" line before a sentence names it; otherwise
// sentences are named by their 1-based ordinal. Throws
// Error(kMalformedLine) with the 1-based line number, or Error(kEmptyFile).
Corpus read_conll(std::istream& in, const ConllOptions& options = {});
Corpus read_conll_file(const std::filesystem::path& path,
                       const ConllOptions& options = {});
void write_conll(std::ostream& out, const Corpus& corpus);
void write_conll_file(const std::filesystem::path& path, const Corpus& corpus);

// Seeded shuffle, then the first n_train sentences become the training
// split and the rest validation. Throws Error(kInsufficientData) unless
// 0 < n_train < |corpus|.
std::pair<Corpus, Corpus> split_train_validation(const Corpus& corpus,
                                                 std::size_t n_train,
                                                 std::uint64_t seed);

struct SplitStats {
  std::size_t sentences = 0;
  std::array<std::size_t, kNumOriginalTags> label_counts{};
  std::size_t tokens = 0;
  std::size_t unique_tokens = 0;
};

struct CorpusStats {
  std::map<Split, SplitStats> splits;
  // Unique test tokens that also occur in the training split.
  std::size_t overlap_tokens = 0;
  double overlap_percent = 0.0;  // of unique test tokens; 0 without a test split
};

// Counts are taken over word tokens. Token identity is the exact string.
CorpusStats compute_stats(const Corpus& corpus);

std::string format_stats_table(const CorpusStats& stats);
// "key=value" lines, e.g. "train.B-ASPECT=7005", "overlap_percent=75.4".
std::string format_stats_kv(const CorpusStats& stats);

}  // namespace auxcrf

#endif  // AUXCRF_CORPUS_H_
