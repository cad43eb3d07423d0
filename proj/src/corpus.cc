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

#include "auxcrf/corpus.h"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "auxcrf/error.h"
#include "auxcrf/rng.h"

namespace auxcrf {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.words.size();
  return n;
}

std::vector<Sentence> Corpus::in_split(Split split) const {
  std::vector<Sentence> out;
  for (const auto& s : sentences) {
    if (s.split == split) out.push_back(s);
  }
  return out;
}

namespace {

constexpr std::string_view kIdPrefix = "# id = ";

}  // namespace

Corpus read_conll(std::istream& in, const ConllOptions& options) {
  Corpus corpus;
  Sentence current;
  std::string pending_id;
  std::string line;
  std::size_t line_no = 0;
  bool saw_content = false;

  auto flush = [&] {
    if (current.words.empty()) return;
    current.id = pending_id.empty() ? std::to_string(corpus.sentences.size() + 1)
                                    : pending_id;
    current.split = options.split;
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    pending_id.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    saw_content = true;
    const auto tab = line.find('\t');
    if (tab == std::string::npos && line.starts_with('#')) {
      if (line.starts_with(kIdPrefix) && current.words.empty()) {
        pending_id = line.substr(kIdPrefix.size());
      }
      continue;
    }

    std::string token;
    Tag label = Tag::kO;
    if (tab == std::string::npos) {
      if (options.labels_required) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(line_no) + ": expected token<TAB>label",
                    line_no);
      }
      token = line;
    } else {
      token = line.substr(0, tab);
      std::string label_text = line.substr(tab + 1);
      if (token.empty() || label_text.empty() ||
          label_text.find('\t') != std::string::npos) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(line_no) + ": expected token<TAB>label",
                    line_no);
      }
      try {
        label = parse_tag(label_text);
      } catch (const Error&) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(line_no) + ": unknown label '" +
                        label_text + "'",
                    line_no);
      }
      if (!is_original(label)) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(line_no) + ": auxiliary label '" +
                        label_text + "' in corpus",
                    line_no);
      }
    }
    current.words.push_back(std::move(token));
    current.labels.push_back(label);
  }
  flush();

  if (!saw_content || corpus.sentences.empty()) {
    throw Error(ErrorCode::kEmptyFile, "corpus has no sentences");
  }
  return corpus;
}

Corpus read_conll_file(const std::filesystem::path& path, const ConllOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  return read_conll(in, options);
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  for (std::size_t n = 0; n < corpus.sentences.size(); ++n) {
    const Sentence& s = corpus.sentences[n];
    if (n > 0) out << '\n';
    if (s.id != std::to_string(n + 1)) out << kIdPrefix << s.id << '\n';
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      out << s.words[i] << '\t' << to_string(s.labels[i]) << '\n';
    }
  }
}

void write_conll_file(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_conll(out, corpus);
}

std::pair<Corpus, Corpus> split_train_validation(const Corpus& corpus,
                                                 std::size_t n_train,
                                                 std::uint64_t seed) {
  if (n_train == 0 || n_train >= corpus.sentences.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "cannot take " + std::to_string(n_train) + " training sentences from " +
                    std::to_string(corpus.sentences.size()) + " and leave a validation split");
  }
  std::vector<std::size_t> order(corpus.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::pair<Corpus, Corpus> out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    Sentence s = corpus.sentences[order[k]];
    if (k < n_train) {
      s.split = Split::kTrain;
      out.first.sentences.push_back(std::move(s));
    } else {
      s.split = Split::kValidation;
      out.second.sentences.push_back(std::move(s));
    }
  }
  return out;
}

CorpusStats compute_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::map<Split, std::set<std::string>> vocab;
  for (const Sentence& s : corpus.sentences) {
    SplitStats& st = stats.splits[s.split];
    ++st.sentences;
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      ++st.label_counts[index_of(s.labels[i])];
      ++st.tokens;
      vocab[s.split].insert(s.words[i]);
    }
  }
  for (auto& [split, st] : stats.splits) st.unique_tokens = vocab[split].size();

  const auto& test = vocab[Split::kTest];
  const auto& train = vocab[Split::kTrain];
  for (const auto& token : test) {
    if (train.contains(token)) ++stats.overlap_tokens;
  }
  if (!test.empty()) {
    stats.overlap_percent =
        100.0 * static_cast<double>(stats.overlap_tokens) / static_cast<double>(test.size());
  }
  return stats;
}

std::string format_stats_table(const CorpusStats& stats) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "Label";
  for (const auto& [split, st] : stats.splits) {
    os << std::right << std::setw(12) << split_name(split);
  }
  os << '\n';
  for (Tag tag : kOriginalTags) {
    os << std::left << std::setw(14) << report_name(tag);
    for (const auto& [split, st] : stats.splits) {
      os << std::right << std::setw(12) << st.label_counts[index_of(tag)];
    }
    os << '\n';
  }
  os << std::left << std::setw(14) << "Total";
  for (const auto& [split, st] : stats.splits) os << std::right << std::setw(12) << st.tokens;
  os << '\n' << std::left << std::setw(14) << "Sentences";
  for (const auto& [split, st] : stats.splits) {
    os << std::right << std::setw(12) << st.sentences;
  }
  os << '\n' << std::left << std::setw(14) << "Unique tokens";
  for (const auto& [split, st] : stats.splits) {
    os << std::right << std::setw(12) << st.unique_tokens;
  }
  os << '\n';
  if (stats.splits.contains(Split::kTest)) {
    os << "Test tokens seen in train: " << stats.overlap_tokens << " ("
       << std::fixed << std::setprecision(1) << stats.overlap_percent << "%)\n";
  }
  return os.str();
}

std::string format_stats_kv(const CorpusStats& stats) {
  std::ostringstream os;
  for (const auto& [split, st] : stats.splits) {
    const std::string prefix(split_name(split));
    os << prefix << ".sentences=" << st.sentences << '\n';
    for (Tag tag : kOriginalTags) {
      os << prefix << '.' << report_name(tag) << '=' << st.label_counts[index_of(tag)] << '\n';
    }
    os << prefix << ".total=" << st.tokens << '\n';
    os << prefix << ".unique_tokens=" << st.unique_tokens << '\n';
  }
  os << "overlap_tokens=" << stats.overlap_tokens << '\n';
  os << "overlap_percent=" << std::fixed << std::setprecision(4) << stats.overlap_percent
     << '\n';
  return os.str();
}

}  // namespace auxcrf
