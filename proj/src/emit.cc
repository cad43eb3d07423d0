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

#include "auxcrf/emit.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "auxcrf/error.h"
#include "auxcrf/segmenter.h"
#include "json.hpp"

namespace auxcrf {

using nlohmann::json;

std::uint64_t hash_feature(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x100000001b3ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  return out;
}

std::string join_chars(std::span<const std::string_view> chars) {
  std::string out;
  for (auto c : chars) out += c;
  return out;
}

}  // namespace

FeatureEmitter::FeatureEmitter(std::uint32_t hash_dim, std::uint64_t hash_seed)
    : hash_dim_(hash_dim), hash_seed_(hash_seed) {
  if (hash_dim < kMinHashDim || (hash_dim & (hash_dim - 1)) != 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "hash dimension must be a power of two >= 65536, got " +
                    std::to_string(hash_dim));
  }
}

FeatureId FeatureEmitter::feature_id(std::string_view feature) const {
  return static_cast<FeatureId>(hash_feature(feature, hash_seed_) & (hash_dim_ - 1));
}

std::vector<FeatureId> FeatureEmitter::featurize(const AlignedSentence& aligned,
                                                 std::size_t position) const {
  const std::size_t len = aligned.subwords.size();
  std::vector<std::string> names;
  const std::string& piece = aligned.subwords[position];
  names.push_back("sw=" + piece);
  if (piece == kClsToken && position == 0) names.emplace_back("cls");
  if (piece == kSepToken && position + 1 == len) names.emplace_back("sep");
  if (piece.starts_with(kContinuationPrefix)) names.emplace_back("cont");
  names.push_back(position > 0 ? "prev=" + aligned.subwords[position - 1] : "prev=^");
  names.push_back(position + 1 < len ? "next=" + aligned.subwords[position + 1] : "next=$");

  // Word-level templates for subwords that belong to a word.
  for (std::size_t i = 0; i < aligned.spans.size(); ++i) {
    const WordSpan& span = aligned.spans[i];
    if (position < span.first || position > span.last) continue;
    if (position == span.first) names.emplace_back("first");
    const std::string word = ascii_lower(aligned.words[i]);
    names.push_back("w=" + word);
    const auto chars = utf8_characters(word);
    for (std::size_t n = 1; n <= 3 && n <= chars.size(); ++n) {
      const std::span<const std::string_view> all(chars);
      names.push_back("p" + std::to_string(n) + "=" + join_chars(all.first(n)));
      names.push_back("s" + std::to_string(n) + "=" + join_chars(all.last(n)));
    }
    break;
  }

  std::vector<FeatureId> ids;
  ids.reserve(names.size());
  for (const auto& name : names) ids.push_back(feature_id(name));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::vector<FeatureId>> FeatureEmitter::featurize(
    const AlignedSentence& aligned) const {
  std::vector<std::vector<FeatureId>> out;
  out.reserve(aligned.subwords.size());
  for (std::size_t t = 0; t < aligned.subwords.size(); ++t) {
    out.push_back(featurize(aligned, t));
  }
  return out;
}

EmissionMatrix FeatureEmitter::emit(std::span<const std::vector<FeatureId>> features) const {
  EmissionMatrix out(features.size());
  for (std::size_t t = 0; t < features.size(); ++t) {
    auto row = out[t];
    for (FeatureId id : features[t]) {
      const std::size_t s = slot(id);
      if (s == npos) continue;
      for (std::size_t k = 0; k < kNumTags; ++k) row[k] += weights_[s * kNumTags + k];
    }
  }
  return out;
}

EmissionMatrix FeatureEmitter::emit(const AlignedSentence& aligned) const {
  return emit(featurize(aligned));
}

void FeatureEmitter::register_features(const AlignedSentence& aligned) {
  for (std::size_t t = 0; t < aligned.subwords.size(); ++t) {
    for (FeatureId id : featurize(aligned, t)) register_feature(id);
  }
}

std::size_t FeatureEmitter::register_feature(FeatureId id) {
  auto [it, inserted] = slots_.try_emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    weights_.resize(weights_.size() + kNumTags, 0.0);
  }
  return it->second;
}

std::size_t FeatureEmitter::slot(FeatureId id) const {
  auto it = slots_.find(id);
  return it == slots_.end() ? npos : it->second;
}

TagScores FeatureEmitter::weights(FeatureId id) const {
  TagScores row{};
  const std::size_t s = slot(id);
  if (s != npos) std::copy_n(weights_.begin() + s * kNumTags, kNumTags, row.begin());
  return row;
}

void FeatureEmitter::set_weights(FeatureId id, const TagScores& row) {
  const std::size_t s = register_feature(id);
  std::copy(row.begin(), row.end(), weights_.begin() + s * kNumTags);
}

bool FeatureEmitter::operator==(const FeatureEmitter& other) const {
  if (hash_dim_ != other.hash_dim_ || hash_seed_ != other.hash_seed_ ||
      ids_.size() != other.ids_.size()) {
    return false;
  }
  for (FeatureId id : ids_) {
    if (other.slot(id) == npos || weights(id) != other.weights(id)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// External logits.

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord,
              "line " + std::to_string(line) + ": " + what, line);
}

LogitsRecord parse_record(const json& j, std::size_t line) {
  LogitsRecord record;
  for (const char* key : {"id", "subwords", "tag_order", "scores"}) {
    if (!j.contains(key)) malformed(line, std::string("missing field '") + key + "'");
  }
  if (j["id"].is_string()) {
    record.id = j["id"].get<std::string>();
  } else if (j["id"].is_number_integer()) {
    record.id = std::to_string(j["id"].get<long long>());
  } else {
    malformed(line, "id must be a string");
  }
  if (!j["subwords"].is_array()) malformed(line, "subwords must be an array");
  for (const auto& s : j["subwords"]) {
    if (!s.is_string()) malformed(line, "subwords must be strings");
    record.subwords.push_back(s.get<std::string>());
  }
  if (!j["tag_order"].is_array()) malformed(line, "tag_order must be an array");
  for (const auto& t : j["tag_order"]) {
    if (!t.is_string()) malformed(line, "tag_order must be strings");
    try {
      record.tag_order.push_back(parse_tag(t.get<std::string>()));
    } catch (const Error& e) {
      malformed(line, e.what());
    }
  }
  const std::size_t width = record.tag_order.size();
  if (width != kNumOriginalTags && width != kNumTags) {
    malformed(line, "tag_order must list 5 or 10 tags");
  }
  std::vector<bool> seen(kNumTags, false);
  for (Tag tag : record.tag_order) {
    if (seen[index_of(tag)]) malformed(line, "duplicate tag in tag_order");
    if (width == kNumOriginalTags && !is_original(tag)) {
      malformed(line, "a 5-column tag_order may only name original tags");
    }
    seen[index_of(tag)] = true;
  }
  if (!j["scores"].is_array() || j["scores"].size() != record.subwords.size()) {
    malformed(line, "scores must have one row per subword");
  }
  for (const auto& row : j["scores"]) {
    if (!row.is_array() || row.size() != width) {
      malformed(line, "every score row must have " + std::to_string(width) + " columns");
    }
    std::vector<double> values;
    values.reserve(width);
    for (const auto& v : row) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        malformed(line, "scores must be finite numbers");
      }
      values.push_back(v.get<double>());
    }
    record.scores.push_back(std::move(values));
  }
  if (record.subwords.size() < 2) malformed(line, "a record needs at least the two markers");
  return record;
}

}  // namespace

LogitsFile read_logits(std::istream& in) {
  LogitsFile file;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      malformed(line, e.what());
    }
    if (!j.is_object()) malformed(line, "expected a JSON object");
    if (j.contains("header")) {
      const json& h = j["header"];
      if (!h.is_object()) malformed(line, "header must be an object");
      file.header.format = h.value("format", file.header.format);
      file.header.version = h.value("version", file.header.version);
      file.header.tokenizer = h.value("tokenizer", std::string());
      continue;
    }
    file.records.push_back(parse_record(j, line));
  }
  return file;
}

LogitsFile read_logits_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open logits file " + path.string());
  return read_logits(in);
}

void write_logits(std::ostream& out, const LogitsFile& file) {
  json header = {{"format", file.header.format}, {"version", file.header.version}};
  if (!file.header.tokenizer.empty()) header["tokenizer"] = file.header.tokenizer;
  out << json{{"header", header}}.dump() << '\n';
  for (const LogitsRecord& r : file.records) {
    json tags = json::array();
    for (Tag t : r.tag_order) tags.push_back(std::string(to_string(t)));
    json j;
    j["id"] = r.id;
    j["subwords"] = r.subwords;
    j["tag_order"] = tags;
    j["scores"] = r.scores;
    out << j.dump() << '\n';
  }
}

void write_logits_file(const std::filesystem::path& path, const LogitsFile& file) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_logits(out, file);
}

EmissionMatrix to_emissions(const LogitsRecord& record) {
  EmissionMatrix out(record.scores.size());
  for (std::size_t t = 0; t < record.scores.size(); ++t) {
    for (std::size_t c = 0; c < record.tag_order.size(); ++c) {
      out.at(t, record.tag_order[c]) = record.scores[t][c];
    }
    if (record.tag_order.size() == kNumOriginalTags) {
      out.at(t, Tag::kXAspect) = out.at(t, Tag::kIAspect);
      out.at(t, Tag::kXSentiment) = out.at(t, Tag::kISentiment);
      out.at(t, Tag::kY) = out.at(t, Tag::kO);
      out.at(t, Tag::kA) = 0.0;
      out.at(t, Tag::kZ) = 0.0;
    }
  }
  return out;
}

LogitsRecord to_record(const std::string& id, std::span<const std::string> subwords,
                       const EmissionMatrix& emissions) {
  LogitsRecord r;
  r.id = id;
  r.subwords.assign(subwords.begin(), subwords.end());
  r.tag_order.assign(kAllTags.begin(), kAllTags.end());
  for (std::size_t t = 0; t < emissions.length(); ++t) {
    const auto row = emissions[t];
    r.scores.emplace_back(row.begin(), row.end());
  }
  return r;
}

std::map<std::string, EmissionMatrix> load_external(
    const LogitsFile& file, std::span<const AlignedSentence> corpus) {
  std::map<std::string, const LogitsRecord*> by_id;
  for (const LogitsRecord& r : file.records) by_id.emplace(r.id, &r);

  std::map<std::string, EmissionMatrix> out;
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const AlignedSentence& sentence = corpus[n];
    auto it = by_id.find(sentence.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMissingSentence,
                  "no logits record for sentence '" + sentence.id + "'", n);
    }
    const LogitsRecord& record = *it->second;
    const std::size_t common = std::min(record.subwords.size(), sentence.subwords.size());
    std::size_t diverge = common;
    for (std::size_t t = 0; t < common; ++t) {
      if (record.subwords[t] != sentence.subwords[t]) {
        diverge = t;
        break;
      }
    }
    if (diverge < common || record.subwords.size() != sentence.subwords.size()) {
      auto show = [](std::span<const std::string> s, std::size_t t) {
        return t < s.size() ? "'" + s[t] + "'" : std::string("<end>");
      };
      throw Error(ErrorCode::kSubwordMismatch,
                  "sentence '" + sentence.id + "' diverges at subword " +
                      std::to_string(diverge) + ": logits have " +
                      show(record.subwords, diverge) + ", corpus has " +
                      show(sentence.subwords, diverge),
                  diverge);
    }
    out.emplace(sentence.id, to_emissions(record));
  }
  return out;
}

std::map<std::string, EmissionMatrix> load_external(
    const std::filesystem::path& path, std::span<const AlignedSentence> corpus) {
  return load_external(read_logits_file(path), corpus);
}

// ---------------------------------------------------------------------------
// Segmentation sidecar.

std::vector<std::vector<std::string>> SegmentationRecord::pieces() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(spans.size());
  for (const WordSpan& span : spans) {
    out.emplace_back(subwords.begin() + static_cast<std::ptrdiff_t>(span.first),
                     subwords.begin() + static_cast<std::ptrdiff_t>(span.last) + 1);
  }
  return out;
}

std::map<std::string, SegmentationRecord> read_segmentation(std::istream& in) {
  std::map<std::string, SegmentationRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    SegmentationRecord r;
    try {
      const json j = json::parse(text);
      if (j.contains("header")) continue;
      r.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                    : std::to_string(j.at("id").get<long long>());
      r.words = j.at("words").get<std::vector<std::string>>();
      r.subwords = j.at("subwords").get<std::vector<std::string>>();
      for (const auto& s : j.at("spans")) {
        r.spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      }
    } catch (const json::exception& e) {
      malformed(line, e.what());
    }
    if (r.spans.size() != r.words.size()) malformed(line, "one span per word required");
    std::size_t expect = 1;
    for (const WordSpan& s : r.spans) {
      if (s.first != expect || s.last < s.first || s.last + 1 >= r.subwords.size()) {
        malformed(line, "spans must tile the subwords between the markers");
      }
      expect = s.last + 1;
    }
    if (expect + 1 != r.subwords.size()) {
      malformed(line, "spans must tile the subwords between the markers");
    }
    out.emplace(r.id, std::move(r));
  }
  return out;
}

std::map<std::string, SegmentationRecord> read_segmentation_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open segmentation file " + path.string());
  return read_segmentation(in);
}

void write_segmentation(std::ostream& out, std::span<const SegmentationRecord> records) {
  for (const SegmentationRecord& r : records) {
    json spans = json::array();
    for (const WordSpan& s : r.spans) spans.push_back({s.first, s.last});
    json j;
    j["id"] = r.id;
    j["words"] = r.words;
    j["subwords"] = r.subwords;
    j["spans"] = spans;
    out << j.dump() << '\n';
  }
}

}  // namespace auxcrf
