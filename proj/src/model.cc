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

#include "auxcrf/model.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "auxcrf/error.h"
#include "auxcrf/segmenter.h"

namespace auxcrf {

namespace {

constexpr std::string_view kMagic = "auxcrf-model";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, ptr);
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kModelFormat, "model line " + std::to_string(line) + ": " + what,
              line);
}

double parse_hex(std::string_view text, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  bool negative = false;
  if (first != last && *first == '-') {
    negative = true;
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::hex);
  if (ec != std::errc() || ptr != last) bad(line, "bad number '" + std::string(text) + "'");
  return negative ? -v : v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next() {
    std::string text;
    if (!std::getline(in_, text)) bad(line_ + 1, "unexpected end of file");
    ++line_;
    std::istringstream is(text);
    std::vector<std::string> fields;
    for (std::string f; is >> f;) fields.push_back(f);
    return fields;
  }

  // Next line, which must start with `key` and have `arity` values.
  std::vector<std::string> expect(std::string_view key, std::size_t arity) {
    auto fields = next();
    if (fields.empty() || fields[0] != key) bad(line_, "expected '" + std::string(key) + "'");
    if (fields.size() != arity + 1) bad(line_, "wrong number of values for " + std::string(key));
    return fields;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::uint64_t parse_uint(const std::string& text, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    bad(line, "bad integer '" + text + "'");
  }
  return v;
}

bool parse_flag(const std::string& text, std::size_t line) {
  if (text == "0") return false;
  if (text == "1") return true;
  bad(line, "expected 0 or 1");
}

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << hex(row[k]);
}

TagScores read_row(const std::vector<std::string>& fields, std::size_t offset,
                   std::size_t line) {
  TagScores row{};
  for (std::size_t k = 0; k < kNumTags; ++k) row[k] = parse_hex(fields[offset + k], line);
  return row;
}

}  // namespace

void save_model(std::ostream& out, const Model& model) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "tags";
  for (Tag t : kAllTags) out << ' ' << to_string(t);
  out << '\n';
  out << "source " << (model.source == EmissionSource::kFeatures ? "features" : "external")
      << '\n';
  out << "mask_in_training " << (model.mask_in_training ? 1 : 0) << '\n';
  out << "mask_in_decoding " << (model.mask_in_decoding ? 1 : 0) << '\n';
  out << "vocabulary " << (model.vocabulary.empty() ? "-" : model.vocabulary) << '\n';
  out << "lowercase " << (model.lowercase ? 1 : 0) << '\n';
  out << "max_subwords " << model.max_subwords << '\n';
  out << "hash_dim " << model.emitter.hash_dim() << '\n';
  out << "hash_seed " << model.emitter.hash_seed() << '\n';
  out << "start ";
  write_row(out, model.crf.start);
  out << "\nend ";
  write_row(out, model.crf.end);
  out << "\ntransitions\n";
  for (const auto& row : model.crf.transitions) {
    write_row(out, row);
    out << '\n';
  }

  std::vector<FeatureId> ids(model.emitter.ids().begin(), model.emitter.ids().end());
  std::sort(ids.begin(), ids.end());
  out << "features " << ids.size() << '\n';
  for (FeatureId id : ids) {
    out << id << ' ';
    write_row(out, model.emitter.weights(id));
    out << '\n';
  }
  out << "end-model\n";
}

Model load_model(std::istream& in) {
  LineReader reader(in);
  auto header = reader.expect(kMagic, 1);
  if (header[1] != std::to_string(kVersion)) bad(1, "unsupported version " + header[1]);
  auto tags = reader.expect("tags", kNumTags);
  for (std::size_t k = 0; k < kNumTags; ++k) {
    if (tags[k + 1] != to_string(kAllTags[k])) bad(reader.line(), "unexpected tag order");
  }

  Model model;
  auto source = reader.expect("source", 1);
  if (source[1] == "features") {
    model.source = EmissionSource::kFeatures;
  } else if (source[1] == "external") {
    model.source = EmissionSource::kExternal;
  } else {
    bad(reader.line(), "unknown emission source " + source[1]);
  }
  model.mask_in_training = parse_flag(reader.expect("mask_in_training", 1)[1], reader.line());
  model.mask_in_decoding = parse_flag(reader.expect("mask_in_decoding", 1)[1], reader.line());
  const std::string vocab = reader.expect("vocabulary", 1)[1];
  model.vocabulary = vocab == "-" ? std::string() : vocab;
  model.lowercase = parse_flag(reader.expect("lowercase", 1)[1], reader.line());
  model.max_subwords = parse_uint(reader.expect("max_subwords", 1)[1], reader.line());
  const auto hash_dim = parse_uint(reader.expect("hash_dim", 1)[1], reader.line());
  const auto hash_seed = parse_uint(reader.expect("hash_seed", 1)[1], reader.line());
  try {
    model.emitter = FeatureEmitter(static_cast<std::uint32_t>(hash_dim), hash_seed);
  } catch (const Error& e) {
    bad(reader.line(), e.what());
  }

  model.crf.start = read_row(reader.expect("start", kNumTags), 1, reader.line());
  model.crf.end = read_row(reader.expect("end", kNumTags), 1, reader.line());
  reader.expect("transitions", 0);
  for (auto& row : model.crf.transitions) {
    auto fields = reader.next();
    if (fields.size() != kNumTags) bad(reader.line(), "transition row needs 10 values");
    row = read_row(fields, 0, reader.line());
  }
  const auto count = parse_uint(reader.expect("features", 1)[1], reader.line());
  for (std::uint64_t n = 0; n < count; ++n) {
    auto fields = reader.next();
    if (fields.size() != kNumTags + 1) bad(reader.line(), "feature row needs id + 10 values");
    const auto id = parse_uint(fields[0], reader.line());
    if (id >= hash_dim) bad(reader.line(), "feature id outside hash space");
    model.emitter.set_weights(static_cast<FeatureId>(id), read_row(fields, 1, reader.line()));
  }
  reader.expect("end-model", 0);
  return model;
}

void save_model_file(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write model " + path.string());
  save_model(out, model);
}

Model load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  return load_model(in);
}

Segmenter make_segmenter(const Model& model) {
  if (model.vocabulary.empty()) return whole_word_segmenter();
  return WordPieceSegmenter::from_file(model.vocabulary, model.lowercase);
}

EmissionMatrix model_emissions(const Model& model, const AlignedSentence& aligned,
                               const EmissionMatrix* external) {
  if (model.source == EmissionSource::kFeatures) return model.emitter.emit(aligned);
  if (external == nullptr) {
    throw Error(ErrorCode::kMissingSentence,
                "model uses external emissions but none were given for sentence '" +
                    aligned.id + "'");
  }
  if (external->length() != aligned.size()) {
    throw Error(ErrorCode::kLengthMismatch, "external emissions for sentence '" + aligned.id +
                                                "' have the wrong length");
  }
  return *external;
}

Prediction predict(const Model& model, const AlignedSentence& aligned,
                   const EmissionMatrix* external) {
  static const ConstraintMask kMask = default_constraint_mask();
  const EmissionMatrix emissions = model_emissions(model, aligned, external);
  Decoded decoded = viterbi(model.crf, emissions, model.mask_in_decoding ? &kMask : nullptr);
  CollapseResult collapsed = collapse(aligned, decoded.labels);
  Prediction out;
  out.subword_labels = std::move(decoded.labels);
  out.word_labels = std::move(collapsed.labels);
  out.repaired_words = std::move(collapsed.repaired_words);
  out.score = decoded.score;
  return out;
}

}  // namespace auxcrf
