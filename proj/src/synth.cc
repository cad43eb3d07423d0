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

#include "auxcrf/synth.h"

#include <array>
#include <set>
#include <string_view>

#include "auxcrf/rng.h"

namespace auxcrf {

namespace {

constexpr std::array<std::string_view, 18> kAspects = {
    "kamar",  "kasur",      "lokasi", "pelayanan", "staf",    "sarapan",
    "ac",     "wifi",       "harga",  "tempat",    "bantal",  "handuk",
    "toilet", "fasilitas",  "lobby",  "parkiran",  "shower",  "resepsionis",
};

// Two-word aspects. The first word is always an aspect stem, the second
// only ever appears inside this construction.
struct MultiAspect {
  std::string_view head;
  std::string_view tail;
};
constexpr std::array<MultiAspect, 3> kMultiAspects = {{
    {"kamar", "mandi"}, {"kolam", "renang"}, {"tempat", "tidur"},
}};
// Second word doubles as a sentiment word elsewhere.
constexpr MultiAspect kAmbiguousAspect = {"air", "panas"};

constexpr std::array<std::string_view, 21> kSentiments = {
    "bersih", "nyaman", "kotor", "ramah",  "strategis", "bagus",   "oke",
    "murah",  "mahal",  "dingin", "lambat", "cepat",    "luas",    "sempit",
    "enak",   "bau",    "rusak",  "mantap", "wangi",    "berisik", "panas",
};
constexpr std::array<std::string_view, 4> kIntensifiers = {"banget", "bgt", "sekali", "bener"};
// Pre-modifiers that open a sentiment phrase: "kurang bersih".
constexpr std::array<std::string_view, 4> kModifiers = {"kurang", "tidak", "agak", "sangat"};

constexpr std::array<std::string_view, 6> kOpeners = {
    "secara keseluruhan", "overall", "pas check in", "waktunya singkat tapi",
    "menurut saya", "sayangnya",
};
constexpr std::array<std::string_view, 7> kClosers = {
    "utk transit", "untuk keluarga", "sih", "juga", "di sini", "buat menginap",
    "dan pasti balik lagi",
};
constexpr std::array<std::string_view, 3> kJoiners = {"dan", "tapi", "terus"};

class Builder {
 public:
  explicit Builder(Rng& rng) : rng_(rng) {}

  template <std::size_t N>
  std::string_view pick(const std::array<std::string_view, N>& items) {
    return items[rng_.index(N)];
  }
  bool coin(double p) { return rng_.uniform() < p; }
  std::size_t index(std::size_t n) { return rng_.index(n); }

  void add(std::string_view word, Tag label) {
    sentence_.words.emplace_back(word);
    sentence_.labels.push_back(label);
  }
  void add_phrase(std::string_view phrase, Tag label) {
    std::size_t start = 0;
    while (start < phrase.size()) {
      std::size_t end = phrase.find(' ', start);
      if (end == std::string_view::npos) end = phrase.size();
      add(phrase.substr(start, end - start), label);
      start = end + 1;
    }
  }

  Sentence take() { return std::move(sentence_); }

 private:
  Rng& rng_;
  Sentence sentence_;
};

void add_aspect(Builder& b, bool deterministic) {
  const bool suffix = b.coin(0.35);
  if (!deterministic && b.coin(0.08)) {
    b.add(kAmbiguousAspect.head, Tag::kBAspect);
    b.add(kAmbiguousAspect.tail, Tag::kIAspect);
    return;
  }
  if (b.coin(0.25)) {
    const MultiAspect& m = kMultiAspects[b.index(kMultiAspects.size())];
    b.add(m.head, Tag::kBAspect);
    b.add(suffix ? std::string(m.tail) + "nya" : std::string(m.tail), Tag::kIAspect);
    return;
  }
  const std::string_view stem = b.pick(kAspects);
  b.add(suffix ? std::string(stem) + "nya" : std::string(stem), Tag::kBAspect);
}

void add_sentiment(Builder& b, bool deterministic) {
  if (!deterministic && b.coin(0.25)) {
    b.add(b.pick(kModifiers), Tag::kBSentiment);
    b.add(b.pick(kSentiments), Tag::kISentiment);
    return;
  }
  b.add(b.pick(kSentiments), Tag::kBSentiment);
  if (b.coin(0.35)) b.add(b.pick(kIntensifiers), Tag::kISentiment);
}

void add_clause(Builder& b, bool deterministic) {
  if (b.coin(0.75)) {
    add_aspect(b, deterministic);
    if (b.coin(0.2)) b.add("yang", Tag::kO);
    add_sentiment(b, deterministic);
  } else {
    add_sentiment(b, deterministic);
    add_aspect(b, deterministic);
  }
}

}  // namespace

Corpus synthesize(const SynthOptions& options) {
  Corpus corpus;
  Rng rng(options.seed);
  const bool det = options.deterministic_labels;
  for (std::size_t n = 0; n < options.sentences; ++n) {
    Builder b(rng);
    if (b.coin(0.3)) b.add_phrase(b.pick(kOpeners), Tag::kO);
    add_clause(b, det);
    const std::size_t extra = rng.index(3);
    for (std::size_t k = 0; k < extra; ++k) {
      b.add(b.pick(kJoiners), Tag::kO);
      add_clause(b, det);
    }
    if (b.coin(0.35)) b.add_phrase(b.pick(kClosers), Tag::kO);
    Sentence s = b.take();
    s.id = std::to_string(n + 1);
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

std::vector<std::string> synthetic_vocabulary() {
  std::set<std::string> vocab;
  auto add_all = [&vocab](auto const& items) {
    for (std::string_view w : items) vocab.emplace(w);
  };
  add_all(kAspects);
  add_all(kSentiments);
  add_all(kModifiers);
  add_all(kJoiners);
  for (const auto& m : kMultiAspects) {
    vocab.emplace(m.head);
    vocab.emplace(m.tail);
  }
  vocab.emplace(kAmbiguousAspect.head);
  for (std::string_view w : {"yang", "secara", "keseluruhan", "overall", "pas", "check",
                             "in", "waktu", "singkat", "menurut", "saya", "sayang",
                             "untuk", "keluarga", "sih", "juga", "di", "sini", "buat",
                             "menginap", "pasti", "balik", "lagi", "banget", "sekali",
                             "bener", "ut", "bg"}) {
    vocab.emplace(w);
  }
  // Deliberately absent: "utk", "bgt", "berisik", "strategis", "resepsionis"
  // so those split into several pieces.
  vocab.erase("berisik");
  vocab.erase("strategis");
  vocab.erase("resepsionis");
  for (std::string_view w : {"beri", "strate", "resepsi", "##nya", "##k", "##t", "##sik",
                             "##gis", "##onis", "##an"}) {
    vocab.emplace(w);
  }
  return {vocab.begin(), vocab.end()};
}

}  // namespace auxcrf
