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

#include "auxcrf/eval.h"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "auxcrf/error.h"

namespace auxcrf {

double Prf::precision() const {
  return predicted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted);
}

double Prf::recall() const {
  return gold == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold);
}

double Prf::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Prf& Prf::operator+=(const Prf& other) {
  correct += other.correct;
  predicted += other.predicted;
  gold += other.gold;
  return *this;
}

Prf TokenScores::micro() const {
  Prf total;
  for (Tag tag : kOriginalTags) {
    if (tag != Tag::kO) total += per_label[index_of(tag)];
  }
  return total;
}

Prf EntityScores::micro() const {
  Prf total = aspect;
  total += sentiment;
  return total;
}

namespace {

void check_shapes(LabelSequences gold, LabelSequences pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(gold.size()) + " gold sentences but " +
                    std::to_string(pred.size()) + " predicted");
  }
  for (std::size_t n = 0; n < gold.size(); ++n) {
    if (gold[n].size() != pred[n].size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "sentence " + std::to_string(n) + " has " +
                      std::to_string(gold[n].size()) + " gold labels but " +
                      std::to_string(pred[n].size()) + " predicted",
                  n);
    }
  }
}

// Auxiliary tags are scored under the original tag they stand for.
Tag scored_tag(Tag tag) {
  switch (tag) {
    case Tag::kXAspect: return Tag::kIAspect;
    case Tag::kXSentiment: return Tag::kISentiment;
    case Tag::kY:
    case Tag::kA:
    case Tag::kZ:
      return Tag::kO;
    default:
      return tag;
  }
}

Prf& family_slot(EntityScores& scores, Family family) {
  return family == Family::kAspect ? scores.aspect : scores.sentiment;
}

}  // namespace

TokenScores token_f1(LabelSequences gold, LabelSequences pred) {
  check_shapes(gold, pred);
  TokenScores scores;
  for (std::size_t n = 0; n < gold.size(); ++n) {
    for (std::size_t i = 0; i < gold[n].size(); ++i) {
      const Tag g = scored_tag(gold[n][i]);
      const Tag p = scored_tag(pred[n][i]);
      ++scores.per_label[index_of(g)].gold;
      ++scores.per_label[index_of(p)].predicted;
      if (g == p) ++scores.per_label[index_of(g)].correct;
    }
  }
  return scores;
}

std::vector<EntitySpan> extract_spans(std::span<const Tag> labels) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Tag tag = scored_tag(labels[i]);
    const Family family = family_of(tag);
    const bool begin = tag == Tag::kBAspect || tag == Tag::kBSentiment;
    const bool inside = tag == Tag::kIAspect || tag == Tag::kISentiment;
    if (inside && open && spans.back().type == family) {
      spans.back().last = i;
      continue;
    }
    if (begin || inside) {
      spans.push_back({i, i, family, begin});
      open = true;
    } else {
      open = false;
    }
  }
  return spans;
}

EntityScores entity_f1(LabelSequences gold, LabelSequences pred,
                       EntityDefinition definition) {
  check_shapes(gold, pred);
  EntityScores scores;
  for (std::size_t n = 0; n < gold.size(); ++n) {
    if (definition == EntityDefinition::kCollapsedToken) {
      for (std::size_t i = 0; i < gold[n].size(); ++i) {
        const Family g = family_of(scored_tag(gold[n][i]));
        const Family p = family_of(scored_tag(pred[n][i]));
        if (g != Family::kOther) ++family_slot(scores, g).gold;
        if (p != Family::kOther) ++family_slot(scores, p).predicted;
        if (g == p && g != Family::kOther) ++family_slot(scores, g).correct;
      }
      continue;
    }
    const auto gold_spans = extract_spans(gold[n]);
    const auto pred_spans = extract_spans(pred[n]);
    std::set<std::tuple<std::size_t, std::size_t, Family>> gold_set;
    for (const auto& s : gold_spans) {
      ++family_slot(scores, s.type).gold;
      if (s.valid_start) gold_set.emplace(s.first, s.last, s.type);
    }
    for (const auto& s : pred_spans) {
      ++family_slot(scores, s.type).predicted;
      if (s.valid_start && gold_set.contains({s.first, s.last, s.type})) {
        ++family_slot(scores, s.type).correct;
      }
    }
  }
  return scores;
}

std::vector<std::size_t> bio_violations(std::span<const Tag> labels) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Tag begin;
    if (labels[i] == Tag::kIAspect) {
      begin = Tag::kBAspect;
    } else if (labels[i] == Tag::kISentiment) {
      begin = Tag::kBSentiment;
    } else {
      continue;
    }
    if (i == 0 || (labels[i - 1] != begin && labels[i - 1] != labels[i])) {
      out.push_back(i);
    }
  }
  return out;
}

ViolationCensus audit_bio(std::span<const Sentence> predicted) {
  constexpr std::size_t kWindow = 2;
  ViolationCensus census;
  for (const Sentence& s : predicted) {
    for (std::size_t pos : bio_violations(s.labels)) {
      BioViolation v;
      v.sentence_id = s.id;
      v.position = pos;
      v.tag = s.labels[pos];
      if (pos > 0) v.previous = s.labels[pos - 1];
      const std::size_t from = pos >= kWindow ? pos - kWindow : 0;
      const std::size_t to = std::min(s.labels.size(), pos + kWindow + 1);
      for (std::size_t i = from; i < to; ++i) {
        if (!v.context.empty()) v.context += ' ';
        if (i < s.words.size()) v.context += s.words[i];
        v.context += '(';
        v.context += to_string(s.labels[i]);
        v.context += ')';
      }
      census.violations.push_back(std::move(v));
    }
  }
  return census;
}

void write_violations_csv(std::ostream& out, const ViolationCensus& census) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  out << "sentence_id,position,previous,tag,context\n";
  for (const auto& v : census.violations) {
    out << quote(v.sentence_id) << ',' << v.position << ','
        << (v.previous ? to_string(*v.previous) : std::string_view("^")) << ','
        << to_string(v.tag) << ',' << quote(v.context) << '\n';
  }
}

Tag argmax_label(const std::array<std::size_t, kNumOriginalTags>& counts) {
  Tag best = kOriginalTags[0];
  for (Tag tag : kOriginalTags) {
    const std::size_t c = counts[index_of(tag)];
    const std::size_t b = counts[index_of(best)];
    if (c > b || (c == b && to_string(tag) < to_string(best))) best = tag;
  }
  return best;
}

ArgmaxBaseline ArgmaxBaseline::fit(std::span<const Sentence> train) {
  ArgmaxBaseline baseline;
  std::array<std::size_t, kNumOriginalTags> global{};
  for (const Sentence& s : train) {
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      const std::size_t k = index_of(s.labels[i]);
      ++baseline.counts_[s.words[i]][k];
      ++global[k];
    }
  }
  if (baseline.counts_.empty()) {
    throw Error(ErrorCode::kEmptyTraining, "baseline needs at least one training token");
  }
  baseline.majority_ = argmax_label(global);
  return baseline;
}

Tag ArgmaxBaseline::predict(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? majority_ : argmax_label(it->second);
}

std::vector<Tag> ArgmaxBaseline::predict(std::span<const std::string> words) const {
  std::vector<Tag> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(predict(w));
  return out;
}

EvalReport evaluate(const Corpus& gold, const Corpus& pred, std::size_t repairs) {
  std::vector<std::vector<Tag>> g;
  std::vector<std::vector<Tag>> p;
  for (const auto& s : gold.sentences) g.push_back(s.labels);
  for (const auto& s : pred.sentences) p.push_back(s.labels);

  EvalReport report;
  report.token = token_f1(g, p);
  report.entity_collapsed = entity_f1(g, p, EntityDefinition::kCollapsedToken);
  report.entity_span = entity_f1(g, p, EntityDefinition::kSpanExact);
  report.census = audit_bio(pred.sentences);
  report.sentences = gold.sentences.size();
  report.tokens = gold.token_count();
  report.repairs = repairs;
  return report;
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "Token level (BIO) over " << report.sentences << " sentences, " << report.tokens
     << " tokens\n";
  os << std::left << std::setw(14) << "Label" << std::right << std::setw(10) << "P"
     << std::setw(10) << "R" << std::setw(10) << "F1" << std::setw(10) << "support\n";
  for (Tag tag : kOriginalTags) {
    const Prf& s = report.token[tag];
    os << std::left << std::setw(14) << report_name(tag) << std::right << std::setw(10)
       << s.precision() << std::setw(10) << s.recall() << std::setw(10) << s.f1()
       << std::setw(9) << s.gold << '\n';
  }
  const Prf micro = report.token.micro();
  os << std::left << std::setw(14) << "micro (B/I)" << std::right << std::setw(10)
     << micro.precision() << std::setw(10) << micro.recall() << std::setw(10) << micro.f1()
     << std::setw(9) << micro.gold << "\n\n";

  auto entity_rows = [&os](const char* title, const EntityScores& e) {
    os << title << '\n';
    for (auto [name, s] : {std::pair{"Aspect", e.aspect}, std::pair{"Sentiment", e.sentiment}}) {
      os << std::left << std::setw(14) << name << std::right << std::setw(10)
         << s.precision() << std::setw(10) << s.recall() << std::setw(10) << s.f1()
         << std::setw(9) << s.gold << '\n';
    }
  };
  entity_rows("Entity level (collapsed token)", report.entity_collapsed);
  os << '\n';
  entity_rows("Entity level (exact span)", report.entity_span);
  os << "\nInvalid BIO sequences: " << report.census.count() << '\n';
  if (report.repairs > 0) {
    os << "Auxiliary first-subword predictions repaired: " << report.repairs << '\n';
  }
  return os.str();
}

std::string format_report_kv(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "sentences=" << report.sentences << '\n' << "tokens=" << report.tokens << '\n';
  auto emit = [&os](const std::string& prefix, const Prf& s) {
    os << prefix << ".precision=" << s.precision() << '\n'
       << prefix << ".recall=" << s.recall() << '\n'
       << prefix << ".f1=" << s.f1() << '\n'
       << prefix << ".support=" << s.gold << '\n';
  };
  for (Tag tag : kOriginalTags) {
    emit("token." + std::string(report_name(tag)), report.token[tag]);
  }
  emit("token.micro", report.token.micro());
  emit("entity.collapsed.ASPECT", report.entity_collapsed.aspect);
  emit("entity.collapsed.SENTIMENT", report.entity_collapsed.sentiment);
  emit("entity.collapsed.micro", report.entity_collapsed.micro());
  emit("entity.span.ASPECT", report.entity_span.aspect);
  emit("entity.span.SENTIMENT", report.entity_span.sentiment);
  emit("entity.span.micro", report.entity_span.micro());
  os << "bio_violations=" << report.census.count() << '\n';
  os << "repairs=" << report.repairs << '\n';
  return os.str();
}

}  // namespace auxcrf
