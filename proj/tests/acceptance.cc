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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria that need the hotel-review dataset read it from
// $AUXCRF_DATA_DIR/{train,test}.conll and report NOT RUN when it is absent.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "auxcrf/align.h"
#include "auxcrf/cli.h"
#include "auxcrf/corpus.h"
#include "auxcrf/crf.h"
#include "auxcrf/eval.h"
#include "auxcrf/rng.h"
#include "auxcrf/segmenter.h"
#include "auxcrf/synth.h"
#include "auxcrf/train.h"
#include "crf_oracle.h"
#include "test_util.h"

using namespace auxcrf;
using namespace auxcrf::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

enum class Verdict { kPass, kFail, kNotRun };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass_if(bool ok, const std::string& detail) {
  return {ok ? Verdict::kPass : Verdict::kFail, detail};
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::optional<std::filesystem::path> dataset_dir() {
  const char* dir = std::getenv("AUXCRF_DATA_DIR");
  if (dir == nullptr) return std::nullopt;
  const std::filesystem::path p(dir);
  if (!std::filesystem::exists(p / "train.conll") || !std::filesystem::exists(p / "test.conll")) {
    return std::nullopt;
  }
  return p;
}

// ---------------------------------------------------------------------------

Outcome partition_oracle() {
  const auto start = Clock::now();
  Rng rng(0xA11CE);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_instance(rng, 1 + rng.index(5));
    const double brute = brute_log_partition(inst);
    const double fast = log_partition(inst.params, inst.emissions);
    worst = std::max(worst, std::abs(fast - brute) / std::abs(brute));
  }
  const double elapsed = seconds_since(start);
  return pass_if(worst <= 1e-10 && elapsed < 10.0,
                 "200 instances, max relative error " + fmt(worst) + ", " + fmt(elapsed, 3) +
                     " s (limits 1e-10, 10 s)");
}

Outcome viterbi_oracle() {
  Rng rng(0xB0B);
  const ConstraintMask mask = default_constraint_mask();
  std::size_t matched = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng.index(5);
    const auto inst = random_instance(rng, n);
    ++total;
    matched += viterbi(inst.params, inst.emissions).labels == brute_viterbi(inst).labels;
    if (n >= 3) {
      ++total;
      matched += viterbi(inst.params, inst.emissions, &mask).labels ==
                 brute_viterbi(inst, &mask).labels;
    }
  }
  return pass_if(matched == total, std::to_string(matched) + "/" + std::to_string(total) +
                                       " decodes equal the enumerated argmax");
}

double nll_of(const CrfParams& p, const EmissionMatrix& e, std::span<const Tag> gold,
              const ConstraintMask* mask) {
  return log_partition(p, e, mask) - sequence_score(p, e, gold);
}

double gradient_error(const CrfInstance& inst, std::span<const Tag> gold,
                      const ConstraintMask* mask) {
  const double h = 1e-5;
  CrfParams pg;
  EmissionMatrix eg(inst.emissions.length());
  accumulate_nll_grad(inst.params, inst.emissions, gold, mask, pg, eg);
  double worst = 0.0;
  const std::vector<double> flat = inst.params.flatten();
  const std::vector<double> analytic = pg.flatten();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto f = flat;
    CrfParams plus, minus;
    f[i] = flat[i] + h;
    plus.unflatten(f);
    f[i] = flat[i] - h;
    minus.unflatten(f);
    const double fd = (nll_of(plus, inst.emissions, gold, mask) -
                       nll_of(minus, inst.emissions, gold, mask)) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic[i]));
  }
  for (std::size_t i = 0; i < inst.emissions.values().size(); ++i) {
    EmissionMatrix plus = inst.emissions, minus = inst.emissions;
    plus.values()[i] += h;
    minus.values()[i] -= h;
    const double fd = (nll_of(inst.params, plus, gold, mask) -
                       nll_of(inst.params, minus, gold, mask)) / (2 * h);
    worst = std::max(worst, std::abs(fd - eg.values()[i]));
  }
  return worst;
}

Outcome gradient_check() {
  Rng rng(0xC0FFEE);
  const ConstraintMask mask = default_constraint_mask();
  double worst = 0.0;
  int masked = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.index(6);
    const auto inst = random_instance(rng, n);
    std::vector<Tag> gold;
    for (std::size_t t = 0; t < n; ++t) gold.push_back(tag_at(rng.index(kNumTags)));
    worst = std::max(worst, gradient_error(inst, gold, nullptr));
    if (n >= 3) {
      const auto legal = viterbi(inst.params, inst.emissions, &mask).labels;
      worst = std::max(worst, gradient_error(inst, legal, &mask));
      ++masked;
    }
  }
  return pass_if(worst <= 1e-6, "100 instances (+" + std::to_string(masked) +
                                    " masked), max |analytic - central difference| " +
                                    fmt(worst) + " (limit 1e-6, h = 1e-5)");
}

struct DecodeCensus {
  std::size_t bio = 0;
  std::size_t grammar = 0;
};

// Masked decodes of random emission matrices under random CRF parameters.
// Each sentence has 1..8 words cut into 1..max_pieces subwords.
DecodeCensus masked_decode_census(std::uint64_t seed, std::size_t max_pieces) {
  Rng rng(seed);
  const ConstraintMask mask = default_constraint_mask();
  DecodeCensus census;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t words = 1 + rng.index(8);
    std::vector<std::size_t> counts;
    for (std::size_t w = 0; w < words; ++w) counts.push_back(1 + rng.index(max_pieces));
    const AlignedSentence a = project_segmented(word_names(words),
                                                std::vector<Tag>(words, Tag::kO),
                                                cut_words(counts));
    CrfParams params = CrfParams::random(rng.next(), 2.0);
    EmissionMatrix e(a.size());
    for (double& v : e.values()) v = rng.uniform(-10.0, 10.0);
    const auto decoded = viterbi(params, e, &mask).labels;
    census.grammar += grammar_violations(decoded, mask).size();
    census.bio += bio_violations(collapse(a, decoded).labels).size();
  }
  return census;
}

Outcome constraint_guarantee() {
  const DecodeCensus c = masked_decode_census(0xD1CE, 1);
  return pass_if(c.bio == 0 && c.grammar == 0,
                 "10000 masked decodes, one word per subword: " + std::to_string(c.bio) +
                     " BIO violations, " + std::to_string(c.grammar) + " grammar violations");
}

// Not a gate: the bigram mask cannot see word boundaries, so a legal
// subword path may still collapse to a stray I- tag.
std::string multi_subword_census() {
  const DecodeCensus c = masked_decode_census(0xD1CE, 3);
  return "10000 masked decodes, up to 3 subwords per word: " + std::to_string(c.bio) +
         " BIO violations after collapse, " + std::to_string(c.grammar) +
         " grammar violations";
}

Outcome alignment_round_trip() {
  std::size_t cases = 0, failures = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto words = word_names(n);
    for_each_sequence(kOriginalTags, n, [&](const std::vector<Tag>& labels) {
      for_each_cut(n, 3, [&](const std::vector<std::size_t>& counts) {
        ++cases;
        const AlignedSentence a = project_segmented(words, labels, cut_words(counts));
        if (collapse(a, a.subword_labels).labels != labels) ++failures;
      });
    });
  }
  return pass_if(failures == 0, std::to_string(cases) + " cases, " + std::to_string(failures) +
                                    " failures");
}

std::vector<TrainingExample> to_examples(const Corpus& corpus, const Segmenter& seg) {
  std::vector<TrainingExample> out;
  for (const auto& s : corpus.sentences) {
    TrainingExample ex;
    ex.aligned = project(s.words, s.labels, seg);
    ex.aligned.id = s.id;
    out.push_back(std::move(ex));
  }
  return out;
}

Outcome synthetic_end_to_end() {
  const auto start = Clock::now();
  TrainConfig config;  // defaults throughout, except for the epoch budget
  config.epochs = 20;
  const Corpus corpus = synthesize({.sentences = 600, .seed = 1});
  const auto [train_corpus, validation_corpus] =
      split_train_validation(corpus, 500, config.seed);
  const WordPieceSegmenter seg(synthetic_vocabulary());
  const auto train_set = to_examples(train_corpus, seg);
  const auto validation_set = to_examples(validation_corpus, seg);

  const TrainResult r = train(config, initial_model(config, EmissionSource::kFeatures, train_set),
                              train_set, validation_set);
  std::vector<std::vector<Tag>> gold;
  for (const auto& ex : validation_set) gold.push_back(ex.aligned.word_labels);
  const double best = token_f1(gold, predict_words(r.best_model, validation_set)).micro().f1();
  const double final_f1 = r.history.back().val_token_f1;
  const double elapsed = seconds_since(start);
  return pass_if(best >= 0.90 && elapsed < 120.0,
                 "500/100 split, 20 epochs at lr " + fmt(config.learning_rate) +
                     ": best held-out micro-F1 " + fmt(best) + " (epoch " +
                     std::to_string(r.best_epoch) + "), final " + fmt(final_f1) + ", " +
                     fmt(elapsed, 3) + " s (limits 0.90, 120 s)");
}

Outcome baseline_sanity() {
  const Corpus train_corpus =
      synthesize({.sentences = 400, .seed = 21, .deterministic_labels = true});
  const Corpus fresh = synthesize({.sentences = 400, .seed = 22, .deterministic_labels = true});
  std::set<std::string> inventory;
  for (const auto& s : train_corpus.sentences) inventory.insert(s.words.begin(), s.words.end());
  Corpus test_corpus;
  for (const auto& s : fresh.sentences) {
    if (std::all_of(s.words.begin(), s.words.end(),
                    [&](const std::string& w) { return inventory.contains(w); })) {
      test_corpus.sentences.push_back(s);
    }
  }
  const ArgmaxBaseline baseline = ArgmaxBaseline::fit(train_corpus.sentences);
  auto worst_f1 = [&](const Corpus& c) {
    std::vector<std::vector<Tag>> gold, pred;
    for (const auto& s : c.sentences) {
      gold.push_back(s.labels);
      pred.push_back(baseline.predict(s.words));
    }
    const TokenScores scores = token_f1(gold, pred);
    double worst = 1.0;
    for (Tag t : kOriginalTags) {
      if (scores[t].gold > 0 || scores[t].predicted > 0) worst = std::min(worst, scores[t].f1());
    }
    return worst;
  };
  const double on_train = worst_f1(train_corpus);
  const double on_test = worst_f1(test_corpus);
  return pass_if(on_train == 1.0 && on_test == 1.0 && !test_corpus.sentences.empty(),
                 "lowest per-label F1: train " + fmt(on_train) + ", held-out " + fmt(on_test) +
                     " over " + std::to_string(test_corpus.sentences.size()) + " sentences");
}

Outcome baseline_real_data() {
  const auto dir = dataset_dir();
  if (!dir) return {Verdict::kNotRun, "dataset unavailable (set AUXCRF_DATA_DIR)"};
  const Corpus train_corpus = read_conll_file(*dir / "train.conll");
  const Corpus test_corpus = read_conll_file(*dir / "test.conll", {.split = Split::kTest});
  const ArgmaxBaseline baseline = ArgmaxBaseline::fit(train_corpus.sentences);
  std::vector<std::vector<Tag>> gold, pred;
  for (const auto& s : test_corpus.sentences) {
    gold.push_back(s.labels);
    pred.push_back(baseline.predict(s.words));
  }
  const TokenScores scores = token_f1(gold, pred);
  const std::map<Tag, double> reference = {{Tag::kBAspect, 0.777},
                                           {Tag::kIAspect, 0.592},
                                           {Tag::kBSentiment, 0.810},
                                           {Tag::kISentiment, 0.391},
                                           {Tag::kO, 0.851}};
  bool ok = true;
  std::string detail;
  for (const auto& [tag, want] : reference) {
    const double got = scores[tag].f1();
    ok = ok && std::abs(got - want) <= 0.02;
    detail += std::string(report_name(tag)) + " " + fmt(got, 3) + "/" + fmt(want, 3) + " ";
  }
  return pass_if(ok, detail + "(tolerance 0.02)");
}

Outcome stats_reproduction() {
  const auto dir = dataset_dir();
  if (!dir) return {Verdict::kNotRun, "dataset unavailable (set AUXCRF_DATA_DIR)"};
  Corpus all = read_conll_file(*dir / "train.conll");
  for (auto& s : read_conll_file(*dir / "test.conll", {.split = Split::kTest}).sentences) {
    all.sentences.push_back(std::move(s));
  }
  const CorpusStats st = compute_stats(all);
  const SplitStats& train = st.splits.at(Split::kTrain);
  const SplitStats& test = st.splits.at(Split::kTest);
  const std::map<Tag, std::pair<std::size_t, std::size_t>> reference = {
      {Tag::kBAspect, {7005, 1758}},    {Tag::kIAspect, {2292, 584}},
      {Tag::kBSentiment, {9646, 2384}}, {Tag::kISentiment, {4265, 1067}},
      {Tag::kO, {39897, 9706}}};
  bool ok = train.tokens == 63105 && test.tokens == 15499 &&
            std::abs(st.overlap_percent - 75.4) <= 0.1;
  for (const auto& [tag, counts] : reference) {
    ok = ok && train.label_counts[index_of(tag)] == counts.first &&
         test.label_counts[index_of(tag)] == counts.second;
  }
  return pass_if(ok, "totals " + std::to_string(train.tokens) + "/" +
                         std::to_string(test.tokens) + ", overlap " +
                         fmt(st.overlap_percent, 4) + "%");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  TempDir dir("acceptance-det");
  const std::string data = (dir / "synth.conll").string();
  const std::string vocab = (dir / "vocab.txt").string();
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) { return run(args, sink, sink); };
  if (cli({"synth", "--n", "200", "--seed", "5", "--out", data, "--vocab-out", vocab}) != 0) {
    return {Verdict::kFail, "synth failed: " + sink.str()};
  }
  for (const char* tag : {"a", "b"}) {
    const int status = cli({"train", "--train", data, "--n-train", "160", "--vocab", vocab,
                            "--seed", "11", "--epochs", "3", "--threads", "2", "--out",
                            (dir / (std::string(tag) + ".model")).string(), "--metrics",
                            (dir / (std::string(tag) + ".csv")).string()});
    if (status != 0) return {Verdict::kFail, "train failed: " + sink.str()};
  }
  const bool same_model = slurp(dir / "a.model") == slurp(dir / "b.model");
  const bool same_csv = slurp(dir / "a.csv") == slurp(dir / "b.csv");
  return pass_if(same_model && same_csv && !slurp(dir / "a.model").empty(),
                 std::string("model files ") + (same_model ? "identical" : "differ") +
                     ", metric CSVs " + (same_csv ? "identical" : "differ"));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"crf partition oracle", partition_oracle},
      {"viterbi oracle", viterbi_oracle},
      {"gradient check", gradient_check},
      {"constraint guarantee", constraint_guarantee},
      {"alignment round trip", alignment_round_trip},
      {"synthetic end to end", synthetic_end_to_end},
      {"baseline sanity (synthetic)", baseline_sanity},
      {"baseline sanity (hotel reviews)", baseline_real_data},
      {"stats reproduction", stats_reproduction},
      {"cli determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* label = outcome.verdict == Verdict::kPass   ? "PASS"
                        : outcome.verdict == Verdict::kFail ? "FAIL"
                                                            : "NOT RUN";
    if (outcome.verdict == Verdict::kFail) ++failures;
    std::cout << label << "  " << name << ": " << outcome.detail << std::endl;
  }
  std::cout << "INFO  constraint census: " << multi_subword_census() << std::endl;
  std::cout << (failures == 0 ? "acceptance: all criteria met" : "acceptance: FAILED") << '\n';
  return failures == 0 ? 0 : 1;
}
