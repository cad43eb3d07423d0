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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "auxcrf/corpus.h"
#include "auxcrf/error.h"
#include "auxcrf/eval.h"
#include "auxcrf/optim.h"
#include "auxcrf/segmenter.h"
#include "auxcrf/synth.h"
#include "auxcrf/train.h"
#include "test_util.h"

using namespace auxcrf;
using namespace auxcrf::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

std::vector<TrainingExample> examples(const Corpus& corpus, const Segmenter& seg) {
  std::vector<TrainingExample> out;
  for (const auto& s : corpus.sentences) {
    TrainingExample ex;
    ex.aligned = project(s.words, s.labels, seg);
    ex.aligned.id = s.id;
    out.push_back(std::move(ex));
  }
  return out;
}

// Ten sentences in which every token string has exactly one label.
Corpus separable_corpus() {
  const char* text =
      "kamar\tB-ASPECT\nbersih\tB-SENTIMENT\n\n"
      "kolam\tB-ASPECT\nrenang\tI-ASPECT\nluas\tB-SENTIMENT\n\n"
      "pelayanan\tB-ASPECT\nsangat\tB-SENTIMENT\nramah\tI-SENTIMENT\n\n"
      "hotel\tO\nini\tO\nenak\tB-SENTIMENT\n\n"
      "ac\tB-ASPECT\ndingin\tB-SENTIMENT\n\n"
      "tapi\tO\nwifi\tB-ASPECT\nlemot\tB-SENTIMENT\n\n"
      "sarapan\tB-ASPECT\nkurang\tB-SENTIMENT\nvariatif\tI-SENTIMENT\n\n"
      "lokasinya\tB-ASPECT\nstrategis\tB-SENTIMENT\n\n"
      "recommended\tO\npokoknya\tO\n\n"
      "parkiran\tB-ASPECT\nsempit\tB-SENTIMENT\nsekali\tI-SENTIMENT\n";
  std::istringstream in(text);
  return read_conll(in);
}

std::vector<std::vector<Tag>> gold_of(std::span<const TrainingExample> set) {
  std::vector<std::vector<Tag>> out;
  for (const auto& ex : set) out.push_back(ex.aligned.word_labels);
  return out;
}

}  // namespace

TEST_CASE("learning rate schedule") {
  TrainConfig c;
  CHECK(lr_at_step(c, 0, 100) == 0.0);
  CHECK(lr_at_step(c, 50, 100) == 1e-4);
  CHECK(lr_at_step(c, 25, 100) == doctest::Approx(0.5e-4).epsilon(1e-12));
  CHECK(lr_at_step(c, 75, 100) == doctest::Approx(0.5e-4).epsilon(1e-12));
  CHECK(lr_at_step(c, 99, 100) == doctest::Approx(0.02e-4).epsilon(1e-12));
  // floor(0.5 * 5) = 2 warmup steps.
  CHECK(lr_at_step(c, 1, 5) == doctest::Approx(0.5e-4).epsilon(1e-12));
  CHECK(lr_at_step(c, 2, 5) == 1e-4);
  c.warmup_fraction = 0.0;
  CHECK(lr_at_step(c, 0, 10) == 1e-4);
  c.warmup_fraction = 1.0;
  CHECK(lr_at_step(c, 9, 10) == doctest::Approx(0.9e-4).epsilon(1e-12));
  for (std::size_t s = 0; s < 37; ++s) {
    const double lr = lr_at_step(TrainConfig{}, s, 37);
    CHECK(lr >= 0.0);
    CHECK(lr <= 1e-4);
  }
}

TEST_CASE("total steps keep the last partial batch") {
  TrainConfig c;
  CHECK(total_steps(c, 500) == 3 * 16);
  CHECK(total_steps(c, 32) == 3);
  c.epochs = 0;
  CHECK(total_steps(c, 500) == 0);
}

TEST_CASE("config files") {
  std::istringstream in(
      "# tuned\nlearning_rate = 0.001\nepochs=5\n  batch_size = 8  # small\n"
      "mask_in_training = false\nseed = 7\nwarmup_fraction = 0.25\n");
  const TrainConfig c = parse_config(in);
  CHECK(c.learning_rate == 0.001);
  CHECK(c.epochs == 5);
  CHECK(c.batch_size == 8);
  CHECK_FALSE(c.mask_in_training);
  CHECK(c.mask_in_decoding);
  CHECK(c.seed == 7);
  CHECK(c.warmup_fraction == 0.25);

  std::istringstream round(format_config(c));
  const TrainConfig back = parse_config(round);
  CHECK(format_config(back) == format_config(c));

  auto bad = [](const std::string& text) {
    return code_of([&] {
      std::istringstream s(text);
      parse_config(s);
    });
  };
  CHECK(bad("learning_rate = 0\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("learning_rate = abc\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("warmup_fraction = 1.5\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("batch_size = 0\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("hash_dim = 1000\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("colour = red\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("epochs\n") == ErrorCode::kInvalidConfig);
  CHECK(bad("mask_in_decoding = maybe\n") == ErrorCode::kInvalidConfig);
}

TEST_CASE("AdamW update") {
  AdamW opt(3, {.weight_decay = 0.1});
  std::vector<double> p = {1.0, -2.0, 0.5};
  const std::vector<double> g = {0.5, 0.0, -4.0};
  opt.step(p, g, 0.01);
  // First step: bias-corrected moments are g and g^2.
  CHECK(p[0] == doctest::Approx(1.0 * 0.999 - 0.01 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  CHECK(p[1] == -2.0 * 0.999);
  CHECK(p[2] == doctest::Approx(0.5 * 0.999 + 0.01 * 4.0 / (4.0 + 1e-8)).epsilon(1e-14));
  CHECK(opt.steps_taken() == 1);
  CHECK_THROWS_AS(opt.step(std::span<double>(p).first(2), g, 0.01), Error);
}

TEST_CASE("zero epochs leave the model at its initialization") {
  const Corpus corpus = separable_corpus();
  const auto set = examples(corpus, whole_word_segmenter());
  TrainConfig c;
  c.epochs = 0;
  c.init_scale = 0.1;
  const Model initial = initial_model(c, EmissionSource::kFeatures, set);
  const TrainResult r = train(c, initial, set, set);
  CHECK(r.final_model == initial);
  CHECK(r.best_model == initial);
  CHECK(r.history.empty());
  CHECK(r.best_epoch == 0);
}

TEST_CASE("initial model") {
  const auto set = examples(separable_corpus(), whole_word_segmenter());
  TrainConfig c;
  const Model zero = initial_model(c, EmissionSource::kFeatures, set);
  CHECK(zero.crf == CrfParams{});
  CHECK(zero.emitter.num_features() > 0);
  for (double v : zero.emitter.parameters()) CHECK(v == 0.0);
  c.init_scale = 0.1;
  const Model random = initial_model(c, EmissionSource::kFeatures, set);
  CHECK_FALSE(random.crf == CrfParams{});
  CHECK(random == initial_model(c, EmissionSource::kFeatures, set));
  CHECK(initial_model(c, EmissionSource::kExternal, set).emitter.num_features() == 0);
}

TEST_CASE("separable toy corpus is learned exactly") {
  const auto set = examples(separable_corpus(), whole_word_segmenter());
  TrainConfig c;
  c.epochs = 50;
  c.learning_rate = 0.05;
  const TrainResult r = train(c, initial_model(c, EmissionSource::kFeatures, set), set, set);
  REQUIRE(r.history.size() == 50);
  for (std::size_t e = 1; e + 1 < r.history.size(); ++e) {
    INFO("epoch " << r.history[e + 1].epoch);
    CHECK(r.history[e + 1].train_nll < r.history[e].train_nll);
  }
  const auto pred = predict_words(r.final_model, set);
  CHECK(token_f1(gold_of(set), pred).micro().f1() == 1.0);
  CHECK(pred == gold_of(set));
  CHECK(r.history.back().val_token_f1 == 1.0);
}

TEST_CASE("rows without gradient only decay") {
  const auto set = examples(separable_corpus(), whole_word_segmenter());
  TrainConfig c;
  c.epochs = 4;
  c.batch_size = 3;
  c.learning_rate = 0.01;
  Model initial = initial_model(c, EmissionSource::kFeatures, set);
  const FeatureId unused = initial.emitter.feature_id("w=never-seen-in-training");
  REQUIRE(initial.emitter.slot(unused) == FeatureEmitter::npos);
  TagScores row{};
  row.fill(0.75);
  row[3] = -2.0;
  initial.emitter.set_weights(unused, row);

  const TrainResult r = train(c, initial, set, set);
  const std::size_t steps = total_steps(c, set.size());
  TagScores expect = row;
  for (std::size_t s = 0; s < steps; ++s) {
    const double factor = 1.0 - lr_at_step(c, s, steps) * c.weight_decay;
    for (double& v : expect) v *= factor;
  }
  CHECK(r.final_model.emitter.weights(unused) == expect);
  CHECK(expect[0] < 0.75);
}

TEST_CASE("training is deterministic and independent of the thread count") {
  const Corpus corpus = synthesize({.sentences = 80, .seed = 4});
  const auto [tr, va] = split_train_validation(corpus, 60, 1);
  const WordPieceSegmenter seg(synthetic_vocabulary());
  const auto train_set = examples(tr, seg);
  const auto val_set = examples(va, seg);
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 8;
  c.learning_rate = 1e-2;
  c.init_scale = 0.1;
  const Model initial = initial_model(c, EmissionSource::kFeatures, train_set);
  const TrainResult a = train(c, initial, train_set, val_set);
  const TrainResult b = train(c, initial, train_set, val_set);
  CHECK(a.final_model == b.final_model);
  c.threads = 3;
  const TrainResult t = train(c, initial, train_set, val_set);
  CHECK(t.final_model == a.final_model);
  REQUIRE(t.history.size() == 2);
  CHECK(t.history[1].train_nll == a.history[1].train_nll);
  c.seed = 43;
  CHECK_FALSE(train(c, initial, train_set, val_set).final_model == a.final_model);

  std::ostringstream csv;
  write_metrics_csv(csv, a.history);
  const std::string text = csv.str();
  CHECK(text.starts_with("epoch,step,train_nll,val_f1,val_entity_f1\n"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  for (const auto& m : a.history) CHECK(std::isfinite(m.train_nll));
}

TEST_CASE("best model tracks the best validation epoch") {
  const auto set = examples(separable_corpus(), whole_word_segmenter());
  TrainConfig c;
  c.epochs = 6;
  c.learning_rate = 0.05;
  const TrainResult r = train(c, initial_model(c, EmissionSource::kFeatures, set), set, set);
  double best = -1;
  std::size_t epoch = 0;
  for (const auto& m : r.history) {
    if (m.val_token_f1 > best) {
      best = m.val_token_f1;
      epoch = m.epoch;
    }
  }
  CHECK(r.best_epoch == epoch);
  const auto pred = predict_words(r.best_model, set);
  CHECK(token_f1(gold_of(set), pred).micro().f1() == doctest::Approx(best));
}

TEST_CASE("training errors") {
  const auto set = examples(separable_corpus(), whole_word_segmenter());
  TrainConfig c;
  const Model m = initial_model(c, EmissionSource::kFeatures, set);
  const std::vector<TrainingExample> none;
  CHECK(code_of([&] { train(c, m, none, set); }) == ErrorCode::kEmptySplit);
  CHECK(code_of([&] { train(c, m, set, none); }) == ErrorCode::kEmptySplit);

  const Model ext = initial_model(c, EmissionSource::kExternal, set);
  CHECK(code_of([&] { train(c, ext, set, set); }) == ErrorCode::kMissingSentence);

  auto poisoned = set;
  for (auto& ex : poisoned) ex.external = EmissionMatrix(ex.aligned.size());
  poisoned[4].external->at(1, Tag::kO) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { train(c, ext, poisoned, poisoned); }) == ErrorCode::kNonFiniteLoss);

  TrainConfig bad = c;
  bad.learning_rate = -1;
  CHECK(code_of([&] { train(bad, m, set, set); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("CRF-only training over external emissions") {
  const Corpus corpus = read_conll_file(fixture("tiny.conll"));
  const auto seg = WordPieceSegmenter::from_file(fixture("tiny.vocab"));
  auto set = examples(corpus, seg);
  std::vector<AlignedSentence> aligned;
  for (const auto& ex : set) aligned.push_back(ex.aligned);
  const auto external = load_external(read_logits_file(fixture("tiny.logits5.jsonl")), aligned);
  for (auto& ex : set) ex.external = external.at(ex.aligned.id);

  TrainConfig c;
  c.epochs = 3;
  const TrainResult r = train(c, initial_model(c, EmissionSource::kExternal, set), set, set);
  REQUIRE(r.history.size() == 3);
  for (const auto& m : r.history) CHECK(std::isfinite(m.train_nll));
  CHECK(r.final_model.source == EmissionSource::kExternal);
  CHECK(predict_words(r.final_model, set).size() == 3);
}
