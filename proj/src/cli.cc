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

#include "auxcrf/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "auxcrf/align.h"
#include "auxcrf/corpus.h"
#include "auxcrf/emit.h"
#include "auxcrf/error.h"
#include "auxcrf/eval.h"
#include "auxcrf/model.h"
#include "auxcrf/segmenter.h"
#include "auxcrf/synth.h"
#include "auxcrf/train.h"

namespace auxcrf {

namespace {

constexpr std::string_view kExternalPrefix = "external:";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

struct Shared {
  std::uint64_t seed = 0;
  std::string config;
  bool mask_train = true;
  bool mask_decode = true;
  std::string emissions = "features";
  std::string segmentation;
  std::string vocab;
  std::size_t threads = 1;

  std::optional<std::string> external_path() const {
    if (!emissions.starts_with(kExternalPrefix)) return std::nullopt;
    return emissions.substr(kExternalPrefix.size());
  }
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--seed", s.seed, "Seed for every random choice");
  app->add_option("--config", s.config, "Training config file (key = value lines)");
  app->add_flag("--mask-train,!--no-mask-train", s.mask_train,
                "Apply the label grammar mask in the training loss");
  app->add_flag("--mask-decode,!--no-mask-decode", s.mask_decode,
                "Apply the label grammar mask when decoding");
  app->add_option("--emissions", s.emissions, "features | external:PATH")
      ->check(CLI::Validator(
          [](std::string& v) -> std::string {
            if (v == "features") return {};
            if (v.starts_with(kExternalPrefix) && v.size() > kExternalPrefix.size()) return {};
            return "expected 'features' or 'external:PATH'";
          },
          "SOURCE"));
  app->add_option("--segmentation", s.segmentation,
                  "Segmentation sidecar (JSON lines) replacing the built-in segmenter");
  app->add_option("--vocab", s.vocab, "Subword vocabulary for the built-in segmenter");
  app->add_option("--threads", s.threads, "Worker threads for gradient computation")
      ->check(CLI::PositiveNumber);
}

// How corpus sentences become aligned subword sequences.
struct DataSource {
  std::optional<std::map<std::string, SegmentationRecord>> sidecar;
  Segmenter segmenter;
  std::size_t max_subwords = kDefaultMaxSubwords;
  std::optional<LogitsFile> logits;
};

DataSource data_source(const Shared& s, const Model* model) {
  DataSource src;
  if (!s.segmentation.empty()) {
    src.sidecar = read_segmentation_file(s.segmentation);
  } else if (!s.vocab.empty()) {
    src.segmenter = WordPieceSegmenter::from_file(s.vocab, model ? model->lowercase : true);
  } else if (model != nullptr) {
    src.segmenter = make_segmenter(*model);
  } else {
    src.segmenter = whole_word_segmenter();
  }
  if (model != nullptr) src.max_subwords = model->max_subwords;
  if (auto path = s.external_path()) src.logits = read_logits_file(*path);
  return src;
}

std::vector<TrainingExample> prepare(const Corpus& corpus, const DataSource& src) {
  std::vector<AlignedSentence> aligned;
  aligned.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) {
    if (src.sidecar) {
      auto it = src.sidecar->find(s.id);
      if (it == src.sidecar->end()) {
        throw Error(ErrorCode::kMissingSentence,
                    "no segmentation record for sentence '" + s.id + "'");
      }
      if (it->second.words != s.words) {
        throw Error(ErrorCode::kMalformedRecord,
                    "segmentation record '" + s.id + "' lists different words");
      }
      aligned.push_back(project_segmented(s.words, s.labels, it->second.pieces(),
                                          src.max_subwords));
    } else {
      aligned.push_back(project(s.words, s.labels, src.segmenter, src.max_subwords));
    }
    aligned.back().id = s.id;
  }
  std::map<std::string, EmissionMatrix> external;
  if (src.logits) external = load_external(*src.logits, aligned);

  std::vector<TrainingExample> out;
  out.reserve(aligned.size());
  for (auto& a : aligned) {
    TrainingExample ex;
    if (src.logits) ex.external = external.at(a.id);
    ex.aligned = std::move(a);
    out.push_back(std::move(ex));
  }
  return out;
}

Corpus with_labels(const Corpus& words, const std::vector<std::vector<Tag>>& labels) {
  Corpus out = words;
  for (std::size_t i = 0; i < out.sentences.size(); ++i) out.sentences[i].labels = labels[i];
  return out;
}

struct TrainFlags {
  std::string train;
  std::string validation;
  std::size_t n_train = 0;
  std::string out;
  std::string best_out;
  std::string metrics;
  std::size_t epochs = 0;
  double lr = 0.0;
  std::vector<double> lr_grid;
  double weight_decay = 0.0;
  std::size_t batch_size = 0;
  double warmup = 0.0;
  std::uint32_t hash_dim = 0;
  double init_scale = 0.0;
};

TrainConfig build_config(const CLI::App* sub, const Shared& s, const TrainFlags& f) {
  TrainConfig c;
  if (!s.config.empty()) c = load_config_file(s.config, c);
  if (sub->count("--seed")) c.seed = s.seed;
  if (sub->count("--mask-train")) c.mask_in_training = s.mask_train;
  if (sub->count("--mask-decode")) c.mask_in_decoding = s.mask_decode;
  if (sub->count("--threads")) c.threads = s.threads;
  if (sub->count("--epochs")) c.epochs = f.epochs;
  if (sub->count("--lr")) c.learning_rate = f.lr;
  if (sub->count("--weight-decay")) c.weight_decay = f.weight_decay;
  if (sub->count("--batch-size")) c.batch_size = f.batch_size;
  if (sub->count("--warmup")) c.warmup_fraction = f.warmup;
  if (sub->count("--hash-dim")) c.hash_dim = f.hash_dim;
  if (sub->count("--init-scale")) c.init_scale = f.init_scale;
  validate(c);
  return c;
}

double best_f1(const TrainResult& r) {
  double best = 0.0;
  for (const auto& m : r.history) best = std::max(best, m.val_token_f1);
  return best;
}

int cmd_train(const CLI::App* sub, const Shared& s, const TrainFlags& f, std::ostream& out) {
  if (f.validation.empty() == (f.n_train == 0)) {
    throw UsageError("train needs exactly one of --validation or --n-train");
  }
  TrainConfig config = build_config(sub, s, f);
  for (double lr : f.lr_grid) {
    if (!(lr > 0.0)) throw UsageError("--lr-grid values must be positive");
  }

  Corpus train_corpus = read_conll_file(f.train, {.split = Split::kTrain});
  Corpus validation_corpus;
  if (!f.validation.empty()) {
    validation_corpus = read_conll_file(f.validation, {.split = Split::kValidation});
  } else {
    std::tie(train_corpus, validation_corpus) =
        split_train_validation(train_corpus, f.n_train, config.seed);
  }

  const DataSource src = data_source(s, nullptr);
  const auto train_set = prepare(train_corpus, src);
  const auto validation_set = prepare(validation_corpus, src);
  const EmissionSource source =
      src.logits ? EmissionSource::kExternal : EmissionSource::kFeatures;

  std::vector<double> grid = f.lr_grid;
  if (grid.empty()) grid.push_back(config.learning_rate);

  std::optional<TrainResult> chosen;
  double chosen_lr = 0.0;
  for (double lr : grid) {
    TrainConfig c = config;
    c.learning_rate = lr;
    Model initial = initial_model(c, source, train_set);
    initial.vocabulary = s.segmentation.empty() ? s.vocab : std::string();
    TrainResult result = train(c, std::move(initial), train_set, validation_set);
    if (f.lr_grid.size() > 0) {
      out << "grid lr=" << shortest(lr) << " best_val_f1=" << shortest(best_f1(result))
          << " best_epoch=" << result.best_epoch << '\n';
    }
    if (!chosen || best_f1(result) > best_f1(*chosen)) {
      chosen = std::move(result);
      chosen_lr = lr;
    }
  }

  for (const auto& m : chosen->history) {
    out << "epoch=" << m.epoch << " step=" << m.step << " train_nll=" << shortest(m.train_nll)
        << " val_f1=" << shortest(m.val_token_f1)
        << " val_entity_f1=" << shortest(m.val_entity_f1) << '\n';
  }
  out << "learning_rate=" << shortest(chosen_lr) << '\n';
  out << "best_epoch=" << chosen->best_epoch << '\n';
  out << "best_val_f1=" << shortest(best_f1(*chosen)) << '\n';

  save_model_file(f.out, chosen->final_model);
  if (!f.best_out.empty()) save_model_file(f.best_out, chosen->best_model);
  if (!f.metrics.empty()) {
    auto csv = open_output(f.metrics);
    write_metrics_csv(csv, chosen->history);
  }
  return kExitOk;
}

struct EvalFlags {
  std::string gold;
  std::string pred;
  std::string model;
  std::string baseline;
  std::string violations;
};

int cmd_eval(const CLI::App* sub, const Shared& s, const EvalFlags& f, std::ostream& out) {
  const int sources = !f.pred.empty() + !f.model.empty() + !f.baseline.empty();
  if (sources != 1) throw UsageError("eval needs exactly one of --pred, --model, --baseline");

  const Corpus gold = read_conll_file(f.gold, {.split = Split::kTest});
  Corpus pred;
  std::size_t repairs = 0;
  if (!f.pred.empty()) {
    pred = read_conll_file(f.pred, {.split = Split::kTest});
  } else if (!f.model.empty()) {
    Model model = load_model_file(f.model);
    if (sub->count("--mask-decode")) model.mask_in_decoding = s.mask_decode;
    const auto examples = prepare(gold, data_source(s, &model));
    pred = with_labels(gold, predict_words(model, examples, &repairs));
  } else {
    const Corpus train_corpus = read_conll_file(f.baseline, {.split = Split::kTrain});
    const ArgmaxBaseline baseline = ArgmaxBaseline::fit(train_corpus.sentences);
    std::vector<std::vector<Tag>> labels;
    for (const auto& sentence : gold.sentences) labels.push_back(baseline.predict(sentence.words));
    pred = with_labels(gold, labels);
  }

  const EvalReport report = evaluate(gold, pred, repairs);
  out << format_report_table(report) << '\n' << format_report_kv(report);
  if (!f.violations.empty()) {
    auto csv = open_output(f.violations);
    write_violations_csv(csv, report.census);
  }
  return kExitOk;
}

struct TagFlags {
  std::string model;
  std::string data;
  std::string out;
};

int cmd_tag(const CLI::App* sub, const Shared& s, const TagFlags& f, std::ostream& out) {
  Model model = load_model_file(f.model);
  if (sub->count("--mask-decode")) model.mask_in_decoding = s.mask_decode;
  const Corpus input = read_conll_file(f.data, {.labels_required = false, .split = Split::kTest});
  const auto examples = prepare(input, data_source(s, &model));
  std::size_t repairs = 0;
  const Corpus tagged = with_labels(input, predict_words(model, examples, &repairs));
  if (f.out.empty()) {
    write_conll(out, tagged);
  } else {
    write_conll_file(f.out, tagged);
    out << "sentences=" << tagged.sentences.size() << '\n' << "repairs=" << repairs << '\n';
  }
  return kExitOk;
}

struct AuditFlags {
  std::string pred;
  std::string violations;
  bool show_mask = false;
};

int cmd_audit(const AuditFlags& f, std::ostream& out) {
  if (f.show_mask) out << format_mask(default_constraint_mask()) << '\n';
  if (f.pred.empty()) {
    if (f.show_mask) return kExitOk;
    throw UsageError("audit needs --pred");
  }
  const Corpus pred = read_conll_file(f.pred, {.split = Split::kTest});
  const ViolationCensus census = audit_bio(pred.sentences);
  for (const auto& v : census.violations) {
    out << v.sentence_id << '\t' << v.position << '\t'
        << (v.previous ? to_string(*v.previous) : std::string_view("^")) << ' '
        << to_string(v.tag) << '\t' << v.context << '\n';
  }
  out << "bio_violations=" << census.count() << '\n';
  if (!f.violations.empty()) {
    auto csv = open_output(f.violations);
    write_violations_csv(csv, census);
  }
  return kExitOk;
}

struct StatsFlags {
  std::string data;
  std::string train;
  std::string validation;
  std::string test;
};

int cmd_stats(const StatsFlags& f, std::ostream& out) {
  if (f.data.empty() && f.train.empty() && f.validation.empty() && f.test.empty()) {
    throw UsageError("stats needs --data or at least one of --train/--validation/--test");
  }
  Corpus all;
  auto add = [&](const std::string& path, Split split) {
    if (path.empty()) return;
    Corpus c = read_conll_file(path, {.split = split});
    for (auto& s : c.sentences) all.sentences.push_back(std::move(s));
  };
  add(f.data, Split::kTrain);
  add(f.train, Split::kTrain);
  add(f.validation, Split::kValidation);
  add(f.test, Split::kTest);
  const CorpusStats stats = compute_stats(all);
  out << format_stats_table(stats) << '\n' << format_stats_kv(stats);
  return kExitOk;
}

struct SynthFlags {
  std::size_t sentences = SynthOptions{}.sentences;
  std::string out;
  std::string vocab_out;
  bool deterministic = false;
};

int cmd_synth(const CLI::App* sub, const Shared& s, const SynthFlags& f, std::ostream& out) {
  SynthOptions options;
  options.sentences = f.sentences;
  options.deterministic_labels = f.deterministic;
  if (sub->count("--seed")) options.seed = s.seed;
  const Corpus corpus = synthesize(options);
  if (f.out.empty()) {
    write_conll(out, corpus);
  } else {
    write_conll_file(f.out, corpus);
  }
  if (!f.vocab_out.empty()) {
    auto vocab = open_output(f.vocab_out);
    for (const auto& entry : synthetic_vocabulary()) vocab << entry << '\n';
  }
  return kExitOk;
}

struct ConvertFlags {
  std::string in;
  std::string out;
  std::string data;
};

int cmd_convert(const Shared& s, const ConvertFlags& f, std::ostream& out) {
  const LogitsFile input = read_logits_file(f.in);
  if (!f.data.empty()) {
    const Corpus corpus = read_conll_file(f.data, {.labels_required = false});
    Shared plain = s;
    plain.emissions = "features";
    std::vector<AlignedSentence> aligned;
    for (auto& ex : prepare(corpus, data_source(plain, nullptr))) {
      aligned.push_back(std::move(ex.aligned));
    }
    load_external(input, aligned);
  }
  LogitsFile output;
  output.header = input.header;
  for (const auto& record : input.records) {
    output.records.push_back(to_record(record.id, record.subwords, to_emissions(record)));
  }
  if (f.out.empty()) {
    write_logits(out, output);
  } else {
    write_logits_file(f.out, output);
    out << "records=" << output.records.size() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aspect and sentiment sequence tagger with a grammar-constrained CRF",
               "auxcrf"};
  app.require_subcommand(1);

  Shared shared;

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  add_shared(train_cmd, shared);
  train_cmd->add_option("--train", tf.train, "Training CoNLL file")->required();
  train_cmd->add_option("--validation", tf.validation, "Validation CoNLL file");
  train_cmd->add_option("--n-train", tf.n_train,
                        "Split --train: this many sentences train, the rest validate");
  train_cmd->add_option("--out", tf.out, "Final model file")->required();
  train_cmd->add_option("--best-out", tf.best_out, "Best-validation model file");
  train_cmd->add_option("--metrics", tf.metrics, "Per-epoch metrics CSV");
  train_cmd->add_option("--epochs", tf.epochs);
  train_cmd->add_option("--lr", tf.lr, "Peak learning rate");
  train_cmd->add_option("--lr-grid", tf.lr_grid, "Comma-separated peak learning rates to try")
      ->delimiter(',');
  train_cmd->add_option("--weight-decay", tf.weight_decay);
  train_cmd->add_option("--batch-size", tf.batch_size);
  train_cmd->add_option("--warmup", tf.warmup, "Warmup fraction of total steps");
  train_cmd->add_option("--hash-dim", tf.hash_dim);
  train_cmd->add_option("--init-scale", tf.init_scale);

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold labels");
  add_shared(eval_cmd, shared);
  eval_cmd->add_option("--gold", ef.gold, "Gold CoNLL file")->required();
  eval_cmd->add_option("--pred", ef.pred, "Predicted CoNLL file");
  eval_cmd->add_option("--model", ef.model, "Tag --gold with this model");
  eval_cmd->add_option("--baseline", ef.baseline, "Fit the argmax baseline on this CoNLL file");
  eval_cmd->add_option("--violations", ef.violations, "Write BIO violations as CSV");

  TagFlags tgf;
  auto* tag_cmd = app.add_subcommand("tag", "Label CoNLL tokens with a model");
  add_shared(tag_cmd, shared);
  tag_cmd->add_option("--model", tgf.model)->required();
  tag_cmd->add_option("--data", tgf.data, "CoNLL input; labels optional")->required();
  tag_cmd->add_option("--out", tgf.out, "Output CoNLL file (default stdout)");

  AuditFlags af;
  auto* audit_cmd = app.add_subcommand("audit", "List BIO violations in predicted labels");
  add_shared(audit_cmd, shared);
  audit_cmd->add_option("--pred", af.pred, "Predicted CoNLL file");
  audit_cmd->add_option("--violations", af.violations, "Write violations as CSV");
  audit_cmd->add_flag("--show-mask", af.show_mask, "Print the label grammar table");

  StatsFlags sf;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus label counts and vocabulary overlap");
  add_shared(stats_cmd, shared);
  stats_cmd->add_option("--data", sf.data, "CoNLL file counted as the training split");
  stats_cmd->add_option("--train", sf.train);
  stats_cmd->add_option("--validation", sf.validation);
  stats_cmd->add_option("--test", sf.test);

  SynthFlags yf;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic review corpus");
  add_shared(synth_cmd, shared);
  synth_cmd->add_option("--n", yf.sentences, "Number of sentences")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", yf.out, "Output CoNLL file (default stdout)");
  synth_cmd->add_option("--vocab-out", yf.vocab_out, "Write a matching subword vocabulary");
  synth_cmd->add_flag("--deterministic", yf.deterministic,
                      "Every token string keeps a single label");

  ConvertFlags cf;
  auto* convert_cmd =
      app.add_subcommand("convert-logits", "Rewrite a logits file with all ten tag columns");
  add_shared(convert_cmd, shared);
  convert_cmd->add_option("--in", cf.in, "Input logits (JSON lines)")->required();
  convert_cmd->add_option("--out", cf.out, "Output logits (default stdout)");
  convert_cmd->add_option("--data", cf.data, "Check records against this CoNLL file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    err << "run 'auxcrf --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_cmd, shared, tf, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_cmd, shared, ef, out);
    if (tag_cmd->parsed()) return cmd_tag(tag_cmd, shared, tgf, out);
    if (audit_cmd->parsed()) return cmd_audit(af, out);
    if (stats_cmd->parsed()) return cmd_stats(sf, out);
    if (synth_cmd->parsed()) return cmd_synth(synth_cmd, shared, yf, out);
    if (convert_cmd->parsed()) return cmd_convert(shared, cf, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidConfig ? kExitUsage : kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace auxcrf
