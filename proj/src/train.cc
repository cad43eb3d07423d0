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

#include "auxcrf/train.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "auxcrf/error.h"
#include "auxcrf/eval.h"
#include "auxcrf/optim.h"
#include "auxcrf/rng.h"

namespace auxcrf {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, what);
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    invalid("bad value '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  invalid("bad boolean '" + text + "' for " + key);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void validate(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    invalid("learning_rate must be positive");
  }
  if (!(config.weight_decay >= 0.0)) invalid("weight_decay must be non-negative");
  if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction <= 1.0)) {
    invalid("warmup_fraction must lie in [0, 1]");
  }
  if (config.batch_size == 0) invalid("batch_size must be at least 1");
  if (config.threads == 0) invalid("threads must be at least 1");
  if (!(config.init_scale >= 0.0)) invalid("init_scale must be non-negative");
  if (config.hash_dim < kMinHashDim || (config.hash_dim & (config.hash_dim - 1)) != 0) {
    invalid("hash_dim must be a power of two >= 65536");
  }
}

TrainConfig parse_config(std::istream& in, TrainConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      invalid("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "learning_rate") {
      base.learning_rate = parse_number<double>(key, value);
    } else if (key == "weight_decay") {
      base.weight_decay = parse_number<double>(key, value);
    } else if (key == "batch_size") {
      base.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "epochs") {
      base.epochs = parse_number<std::size_t>(key, value);
    } else if (key == "warmup_fraction") {
      base.warmup_fraction = parse_number<double>(key, value);
    } else if (key == "seed") {
      base.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "mask_in_training") {
      base.mask_in_training = parse_bool(key, value);
    } else if (key == "mask_in_decoding") {
      base.mask_in_decoding = parse_bool(key, value);
    } else if (key == "threads") {
      base.threads = parse_number<std::size_t>(key, value);
    } else if (key == "hash_dim") {
      base.hash_dim = parse_number<std::uint32_t>(key, value);
    } else if (key == "init_scale") {
      base.init_scale = parse_number<double>(key, value);
    } else {
      invalid("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  validate(base);
  return base;
}

TrainConfig load_config_file(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  return parse_config(in, base);
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream os;
  os << "learning_rate = " << shortest(c.learning_rate) << '\n'
     << "weight_decay = " << shortest(c.weight_decay) << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "epochs = " << c.epochs << '\n'
     << "warmup_fraction = " << shortest(c.warmup_fraction) << '\n'
     << "seed = " << c.seed << '\n'
     << "mask_in_training = " << (c.mask_in_training ? 1 : 0) << '\n'
     << "mask_in_decoding = " << (c.mask_in_decoding ? 1 : 0) << '\n'
     << "threads = " << c.threads << '\n'
     << "hash_dim = " << c.hash_dim << '\n'
     << "init_scale = " << shortest(c.init_scale) << '\n';
  return os.str();
}

double lr_at_step(const TrainConfig& config, std::size_t step, std::size_t total_steps) {
  const auto warmup = static_cast<std::size_t>(
      std::floor(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) {
    return config.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
  }
  if (step >= total_steps) return 0.0;
  return config.learning_rate * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

std::size_t total_steps(const TrainConfig& config, std::size_t num_train) {
  const std::size_t per_epoch = (num_train + config.batch_size - 1) / config.batch_size;
  return config.epochs * per_epoch;
}

Model initial_model(const TrainConfig& config, EmissionSource source,
                    std::span<const TrainingExample> train) {
  validate(config);
  Model model;
  model.crf = CrfParams::random(mix_seed(config.seed, 0), config.init_scale);
  model.emitter = FeatureEmitter(config.hash_dim);
  model.source = source;
  model.mask_in_training = config.mask_in_training;
  model.mask_in_decoding = config.mask_in_decoding;
  if (source == EmissionSource::kFeatures) {
    for (const auto& example : train) model.emitter.register_features(example.aligned);
  }
  return model;
}

std::vector<std::vector<Tag>> predict_words(const Model& model,
                                            std::span<const TrainingExample> examples,
                                            std::size_t* repairs) {
  std::vector<std::vector<Tag>> out;
  out.reserve(examples.size());
  for (const auto& example : examples) {
    const EmissionMatrix* external = example.external ? &*example.external : nullptr;
    Prediction p = predict(model, example.aligned, external);
    if (repairs != nullptr) *repairs += p.repaired_words.size();
    out.push_back(std::move(p.word_labels));
  }
  return out;
}

namespace {

struct SentenceGradient {
  double nll = 0.0;
  CrfParams crf;
  EmissionMatrix emissions;
};

// Runs fn(k) for k in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(threads, count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < count; k += workers) fn(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void load_parameters(Model& model, std::span<const double> theta) {
  model.crf.unflatten(theta.first(CrfParams::kNumParameters));
  auto emitter = model.emitter.parameters();
  std::copy(theta.begin() + CrfParams::kNumParameters, theta.end(), emitter.begin());
}

std::vector<double> gather_parameters(const Model& model) {
  std::vector<double> theta = model.crf.flatten();
  auto emitter = model.emitter.parameters();
  theta.insert(theta.end(), emitter.begin(), emitter.end());
  return theta;
}

}  // namespace

TrainResult train(const TrainConfig& config, Model initial,
                  std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> validation_set) {
  validate(config);
  if (train_set.empty()) throw Error(ErrorCode::kEmptySplit, "training split is empty");
  if (validation_set.empty()) throw Error(ErrorCode::kEmptySplit, "validation split is empty");

  static const ConstraintMask kMask = default_constraint_mask();
  const ConstraintMask* mask = config.mask_in_training ? &kMask : nullptr;

  Model model = std::move(initial);
  model.mask_in_training = config.mask_in_training;
  model.mask_in_decoding = config.mask_in_decoding;
  const bool features = model.source == EmissionSource::kFeatures;

  for (const auto* set : {&train_set, &validation_set}) {
    if (features) break;
    for (const auto& example : *set) {
      if (!example.external) {
        throw Error(ErrorCode::kMissingSentence,
                    "no external emissions for sentence '" + example.aligned.id + "'");
      }
    }
  }

  // Feature slots per training position, fixed for the whole run.
  std::vector<std::vector<std::vector<FeatureId>>> train_features;
  std::vector<std::vector<std::vector<std::size_t>>> train_slots;
  if (features) {
    for (const auto& example : train_set) {
      auto ids = model.emitter.featurize(example.aligned);
      std::vector<std::vector<std::size_t>> slots(ids.size());
      for (std::size_t t = 0; t < ids.size(); ++t) {
        for (FeatureId id : ids[t]) slots[t].push_back(model.emitter.register_feature(id));
      }
      train_features.push_back(std::move(ids));
      train_slots.push_back(std::move(slots));
    }
  }

  TrainResult result;
  result.best_model = model;
  std::vector<double> theta = gather_parameters(model);
  AdamW optimizer(theta.size(), {.weight_decay = config.weight_decay});

  const std::size_t n = train_set.size();
  const std::size_t steps = total_steps(config, n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::size_t step = 0;
  double best_f1 = -1.0;
  std::vector<double> grad(theta.size());
  std::vector<SentenceGradient> partial;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_nll = 0.0;

    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::size_t batch = end - begin;
      partial.assign(batch, SentenceGradient{});

      parallel_for(batch, config.threads, [&](std::size_t k) {
        const std::size_t idx = order[begin + k];
        const TrainingExample& example = train_set[idx];
        const EmissionMatrix emissions = features ? model.emitter.emit(train_features[idx])
                                                  : *example.external;
        SentenceGradient& g = partial[k];
        g.emissions = EmissionMatrix(emissions.length());
        g.nll = accumulate_nll_grad(model.crf, emissions, example.aligned.subword_labels,
                                    mask, g.crf, g.emissions);
      });

      // Ordered reduction: identical sums for any thread count.
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_nll = 0.0;
      for (std::size_t k = 0; k < batch; ++k) {
        const std::size_t idx = order[begin + k];
        const SentenceGradient& g = partial[k];
        if (!std::isfinite(g.nll)) {
          throw Error(ErrorCode::kNonFiniteLoss,
                      "epoch " + std::to_string(epoch) + ", step " + std::to_string(step) +
                          ": loss " + shortest(g.nll) + " on sentence '" +
                          train_set[idx].aligned.id + "'",
                      step);
        }
        batch_nll += g.nll;
        const auto crf_grad = g.crf.flatten();
        for (std::size_t i = 0; i < crf_grad.size(); ++i) grad[i] += crf_grad[i];
        if (!features) continue;
        const auto& slots = train_slots[idx];
        for (std::size_t t = 0; t < slots.size(); ++t) {
          const auto row = g.emissions[t];
          for (std::size_t s : slots[t]) {
            double* dst = grad.data() + CrfParams::kNumParameters + s * kNumTags;
            for (std::size_t c = 0; c < kNumTags; ++c) dst[c] += row[c];
          }
        }
      }
      const double scale = 1.0 / static_cast<double>(batch);
      for (double& v : grad) v *= scale;
      epoch_nll += batch_nll;

      optimizer.step(theta, grad, lr_at_step(config, step, steps));
      load_parameters(model, theta);
      ++step;
    }

    const auto predicted = predict_words(model, validation_set);
    std::vector<std::vector<Tag>> gold;
    gold.reserve(validation_set.size());
    for (const auto& example : validation_set) gold.push_back(example.aligned.word_labels);

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.step = step;
    metrics.train_nll = epoch_nll / static_cast<double>(n);
    metrics.val_token_f1 = token_f1(gold, predicted).micro().f1();
    metrics.val_entity_f1 =
        entity_f1(gold, predicted, EntityDefinition::kCollapsedToken).micro().f1();
    result.history.push_back(metrics);
    if (metrics.val_token_f1 > best_f1) {
      best_f1 = metrics.val_token_f1;
      result.best_epoch = epoch;
      result.best_model = model;
    }
  }

  result.final_model = std::move(model);
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> history) {
  out << "epoch,step,train_nll,val_f1,val_entity_f1\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << m.step << ',' << shortest(m.train_nll) << ','
        << shortest(m.val_token_f1) << ',' << shortest(m.val_entity_f1) << '\n';
  }
}

}  // namespace auxcrf
