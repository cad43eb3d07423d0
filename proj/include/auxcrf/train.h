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

#ifndef AUXCRF_TRAIN_H_
#define AUXCRF_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auxcrf/align.h"
#include "auxcrf/crf.h"
#include "auxcrf/model.h"

namespace auxcrf {

struct TrainConfig {
  double learning_rate = 1e-4;  // peak of the schedule
  double weight_decay = 1e-2;
  std::size_t batch_size = 32;
  std::size_t epochs = 3;
  double warmup_fraction = 0.5;
  std::uint64_t seed = 42;
  bool mask_in_training = true;
  bool mask_in_decoding = true;
  std::size_t threads = 1;
  std::uint32_t hash_dim = kDefaultHashDim;
  double init_scale = 0.0;  // transitions/start/end ~ U(-init_scale, init_scale)
};

// Throws Error(kInvalidConfig) when a field is out of range.
void validate(const TrainConfig& config);

// Overrides fields of `base` from "key = value" lines. Keys are the field
// names above; '#' starts a comment. Throws Error(kInvalidConfig).
TrainConfig parse_config(std::istream& in, TrainConfig base = {});
TrainConfig load_config_file(const std::filesystem::path& path, TrainConfig base = {});
std::string format_config(const TrainConfig& config);

// Linear warmup from 0 to the peak over the first
// floor(warmup_fraction * total_steps) steps, then linear decay reaching 0
// at total_steps.
double lr_at_step(const TrainConfig& config, std::size_t step, std::size_t total_steps);

std::size_t total_steps(const TrainConfig& config, std::size_t num_train);

struct TrainingExample {
  AlignedSentence aligned;
  std::optional<EmissionMatrix> external;  // required for external-source models
};

// Fresh model: seeded small random CRF parameters and, for feature
// emissions, a zero weight row for every feature seen in `train`.
Model initial_model(const TrainConfig& config, EmissionSource source,
                    std::span<const TrainingExample> train);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // optimizer steps taken so far
  double train_nll = 0.0;  // mean sentence NLL over the epoch
  double val_token_f1 = 0.0;   // token-level micro F1 over B/I labels
  double val_entity_f1 = 0.0;  // collapsed-token entity micro F1
};

struct TrainResult {
  Model final_model;
  Model best_model;  // highest validation token F1, earliest on ties
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  std::vector<EpochMetrics> history;
};

// Mini-batch AdamW over every CRF and emitter parameter. Batches come from
// a per-epoch seeded shuffle; the last partial batch is kept. Deterministic
// for a given config, including the thread count. Throws kEmptySplit or
// kNonFiniteLoss.
TrainResult train(const TrainConfig& config, Model initial,
                  std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> validation_set);

// Word-level predictions for every example.
std::vector<std::vector<Tag>> predict_words(const Model& model,
                                            std::span<const TrainingExample> examples,
                                            std::size_t* repairs = nullptr);

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> history);

}  // namespace auxcrf

#endif  // AUXCRF_TRAIN_H_
