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

#ifndef AUXCRF_MODEL_H_
#define AUXCRF_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "auxcrf/align.h"
#include "auxcrf/crf.h"
#include "auxcrf/emit.h"

namespace auxcrf {

enum class EmissionSource { kFeatures, kExternal };

// Everything needed to tag new text: CRF parameters, the emission model
// and how sentences are segmented and decoded.
struct Model {
  CrfParams crf;
  FeatureEmitter emitter;
  EmissionSource source = EmissionSource::kFeatures;
  bool mask_in_training = true;
  bool mask_in_decoding = true;
  // Segmenter vocabulary file; empty means one subword per word.
  std::string vocabulary;
  bool lowercase = true;
  std::size_t max_subwords = kDefaultMaxSubwords;

  bool operator==(const Model&) const = default;
};

// Text format, one item per line, doubles as C99 hex floats so that a
// save/load round trip is bit-exact:
//
//   auxcrf-model 1
//   tags O B-ASPECT I-ASPECT B-SENTIMENT I-SENTIMENT A Z X-ASPECT X-SENTIMENT Y
//   source features|external
//   mask_in_training 0|1
//   mask_in_decoding 0|1
//   vocabulary <path or ->
//   lowercase 0|1
//   max_subwords <n>
//   hash_dim <n>
//   hash_seed <n>
//   start <10 values>
//   end <10 values>
//   transitions
//   <10 lines of 10 values, row = source tag>
//   features <n>
//   <feature id> <10 values>     (n lines, ascending id)
//   end-model
void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in);
void save_model_file(const std::filesystem::path& path, const Model& model);
Model load_model_file(const std::filesystem::path& path);

// Segmenter named by the model (vocabulary file or whole-word).
Segmenter make_segmenter(const Model& model);

EmissionMatrix model_emissions(const Model& model, const AlignedSentence& aligned,
                               const EmissionMatrix* external = nullptr);

struct Prediction {
  std::vector<Tag> subword_labels;
  std::vector<Tag> word_labels;
  std::vector<std::size_t> repaired_words;
  double score = 0.0;
};

// Viterbi decode (masked if the model says so) and collapse to words.
// External-source models require `external`.
Prediction predict(const Model& model, const AlignedSentence& aligned,
                   const EmissionMatrix* external = nullptr);

}  // namespace auxcrf

#endif  // AUXCRF_MODEL_H_
