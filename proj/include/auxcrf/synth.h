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

#ifndef AUXCRF_SYNTH_H_
#define AUXCRF_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "auxcrf/corpus.h"

namespace auxcrf {

struct SynthOptions {
  std::size_t sentences = 600;
  std::uint64_t seed = 1;
  // Restricts generation to constructions in which every word type always
  // carries the same label.
  bool deterministic_labels = false;
};

// Template-generated, informal Indonesian-style hotel review sentences with
// gold aspect and sentiment annotations. Same options, same corpus.
Corpus synthesize(const SynthOptions& options);

// Subword vocabulary covering the synthetic lexicon: word stems plus "##"
// continuation pieces such as "##nya", so suffixed forms split into
// several subwords under WordPieceSegmenter.
std::vector<std::string> synthetic_vocabulary();

}  // namespace auxcrf

#endif  // AUXCRF_SYNTH_H_
