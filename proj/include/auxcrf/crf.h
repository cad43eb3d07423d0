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

#ifndef AUXCRF_CRF_H_
#define AUXCRF_CRF_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "auxcrf/labelspace.h"

namespace auxcrf {

using TagScores = std::array<double, kNumTags>;
using TransitionMatrix = std::array<TagScores, kNumTags>;

// Score substituted for a transition, start or end entry that the
// constraint mask forbids, during forward-backward. Parameters themselves
// are never overwritten.
inline constexpr double kMaskPenalty = -1e4;

// Linear-chain CRF parameters. transitions[i][j] scores tag i -> tag j.
// Also used as the container for gradients with respect to these entries.
struct CrfParams {
  TransitionMatrix transitions{};
  TagScores start{};
  TagScores end{};

  static constexpr std::size_t kNumParameters = kNumTags * kNumTags + 2 * kNumTags;

  // Entries drawn uniformly from (-scale, scale) with a seeded engine.
  static CrfParams random(std::uint64_t seed, double scale = 0.1);

  bool all_finite() const;

  // transitions (row-major), then start, then end.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);

  bool operator==(const CrfParams&) const = default;
};

// Per-position tag scores for one subword sequence, row-major T x kNumTags.
class EmissionMatrix {
 public:
  EmissionMatrix() = default;
  explicit EmissionMatrix(std::size_t length) : length_(length), scores_(length * kNumTags, 0.0) {}

  std::size_t length() const { return length_; }

  std::span<double, kNumTags> operator[](std::size_t t) {
    return std::span<double, kNumTags>(scores_.data() + t * kNumTags, kNumTags);
  }
  std::span<const double, kNumTags> operator[](std::size_t t) const {
    return std::span<const double, kNumTags>(scores_.data() + t * kNumTags, kNumTags);
  }
  double& at(std::size_t t, Tag tag) { return scores_[t * kNumTags + index_of(tag)]; }
  double at(std::size_t t, Tag tag) const { return scores_[t * kNumTags + index_of(tag)]; }

  std::span<double> values() { return scores_; }
  std::span<const double> values() const { return scores_; }

  bool all_finite() const;
  bool operator==(const EmissionMatrix&) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<double> scores_;
};

// start[y0] + sum_t emissions[t][y_t] + sum_t transitions[y_t][y_t+1] + end[y_T-1].
// Unmasked; throws Error(kLengthMismatch) if |labels| != T.
double sequence_score(const CrfParams& params, const EmissionMatrix& emissions,
                      std::span<const Tag> labels);

// log of the sum of exp(sequence_score) over all tag sequences. With a mask,
// forbidden entries score kMaskPenalty instead of their parameter value.
double log_partition(const CrfParams& params, const EmissionMatrix& emissions,
                     const ConstraintMask* mask = nullptr);

struct CrfExample {
  const EmissionMatrix* emissions;
  std::span<const Tag> gold;
};

struct CrfGradient {
  CrfParams params;
  std::vector<EmissionMatrix> emissions;  // one per batch entry
};

struct NllResult {
  double nll = 0.0;  // mean over the batch
  CrfGradient grad;  // gradient of the mean
};

// Negative log-likelihood of the gold sequences and its exact gradient via
// forward-backward. Masked entries receive zero gradient. Throws
// Error(kGoldViolatesMask) when a gold path is illegal under `mask`.
NllResult nll_and_grad(const CrfParams& params, std::span<const CrfExample> batch,
                       const ConstraintMask* mask = nullptr);

// Single-sentence building block of nll_and_grad. Returns the sentence NLL
// and adds its (unscaled) gradient into `param_grad` and `emission_grad`,
// which must have the same length as `emissions`.
double accumulate_nll_grad(const CrfParams& params, const EmissionMatrix& emissions,
                           std::span<const Tag> gold, const ConstraintMask* mask,
                           CrfParams& param_grad, EmissionMatrix& emission_grad);

struct Decoded {
  std::vector<Tag> labels;
  double score = 0.0;  // sequence_score of `labels`
};

// Highest-scoring sequence; ties go to the lowest tag index at every
// decision. With a mask only legal sequences are considered; throws
// Error(kNoLegalPath) when none exists.
Decoded viterbi(const CrfParams& params, const EmissionMatrix& emissions,
                const ConstraintMask* mask = nullptr);

// log(sum(exp(values))) computed stably; -inf for an empty input.
double log_sum_exp(std::span<const double> values);

}  // namespace auxcrf

#endif  // AUXCRF_CRF_H_
