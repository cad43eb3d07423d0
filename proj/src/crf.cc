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

#include "auxcrf/crf.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auxcrf/error.h"
#include "auxcrf/rng.h"

namespace auxcrf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Parameters as seen at score time: masked entries replaced by `penalty`.
struct ScoredParams {
  TransitionMatrix transitions;
  TagScores start;
  TagScores end;
};

ScoredParams apply_mask(const CrfParams& params, const ConstraintMask* mask,
                        double penalty) {
  ScoredParams out{params.transitions, params.start, params.end};
  if (mask == nullptr) return out;
  for (std::size_t i = 0; i < kNumTags; ++i) {
    if (!mask->start[i]) out.start[i] = penalty;
    if (!mask->end[i]) out.end[i] = penalty;
    for (std::size_t j = 0; j < kNumTags; ++j) {
      if (!mask->transition[i][j]) out.transitions[i][j] = penalty;
    }
  }
  return out;
}

double lse(const TagScores& values) { return log_sum_exp(values); }

using Lattice = std::vector<TagScores>;

Lattice forward(const ScoredParams& p, const EmissionMatrix& e) {
  const std::size_t len = e.length();
  Lattice alpha(len);
  for (std::size_t j = 0; j < kNumTags; ++j) alpha[0][j] = p.start[j] + e[0][j];
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < kNumTags; ++j) {
      TagScores incoming;
      for (std::size_t i = 0; i < kNumTags; ++i) {
        incoming[i] = alpha[t - 1][i] + p.transitions[i][j];
      }
      alpha[t][j] = lse(incoming) + e[t][j];
    }
  }
  return alpha;
}

Lattice backward(const ScoredParams& p, const EmissionMatrix& e) {
  const std::size_t len = e.length();
  Lattice beta(len);
  beta[len - 1] = p.end;
  for (std::size_t t = len - 1; t-- > 0;) {
    for (std::size_t i = 0; i < kNumTags; ++i) {
      TagScores outgoing;
      for (std::size_t j = 0; j < kNumTags; ++j) {
        outgoing[j] = p.transitions[i][j] + e[t + 1][j] + beta[t + 1][j];
      }
      beta[t][i] = lse(outgoing);
    }
  }
  return beta;
}

double final_log_partition(const ScoredParams& p, const Lattice& alpha) {
  TagScores last;
  for (std::size_t j = 0; j < kNumTags; ++j) last[j] = alpha.back()[j] + p.end[j];
  return lse(last);
}

void require_length(const EmissionMatrix& emissions) {
  if (emissions.length() == 0) {
    throw Error(ErrorCode::kLengthMismatch, "empty emission matrix");
  }
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double peak = *std::max_element(values.begin(), values.end());
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

CrfParams CrfParams::random(std::uint64_t seed, double scale) {
  Rng rng(seed);
  CrfParams p;
  for (auto& row : p.transitions) {
    for (double& v : row) v = rng.uniform(-scale, scale);
  }
  for (double& v : p.start) v = rng.uniform(-scale, scale);
  for (double& v : p.end) v = rng.uniform(-scale, scale);
  return p;
}

bool CrfParams::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  for (const auto& row : transitions) {
    if (!std::all_of(row.begin(), row.end(), finite)) return false;
  }
  return std::all_of(start.begin(), start.end(), finite) &&
         std::all_of(end.begin(), end.end(), finite);
}

std::vector<double> CrfParams::flatten() const {
  std::vector<double> out;
  out.reserve(kNumParameters);
  for (const auto& row : transitions) out.insert(out.end(), row.begin(), row.end());
  out.insert(out.end(), start.begin(), start.end());
  out.insert(out.end(), end.begin(), end.end());
  return out;
}

void CrfParams::unflatten(std::span<const double> values) {
  if (values.size() != kNumParameters) {
    throw Error(ErrorCode::kLengthMismatch, "expected " +
                                                std::to_string(kNumParameters) +
                                                " CRF parameters");
  }
  std::size_t k = 0;
  for (auto& row : transitions) {
    for (double& v : row) v = values[k++];
  }
  for (double& v : start) v = values[k++];
  for (double& v : end) v = values[k++];
}

bool EmissionMatrix::all_finite() const {
  return std::all_of(scores_.begin(), scores_.end(),
                     [](double v) { return std::isfinite(v); });
}

double sequence_score(const CrfParams& params, const EmissionMatrix& emissions,
                      std::span<const Tag> labels) {
  if (labels.size() != emissions.length() || labels.empty()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(emissions.length()) + " positions");
  }
  double score = params.start[index_of(labels.front())];
  for (std::size_t t = 0; t < labels.size(); ++t) {
    score += emissions[t][index_of(labels[t])];
    if (t + 1 < labels.size()) {
      score += params.transitions[index_of(labels[t])][index_of(labels[t + 1])];
    }
  }
  return score + params.end[index_of(labels.back())];
}

double log_partition(const CrfParams& params, const EmissionMatrix& emissions,
                     const ConstraintMask* mask) {
  require_length(emissions);
  const ScoredParams scored = apply_mask(params, mask, kMaskPenalty);
  return final_log_partition(scored, forward(scored, emissions));
}

double accumulate_nll_grad(const CrfParams& params, const EmissionMatrix& emissions,
                           std::span<const Tag> gold, const ConstraintMask* mask,
                           CrfParams& param_grad, EmissionMatrix& emission_grad) {
  require_length(emissions);
  if (gold.size() != emissions.length() ||
      emission_grad.length() != emissions.length()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(gold.size()) + " gold labels for " +
                    std::to_string(emissions.length()) + " positions");
  }
  if (mask != nullptr && !mask->is_legal(gold)) {
    throw Error(ErrorCode::kGoldViolatesMask,
                "gold sequence is not legal under the constraint mask");
  }

  const ScoredParams p = apply_mask(params, mask, kMaskPenalty);
  const Lattice alpha = forward(p, emissions);
  const Lattice beta = backward(p, emissions);
  const double log_z = final_log_partition(p, alpha);
  const std::size_t len = emissions.length();

  // Expected counts.
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < kNumTags; ++j) {
      const double marginal = std::exp(alpha[t][j] + beta[t][j] - log_z);
      emission_grad[t][j] += marginal;
      if (t == 0) param_grad.start[j] += marginal;
      if (t + 1 == len) param_grad.end[j] += marginal;
    }
  }
  for (std::size_t t = 0; t + 1 < len; ++t) {
    for (std::size_t i = 0; i < kNumTags; ++i) {
      for (std::size_t j = 0; j < kNumTags; ++j) {
        param_grad.transitions[i][j] += std::exp(
            alpha[t][i] + p.transitions[i][j] + emissions[t + 1][j] + beta[t + 1][j] - log_z);
      }
    }
  }

  // Observed counts.
  double gold_score = p.start[index_of(gold.front())];
  param_grad.start[index_of(gold.front())] -= 1.0;
  param_grad.end[index_of(gold.back())] -= 1.0;
  for (std::size_t t = 0; t < len; ++t) {
    const std::size_t y = index_of(gold[t]);
    emission_grad[t][y] -= 1.0;
    gold_score += emissions[t][y];
    if (t + 1 < len) {
      const std::size_t next = index_of(gold[t + 1]);
      param_grad.transitions[y][next] -= 1.0;
      gold_score += p.transitions[y][next];
    }
  }
  gold_score += p.end[index_of(gold.back())];

  // Masked entries are constants at score time.
  if (mask != nullptr) {
    for (std::size_t i = 0; i < kNumTags; ++i) {
      if (!mask->start[i]) param_grad.start[i] = 0.0;
      if (!mask->end[i]) param_grad.end[i] = 0.0;
      for (std::size_t j = 0; j < kNumTags; ++j) {
        if (!mask->transition[i][j]) param_grad.transitions[i][j] = 0.0;
      }
    }
  }
  return log_z - gold_score;
}

NllResult nll_and_grad(const CrfParams& params, std::span<const CrfExample> batch,
                       const ConstraintMask* mask) {
  NllResult result;
  if (batch.empty()) return result;
  result.grad.emissions.reserve(batch.size());
  double total = 0.0;
  for (const CrfExample& example : batch) {
    EmissionMatrix grad(example.emissions->length());
    total += accumulate_nll_grad(params, *example.emissions, example.gold, mask,
                                 result.grad.params, grad);
    result.grad.emissions.push_back(std::move(grad));
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  result.nll = total * scale;
  for (auto& row : result.grad.params.transitions) {
    for (double& v : row) v *= scale;
  }
  for (double& v : result.grad.params.start) v *= scale;
  for (double& v : result.grad.params.end) v *= scale;
  for (auto& grad : result.grad.emissions) {
    for (double& v : grad.values()) v *= scale;
  }
  return result;
}

Decoded viterbi(const CrfParams& params, const EmissionMatrix& emissions,
                const ConstraintMask* mask) {
  require_length(emissions);
  // Forbidden moves are excluded outright so a legal path always wins.
  const ScoredParams p = apply_mask(params, mask, kNegInf);
  const std::size_t len = emissions.length();

  Lattice best(len);
  std::vector<std::array<std::uint8_t, kNumTags>> back(len);
  for (std::size_t j = 0; j < kNumTags; ++j) best[0][j] = p.start[j] + emissions[0][j];
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < kNumTags; ++j) {
      double top = kNegInf;
      std::uint8_t arg = 0;
      for (std::size_t i = 0; i < kNumTags; ++i) {
        const double v = best[t - 1][i] + p.transitions[i][j];
        if (v > top) {
          top = v;
          arg = static_cast<std::uint8_t>(i);
        }
      }
      best[t][j] = top + emissions[t][j];
      back[t][j] = arg;
    }
  }

  double top = kNegInf;
  std::size_t last = 0;
  for (std::size_t j = 0; j < kNumTags; ++j) {
    const double v = best[len - 1][j] + p.end[j];
    if (v > top) {
      top = v;
      last = j;
    }
  }
  if (top == kNegInf) {
    throw Error(ErrorCode::kNoLegalPath,
                "no tag sequence of length " + std::to_string(len) +
                    " satisfies the constraint mask");
  }

  Decoded out;
  out.labels.resize(len);
  out.labels[len - 1] = tag_at(last);
  for (std::size_t t = len - 1; t > 0; --t) {
    last = back[t][last];
    out.labels[t - 1] = tag_at(last);
  }
  out.score = sequence_score(params, emissions, out.labels);
  return out;
}

}  // namespace auxcrf
