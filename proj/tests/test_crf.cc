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

#include "auxcrf/crf.h"
#include "auxcrf/error.h"
#include "auxcrf/rng.h"
#include "crf_oracle.h"
#include "test_util.h"

using namespace auxcrf;
using namespace auxcrf::testing;

namespace {

double nll_of(const CrfParams& p, const EmissionMatrix& e, std::span<const Tag> gold,
              const ConstraintMask* mask) {
  return log_partition(p, e, mask) - sequence_score(p, e, gold);
}

std::vector<Tag> random_labels(Rng& rng, std::size_t n) {
  std::vector<Tag> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(tag_at(rng.index(kNumTags)));
  return out;
}

// Largest |analytic - central difference| over every coordinate.
double gradient_error(const CrfInstance& inst, std::span<const Tag> gold,
                      const ConstraintMask* mask) {
  const double h = 1e-5;
  CrfParams pg;
  EmissionMatrix eg(inst.emissions.length());
  accumulate_nll_grad(inst.params, inst.emissions, gold, mask, pg, eg);

  double worst = 0.0;
  std::vector<double> flat = inst.params.flatten();
  const std::vector<double> analytic = pg.flatten();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CrfParams plus, minus;
    auto f = flat;
    f[i] += h;
    plus.unflatten(f);
    f[i] -= 2 * h;
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

}  // namespace

TEST_CASE("sequence_score") {
  CrfParams zero;
  EmissionMatrix one(1);
  CHECK(sequence_score(zero, one, tags({"O"})) == 0.0);

  EmissionMatrix two(2);
  two.at(0, Tag::kBAspect) = 1.5;
  two.at(1, Tag::kY) = -0.25;
  CHECK(sequence_score(zero, two, tags({"B-ASPECT", "Y"})) == 1.25);

  Rng rng(11);
  const auto inst = random_instance(rng, 3);
  const auto labels = tags({"A", "I-SENTIMENT", "Z"});
  const std::vector<std::size_t> idx = {5, 4, 6};
  CHECK(sequence_score(inst.params, inst.emissions, labels) ==
        doctest::Approx(direct_score(inst, idx, nullptr, 0.0)).epsilon(1e-14));
  CHECK_THROWS_AS(sequence_score(zero, two, tags({"O"})), Error);
}

TEST_CASE("log_partition closed forms") {
  CrfParams zero;
  CHECK(log_partition(zero, EmissionMatrix(1)) == doctest::Approx(std::log(10.0)));
  CHECK(log_partition(zero, EmissionMatrix(3)) == doctest::Approx(3 * std::log(10.0)));

  // Only A -> O -> Z is legal.
  ConstraintMask one_path = ConstraintMask::forbid_all();
  one_path.start[index_of(Tag::kA)] = true;
  one_path.transition[index_of(Tag::kA)][index_of(Tag::kO)] = true;
  one_path.transition[index_of(Tag::kO)][index_of(Tag::kZ)] = true;
  one_path.end[index_of(Tag::kZ)] = true;
  Rng rng(3);
  const auto inst = random_instance(rng, 3);
  CHECK(log_partition(inst.params, inst.emissions, &one_path) ==
        doctest::Approx(sequence_score(inst.params, inst.emissions, tags({"A", "O", "Z"})))
            .epsilon(1e-12));
}

TEST_CASE("log_partition matches enumeration") {
  Rng rng(2024);
  const ConstraintMask mask = default_constraint_mask();
  for (int i = 0; i < 30; ++i) {
    const auto inst = random_instance(rng, 1 + rng.index(4));
    const double brute = brute_log_partition(inst);
    CHECK(std::abs(log_partition(inst.params, inst.emissions) - brute) <=
          1e-10 * std::abs(brute));
    const double brute_masked = brute_log_partition(inst, &mask);
    const double masked = log_partition(inst.params, inst.emissions, &mask);
    CHECK(std::abs(masked - brute_masked) <= 1e-10 * std::abs(brute_masked));
    CHECK(masked <= log_partition(inst.params, inst.emissions));
  }
}

TEST_CASE("log_partition is stable for large scores") {
  Rng rng(5);
  auto inst = random_instance(rng, 6, 1e3, 1e3);
  const double z = log_partition(inst.params, inst.emissions);
  CHECK(std::isfinite(z));
  CHECK(z >= viterbi(inst.params, inst.emissions).score);
}

TEST_CASE("probabilities over all sequences sum to one") {
  Rng rng(8);
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto inst = random_instance(rng, n);
    const double z = log_partition(inst.params, inst.emissions);
    double total = 0.0;
    enumerate_paths(n, [&](const std::vector<std::size_t>& labels) {
      std::vector<Tag> t;
      for (auto i : labels) t.push_back(tag_at(i));
      const double p = std::exp(sequence_score(inst.params, inst.emissions, t) - z);
      CHECK(p > 0.0);
      CHECK(p <= 1.0);
      total += p;
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single position gradient is softmax minus one-hot") {
  CrfParams zero;
  EmissionMatrix e(1);
  Rng rng(1);
  for (double& v : e.values()) v = rng.uniform(-2, 2);
  CrfParams pg;
  EmissionMatrix eg(1);
  const auto gold = tags({"B-SENTIMENT"});
  const double nll = accumulate_nll_grad(zero, e, gold, nullptr, pg, eg);
  double z = 0.0;
  for (double v : e[0]) z += std::exp(v);
  for (std::size_t k = 0; k < kNumTags; ++k) {
    const double expect = std::exp(e[0][k]) / z - (k == index_of(Tag::kBSentiment) ? 1.0 : 0.0);
    CHECK(eg[0][k] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(nll == doctest::Approx(std::log(z) - e.at(0, Tag::kBSentiment)));
}

TEST_CASE("gradients match central differences") {
  Rng rng(77);
  const ConstraintMask mask = default_constraint_mask();
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 1 + rng.index(6);
    const auto inst = random_instance(rng, n);
    CHECK(gradient_error(inst, random_labels(rng, n), nullptr) < 1e-6);
    if (n >= 3) {
      const auto legal = viterbi(inst.params, inst.emissions, &mask).labels;
      CHECK(gradient_error(inst, legal, &mask) < 1e-6);
    }
  }
}

TEST_CASE("masked entries get no gradient") {
  Rng rng(4);
  const ConstraintMask mask = default_constraint_mask();
  const auto inst = random_instance(rng, 4);
  const auto gold = tags({"A", "B-ASPECT", "X-ASPECT", "Z"});
  CrfParams pg;
  EmissionMatrix eg(4);
  accumulate_nll_grad(inst.params, inst.emissions, gold, &mask, pg, eg);
  for (Tag a : kAllTags) {
    if (!mask.allows_start(a)) CHECK(pg.start[index_of(a)] == 0.0);
    if (!mask.allows_end(a)) CHECK(pg.end[index_of(a)] == 0.0);
    for (Tag b : kAllTags) {
      if (!mask.allows(a, b)) CHECK(pg.transitions[index_of(a)][index_of(b)] == 0.0);
    }
  }
}

TEST_CASE("nll is non-negative and batch loss is the mean") {
  Rng rng(9);
  std::vector<CrfInstance> insts;
  std::vector<std::vector<Tag>> golds;
  for (int i = 0; i < 4; ++i) {
    insts.push_back(random_instance(rng, 2 + i));
    golds.push_back(random_labels(rng, 2 + i));
  }
  const CrfParams& params = insts[0].params;
  std::vector<CrfExample> batch;
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    batch.push_back({&insts[i].emissions, golds[i]});
    const double nll = nll_of(params, insts[i].emissions, golds[i], nullptr);
    CHECK(nll >= 0.0);
    sum += nll;
  }
  const NllResult r = nll_and_grad(params, batch);
  CHECK(r.nll == doctest::Approx(sum / 4).epsilon(1e-12));
  REQUIRE(r.grad.emissions.size() == 4);

  CrfParams pg;
  EmissionMatrix eg(insts[2].emissions.length());
  accumulate_nll_grad(params, insts[2].emissions, golds[2], nullptr, pg, eg);
  CHECK(r.grad.emissions[2].values()[3] == doctest::Approx(eg.values()[3] / 4).epsilon(1e-12));
}

TEST_CASE("gold outside the mask is rejected") {
  Rng rng(10);
  const auto inst = random_instance(rng, 3);
  const ConstraintMask mask = default_constraint_mask();
  CrfParams pg;
  EmissionMatrix eg(3);
  try {
    accumulate_nll_grad(inst.params, inst.emissions, tags({"A", "I-ASPECT", "Z"}), &mask, pg,
                        eg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGoldViolatesMask);
  }
}

TEST_CASE("viterbi on a decoupled chain picks per-position maxima") {
  CrfParams zero;
  EmissionMatrix e(4);
  const auto want = tags({"Y", "O", "B-ASPECT", "X-SENTIMENT"});
  for (std::size_t t = 0; t < 4; ++t) e.at(t, want[t]) = 5.0;
  const Decoded d = viterbi(zero, e);
  CHECK(d.labels == want);
  CHECK(d.score == 20.0);
}

TEST_CASE("viterbi ties go to the lowest tag index") {
  const Decoded d = viterbi(CrfParams{}, EmissionMatrix(3));
  CHECK(d.labels == tags({"O", "O", "O"}));
  const ConstraintMask mask = default_constraint_mask();
  CHECK(viterbi(CrfParams{}, EmissionMatrix(3), &mask).labels == tags({"A", "O", "Z"}));
}

TEST_CASE("viterbi matches enumeration") {
  Rng rng(31337);
  const ConstraintMask mask = default_constraint_mask();
  for (int i = 0; i < 30; ++i) {
    const std::size_t n = 1 + rng.index(4);
    const auto inst = random_instance(rng, n);
    const auto brute = brute_viterbi(inst);
    const Decoded d = viterbi(inst.params, inst.emissions);
    CHECK(d.labels == brute.labels);
    CHECK(d.score == doctest::Approx(brute.score).epsilon(1e-12));
    if (n >= 3) {
      const auto brute_masked = brute_viterbi(inst, &mask);
      const Decoded dm = viterbi(inst.params, inst.emissions, &mask);
      CHECK(dm.labels == brute_masked.labels);
      CHECK(dm.score == doctest::Approx(brute_masked.score).epsilon(1e-12));
    }
  }
}

TEST_CASE("masked viterbi output is always legal") {
  Rng rng(99);
  const ConstraintMask mask = default_constraint_mask();
  for (int i = 0; i < 500; ++i) {
    const auto inst = random_instance(rng, 3 + rng.index(12), 3.0, 10.0);
    CHECK(mask.is_legal(viterbi(inst.params, inst.emissions, &mask).labels));
  }
}

TEST_CASE("no legal path") {
  const ConstraintMask none = ConstraintMask::forbid_all();
  try {
    viterbi(CrfParams{}, EmissionMatrix(2), &none);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoLegalPath);
  }
  // A single position cannot be both the A start and the Z end.
  const ConstraintMask mask = default_constraint_mask();
  CHECK_THROWS_AS(viterbi(CrfParams{}, EmissionMatrix(1), &mask), Error);
}

TEST_CASE("parameter helpers") {
  const CrfParams a = CrfParams::random(5);
  CHECK(a == CrfParams::random(5));
  CHECK_FALSE(a == CrfParams::random(6));
  for (double v : a.flatten()) CHECK(std::abs(v) < 0.1);
  CrfParams b;
  b.unflatten(a.flatten());
  CHECK(a == b);
  CHECK(a.flatten().size() == CrfParams::kNumParameters);
  CHECK(a.flatten()[index_of(Tag::kA) * kNumTags + index_of(Tag::kO)] ==
        a.transitions[index_of(Tag::kA)][index_of(Tag::kO)]);
  CHECK(a.flatten()[100 + 3] == a.start[3]);
  CHECK(a.flatten()[110 + 7] == a.end[7]);
  CHECK(std::isinf(log_sum_exp({})));
  const std::vector<double> big = {1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
}
