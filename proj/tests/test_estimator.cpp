/*
 * Copyright 2026 The ICE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ice/estimator.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ice::ZOrderIndex tiny_index() {
  // Multiset {5 x2, 9, 12 x3} over a 4-bit interleaved space.
  ice::ZOrderIndex idx(ice::AttributeSchema({2, 2}), 4);
  for (ice::ZKey k : {5, 5, 9, 12, 12, 12}) idx.insert(k);
  return idx;
}

}  // namespace

TEST_CASE("rank projection against a prefix-sum oracle", "[estimator]") {
  const auto idx = tiny_index();
  const std::vector<uint64_t> copies{5, 5, 9, 12, 12, 12};
  const auto oracle_begin = [&](uint64_t k) {
    uint64_t n = 0;
    for (uint64_t c : copies) n += c < k ? 1 : 0;
    return n;
  };
  const auto oracle_end = [&](uint64_t k) {
    uint64_t n = 0;
    for (uint64_t c : copies) n += c <= k ? 1 : 0;
    return n;
  };

  const std::vector<ice::ZInterval> one{{5, 9}};
  const auto r1 = ice::project_to_ranks(one, idx);
  REQUIRE(r1.intervals == std::vector<ice::RankInterval>{{0, 3}});
  REQUIRE(r1.r_sum == 3);
  REQUIRE(r1.intervals[0].begin == oracle_begin(5));
  REQUIRE(r1.intervals[0].end == oracle_end(9));

  const std::vector<ice::ZInterval> hole{{6, 8}};
  const auto r2 = ice::project_to_ranks(hole, idx);
  REQUIRE(r2.intervals.empty());
  REQUIRE(r2.r_sum == 0);

  const std::vector<ice::ZInterval> two{{3, 6}, {9, 12}};
  const auto r3 = ice::project_to_ranks(two, idx);
  REQUIRE(r3.intervals == std::vector<ice::RankInterval>{{0, 2}, {2, 6}});
  REQUIRE(r3.r_sum == 6);
}

TEST_CASE("rank sampling is uniform, deterministic, and in range", "[estimator]") {
  ice::RankIntervalSet ranks;
  ranks.intervals = {{0, 2}, {2, 6}};
  ranks.r_sum = 6;

  std::mt19937_64 rng(999);
  const auto samples = ice::sample_from_ranks(ranks, 60000, rng);
  REQUIRE(samples.size() == 60000);

  std::vector<uint64_t> hist(7, 0);
  for (uint64_t s : samples) {
    REQUIRE(s >= 1);
    REQUIRE(s <= 6);
    ++hist[s];
  }
  // Chi-square against uniform over 6 cells; df=5, alpha=0.001 -> 20.515.
  const double expect = 60000.0 / 6.0;
  double chi2 = 0;
  for (int k = 1; k <= 6; ++k) {
    const double d = static_cast<double>(hist[k]) - expect;
    chi2 += d * d / expect;
  }
  REQUIRE(chi2 < 20.515);

  std::mt19937_64 rng_a(7), rng_b(7);
  REQUIRE(ice::sample_from_ranks(ranks, 512, rng_a) ==
          ice::sample_from_ranks(ranks, 512, rng_b));

  ice::RankIntervalSet single;
  single.intervals = {{41, 42}};
  single.r_sum = 1;
  std::mt19937_64 rng_c(1);
  for (uint64_t s : ice::sample_from_ranks(single, 64, rng_c)) REQUIRE(s == 42);

  ice::RankIntervalSet empty;
  std::mt19937_64 rng_d(1);
  REQUIRE_THROWS_AS(ice::sample_from_ranks(empty, 8, rng_d), std::logic_error);
}

TEST_CASE("overflow probability worked values", "[estimator]") {
  // b=100, rSum=1000, count=2, q_b=2: est=20, 40 trials at p=0.1.
  const double p = ice::overflow_probability(20.0, 2.0, 2, 100, 1000);
  const double oracle = 780.0 * std::pow(0.9, 38) * std::pow(0.1, 2);  // C(40,2) p^k (1-p)^(M-k)
  REQUIRE_THAT(p, WithinRel(oracle, 1e-9));
  REQUIRE_THAT(p, WithinAbs(0.142, 5e-4));

  REQUIRE(ice::overflow_probability(123.0, 20.0, 0, 100, 1000) == 1.0);
  // b=rSum and count=b: the miss factor is 0^(positive) = 0.
  REQUIRE(ice::overflow_probability(1000.0, 2.0, 1000, 1000, 1000) == 0.0);
  // Hypothesized trials below the observed count: impossible.
  REQUIRE(ice::overflow_probability(1.0, 2.0, 5, 100, 1000) == 0.0);
  REQUIRE_THROWS_AS(ice::overflow_probability(1.0, 2.0, 200, 100, 1000),
                    std::invalid_argument);
}

TEST_CASE("gaussian approximation tracks the exact pmf near the mode", "[estimator]") {
  // Trials 1000, p=0.02: mu=20, sigma~4.4; a local-CLT regime.
  const double est = 50.0;      // trials = ceil(est*q_b) = 1000 at q_b=20
  const uint64_t b = 200;
  const uint64_t r_sum = 10000;  // p = 0.02
  for (uint64_t count : {12, 16, 20, 24, 28}) {
    const double exact = ice::overflow_probability(est, 20.0, count, b, r_sum);
    const double gauss = ice::overflow_probability_gaussian(est, 20.0, count, b, r_sum);
    REQUIRE_THAT(gauss, WithinRel(exact, 0.15));
  }
}

TEST_CASE("estimate on degenerate boxes", "[estimator]") {
  std::mt19937_64 rng(137);
  ice::AttributeSchema s({5, 5});
  std::vector<ice::ZKey> keys;
  for (int i = 0; i < 3000; ++i) {
    keys.push_back(s.encode(std::vector<uint64_t>{rng() % 32, rng() % 32}));
  }
  auto idx = ice::ZOrderIndex::bulk_load(s, keys, 16);

  // Whole domain: every sample hits and the estimate is exactly N.
  const auto full = idx.make_box({0, 0}, {31, 31});
  const auto r = ice::estimate_cardinality(full, idx, {}, {.budget = 500, .seed = 1});
  REQUIRE(r.count == 500);
  REQUIRE(r.r_sum == 3000);
  REQUIRE(r.est == 3000.0);
  REQUIRE_FALSE(r.used_exact_scan);

  // A box whose rank space is empty: zero, exactly, without fallback.
  ice::ZOrderIndex sparse(s, 16);
  sparse.insert(s.encode(std::vector<uint64_t>{0, 0}));
  sparse.insert(s.encode(std::vector<uint64_t>{31, 31}));
  const auto hole = sparse.make_box({10, 10}, {12, 12});
  const auto rz = ice::estimate_cardinality(hole, sparse, {}, {.budget = 100, .seed = 1});
  REQUIRE(rz.est == 0.0);
  REQUIRE(rz.count == 0);
  REQUIRE(rz.r_sum == 0);
  REQUIRE_FALSE(rz.used_exact_scan);
}

TEST_CASE("estimate is deterministic for a fixed seed and state", "[estimator]") {
  std::mt19937_64 rng(139);
  ice::AttributeSchema s({6, 6});
  std::vector<ice::ZKey> keys;
  for (int i = 0; i < 20000; ++i) {
    keys.push_back(s.encode(std::vector<uint64_t>{rng() % 64, rng() % 64}));
  }
  auto idx = ice::ZOrderIndex::bulk_load(s, keys, 64);
  const auto box = idx.make_box({5, 9}, {40, 50});
  const ice::EstimatorConfig cfg{.budget = 2000, .seed = 4242};
  const auto a = ice::estimate_cardinality(box, idx, {}, cfg);
  const auto b = ice::estimate_cardinality(box, idx, {}, cfg);
  REQUIRE(a.est == b.est);
  REQUIRE(a.count == b.count);
  REQUIRE(a.r_sum == b.r_sum);
  REQUIRE(a.overflow_p == b.overflow_p);
  REQUIRE(a.used_exact_scan == b.used_exact_scan);
}

TEST_CASE("estimator is unbiased with the variance the rank space predicts", "[estimator]") {
  std::mt19937_64 rng(149);
  ice::AttributeSchema s({6, 6});
  std::vector<ice::ZKey> keys;
  for (int i = 0; i < 20000; ++i) {
    keys.push_back(s.encode(std::vector<uint64_t>{rng() % 64, rng() % 64}));
  }
  auto idx = ice::ZOrderIndex::bulk_load(s, keys, 64);
  const auto box = idx.make_box({8, 8}, {30, 47});
  const uint64_t card = idx.range_count_exact(box).cardinality;
  REQUIRE(card >= 500);

  const uint64_t budget = 2000;
  const int reps = 1000;
  double sum = 0.0, sum_sq = 0.0;
  uint64_t r_sum = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto r = ice::estimate_cardinality(
        box, idx, {}, {.budget = budget, .hybrid = false, .seed = 9000 + static_cast<uint64_t>(rep)});
    sum += r.est;
    sum_sq += r.est * r.est;
    r_sum = r.r_sum;
  }
  const double mean = sum / reps;
  const double var = sum_sq / reps - mean * mean;
  const double var_theory = static_cast<double>(card) *
                            static_cast<double>(r_sum - card) / static_cast<double>(budget);

  // Mean within 3 sigma of the true cardinality.
  const double tol = 3.0 * std::sqrt(var_theory / reps);
  REQUIRE_THAT(mean, WithinAbs(static_cast<double>(card), tol));
  // Empirical variance within 20% of the closed form.
  REQUIRE_THAT(var, WithinRel(var_theory, 0.20));
}

TEST_CASE("hybrid fallback certifies low-hit boxes exactly", "[estimator]") {
  // Rows only on the y=0 and y=15 edges; a y-band between them holds nothing
  // but its corner-to-corner z-interval still crosses stored keys, so every
  // sample misses and the zero-hit rule forces the exact scan.
  ice::AttributeSchema s({4, 4});
  std::vector<ice::ZKey> keys;
  for (uint64_t x = 0; x < 16; ++x) {
    for (int copy = 0; copy < 50; ++copy) {
      keys.push_back(s.encode(std::vector<uint64_t>{x, 0}));
      keys.push_back(s.encode(std::vector<uint64_t>{x, 15}));
    }
  }
  auto idx = ice::ZOrderIndex::bulk_load(s, keys, 8);

  const auto band = idx.make_box({0, 7}, {15, 8});
  const auto r = ice::estimate_cardinality(band, idx, {.max_depth = 0},
                                           {.budget = 64, .seed = 5});
  REQUIRE(r.r_sum > 0);
  REQUIRE(r.count == 0);
  REQUIRE(r.overflow_p == 1.0);
  REQUIRE(r.used_exact_scan);
  REQUIRE(r.est == 0.0);

  // Same box with the hybrid disabled keeps the raw (zero) estimate.
  const auto raw = ice::estimate_cardinality(band, idx, {.max_depth = 0},
                                             {.budget = 64, .hybrid = false, .seed = 5});
  REQUIRE_FALSE(raw.used_exact_scan);
  REQUIRE(raw.est == 0.0);

  // A needle among uniform noise: a small budget yields zero hits for the
  // fixed seed, and the fallback returns the exact tiny cardinality.
  std::mt19937_64 rng(151);
  ice::AttributeSchema s8({8, 8});
  std::vector<ice::ZKey> noise;
  for (int i = 0; i < 50000; ++i) {
    noise.push_back(s8.encode(std::vector<uint64_t>{rng() % 256, rng() % 256}));
  }
  noise.push_back(s8.encode(std::vector<uint64_t>{255, 0}));
  auto big = ice::ZOrderIndex::bulk_load(s8, noise, 64);
  const auto needle = big.make_box({250, 0}, {255, 3});
  const uint64_t truth = big.range_count_exact(needle).cardinality;
  REQUIRE(truth >= 1);
  const auto rn = ice::estimate_cardinality(needle, big, {.max_depth = 2},
                                            {.budget = 20, .seed = 3});
  if (rn.used_exact_scan) {
    REQUIRE(rn.est == static_cast<double>(truth));
  }
}

TEST_CASE("estimator configuration is validated", "[estimator]") {
  const auto idx = tiny_index();
  const auto box = idx.make_box({1, 1}, {2, 2});
  REQUIRE_THROWS_AS(ice::estimate_cardinality(box, idx, {}, {.budget = 0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ice::estimate_cardinality(box, idx, {}, {.q_bound = 1.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ice::estimate_cardinality(box, idx, {}, {.confidence = 1.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ice::estimate_cardinality(box, idx, {}, {.confidence = 0.0}),
                    std::invalid_argument);
}
