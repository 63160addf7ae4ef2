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

#include <cmath>
#include <cstdint>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ice/reservoir.hpp"
#include "ice/synthetic.hpp"
#include "ice/table.hpp"

namespace {

// Ten distinguishable rows: row i is (i, i).
ice::Table ten_rows() {
  std::vector<uint64_t> codes;
  for (uint64_t i = 0; i < 10; ++i) codes.insert(codes.end(), {i, i});
  return ice::Table::from_codes({4, 4}, codes);
}

}  // namespace

TEST_CASE("reservoir budget is one per thousand rows, at least one", "[reservoir]") {
  REQUIRE(ice::Reservoir::budget_for(0) == 1);
  REQUIRE(ice::Reservoir::budget_for(1) == 1);
  REQUIRE(ice::Reservoir::budget_for(999) == 1);
  REQUIRE(ice::Reservoir::budget_for(1000) == 1);
  REQUIRE(ice::Reservoir::budget_for(1001) == 2);
  REQUIRE(ice::Reservoir::budget_for(100000) == 100);
}

TEST_CASE("build draws each row equally often", "[reservoir]") {
  const auto t = ten_rows();
  std::vector<uint64_t> counts(10, 0);
  const int trials = 100000;
  for (int s = 0; s < trials; ++s) {
    const auto r = ice::Reservoir::build(t, static_cast<uint64_t>(s));
    REQUIRE(r.size() == 1);
    ++counts[r.rows()[0][0]];
  }
  double chi2 = 0.0;
  const double expected = trials / 10.0;
  for (const uint64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  // Chi-square, 9 degrees of freedom, alpha = 0.001.
  REQUIRE(chi2 < 27.877);
}

TEST_CASE("insert stream keeps the sample at the rolling budget", "[reservoir]") {
  const auto t = ice::make_correlated_table(1000, {7, 7}, 0.05, 3);
  auto r = ice::Reservoir::build(t, 5);
  REQUIRE(r.size() == 1);
  uint64_t n = 1000;
  for (uint64_t k = 0; k < 5000; ++k) {
    r.insert({k % 128, k % 97});
    ++n;
    REQUIRE(r.source_size() == n);
    REQUIRE(r.size() == ice::Reservoir::budget_for(n));
  }
}

TEST_CASE("deletes shrink only when they hit the sample", "[reservoir]") {
  const auto t = ten_rows();
  auto r = ice::Reservoir::build(t, 7);
  REQUIRE(r.size() == 1);
  const std::vector<uint64_t> sampled = r.rows()[0];
  const uint64_t other = sampled[0] == 0 ? 1 : 0;

  r.erase({other, other});
  REQUIRE(r.source_size() == 9);
  REQUIRE(r.size() == 1);  // the victim was not in the sample

  r.erase(sampled);
  REQUIRE(r.source_size() == 8);
  REQUIRE(r.size() == 0);
  const auto est = r.estimate(std::vector<uint64_t>{0, 0}, std::vector<uint64_t>{15, 15});
  REQUIRE(est.empty_reservoir);
  REQUIRE(est.est == 0.0);
}

TEST_CASE("modify is a delete plus an insert", "[reservoir]") {
  const auto t = ten_rows();
  auto r = ice::Reservoir::build(t, 7);
  ice::WorkloadOp op;
  op.kind = ice::OpKind::kModify;
  op.old_values = {3, 3};
  op.new_values = {9, 9};
  r.apply(op);
  REQUIRE(r.source_size() == 10);

  ice::WorkloadOp q;
  q.kind = ice::OpKind::kQuery;
  r.apply(q);
  REQUIRE(r.source_size() == 10);
}

TEST_CASE("scaled estimates hit the corners exactly", "[reservoir]") {
  const auto t = ice::make_clustered_table(5000, {8, 8}, 3, 0.05, 11);
  const auto r = ice::Reservoir::build(t, 13);
  REQUIRE(r.size() == 5);

  const auto full = r.estimate(std::vector<uint64_t>{0, 0}, std::vector<uint64_t>{255, 255});
  REQUIRE_FALSE(full.empty_reservoir);
  REQUIRE(full.est == 5000.0);
  REQUIRE(r.bytes() == 5 * 2 * sizeof(uint64_t));
}

TEST_CASE("the scaled estimator is unbiased over rebuilds", "[reservoir]") {
  const uint64_t n = 20000;
  const auto t = ice::make_correlated_table(n, {8, 8}, 0.08, 17);

  // A box holding roughly a quarter of the rows.
  const std::vector<uint64_t> low{0, 0}, high{127, 140};
  const auto card = static_cast<double>(
      ice::oracle_cardinality(t, ice::QueryBox(t.schema(), low, high)));
  REQUIRE(card > 2000);

  const int rebuilds = 500;
  double sum = 0.0;
  for (int s = 0; s < rebuilds; ++s) {
    sum += ice::Reservoir::build(t, 1000 + static_cast<uint64_t>(s)).estimate(low, high).est;
  }
  const double mean = sum / rebuilds;

  // Without-replacement sampling variance of the scaled hit count.
  const double k = static_cast<double>(ice::Reservoir::budget_for(n));
  const double p = card / static_cast<double>(n);
  const double fpc = (static_cast<double>(n) - k) / (static_cast<double>(n) - 1);
  const double var = static_cast<double>(n) * static_cast<double>(n) * p * (1 - p) / k * fpc;
  const double three_sigma = 3.0 * std::sqrt(var / rebuilds);
  REQUIRE(std::abs(mean - card) <= three_sigma);
}

TEST_CASE("builds are deterministic in the seed", "[reservoir]") {
  const auto t = ice::make_zipfian_table(3000, {8, 8}, 1.0, 19);
  const auto a = ice::Reservoir::build(t, 42);
  const auto b = ice::Reservoir::build(t, 42);
  const auto c = ice::Reservoir::build(t, 43);
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.rows() != c.rows());
}
