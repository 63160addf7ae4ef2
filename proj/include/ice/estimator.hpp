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

#ifndef ICE_ESTIMATOR_HPP_
#define ICE_ESTIMATOR_HPP_

// Rank-space sampling estimator. Filtered z-intervals are projected into the
// index's rank space, b ranks are drawn uniformly with replacement, and the
// hit fraction scales rSum into the estimate. A binomial overflow test
// decides when the estimate cannot certify the q-error bound, in which case
// the hybrid path switches to the exact scan.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "ice/filter.hpp"
#include "ice/index.hpp"
#include "ice/zorder.hpp"

namespace ice {

struct RankInterval {
  uint64_t begin;  // key2rank_exclusive(low): copies strictly before the interval
  uint64_t end;    // key2rank(up): copies up to and including it
  bool operator==(const RankInterval&) const = default;
};

struct RankIntervalSet {
  std::vector<RankInterval> intervals;  // disjoint, ascending
  uint64_t r_sum = 0;                   // total copies covered
};

struct EstimatorConfig {
  uint64_t budget = 20000;          // sample draws per estimate
  double q_bound = 20.0;            // certified q-error target, > 1
  double confidence = 1.0 - 1e-7;   // per-query certainty of the bound
  bool hybrid = true;               // fall back to the exact scan when unsure
  bool gaussian_approx = true;      // normal pmf approximation for large trials
  uint64_t seed = 0x1ce5eed;
};

struct EstimateResult {
  double est = 0.0;
  uint64_t count = 0;           // hits among the samples
  uint64_t budget = 0;
  uint64_t r_sum = 0;
  double overflow_p = 0.0;      // pmf of `count` under the overflow hypothesis
  bool used_exact_scan = false;
  std::chrono::nanoseconds elapsed{0};
};

// Rank-space image of the filtered intervals; members of [begin, end) are
// the global ranks begin+1 .. end. Empty images are dropped.
inline RankIntervalSet project_to_ranks(std::span<const ZInterval> intervals,
                                        const ZOrderIndex& index) {
  RankIntervalSet out;
  for (const auto& zi : intervals) {
    const uint64_t begin = index.key2rank_exclusive(zi.low);
    const uint64_t end = index.key2rank(zi.up);
    if (end > begin) {
      out.intervals.push_back({begin, end});
      out.r_sum += end - begin;
    }
  }
  return out;
}

// b uniform draws (with replacement) over the concatenated rank space,
// mapped to 1-indexed global ranks.
inline std::vector<uint64_t> sample_from_ranks(const RankIntervalSet& ranks, uint64_t b,
                                               std::mt19937_64& rng) {
  if (ranks.r_sum == 0) throw std::logic_error("sampling from an empty rank space");
  std::vector<uint64_t> prefix;
  prefix.reserve(ranks.intervals.size());
  uint64_t acc = 0;
  for (const auto& ri : ranks.intervals) {
    acc += ri.end - ri.begin;
    prefix.push_back(acc);
  }
  std::uniform_int_distribution<uint64_t> pick(0, ranks.r_sum - 1);
  std::vector<uint64_t> out;
  out.reserve(b);
  for (uint64_t i = 0; i < b; ++i) {
    const uint64_t u = pick(rng);
    const std::size_t j = static_cast<std::size_t>(
        std::upper_bound(prefix.begin(), prefix.end(), u) - prefix.begin());
    const uint64_t before = j == 0 ? 0 : prefix[j - 1];
    out.push_back(ranks.intervals[j].begin + (u - before) + 1);
  }
  return out;
}

// Binomial pmf of observing `count` hits when ceil(est * q_bound) copies
// are each sampled with probability b/rSum; log-space throughout. A large
// value means the data could plausibly hold q_bound times the estimate.
inline double overflow_probability(double est, double q_bound, uint64_t count, uint64_t b,
                                   uint64_t r_sum) {
  if (count > b) throw std::invalid_argument("count exceeds budget");
  if (count == 0) return 1.0;  // zero hits certify nothing
  const double trials_f = std::ceil(est * q_bound);
  if (trials_f < static_cast<double>(count)) return 0.0;
  const auto trials = static_cast<uint64_t>(trials_f);
  const double p = std::min(1.0, static_cast<double>(b) / static_cast<double>(r_sum));
  if (p >= 1.0) return trials == count ? 1.0 : 0.0;
  const double m = static_cast<double>(trials);
  const double k = static_cast<double>(count);
  const double log_choose =
      std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
  const double log_p = log_choose + (m - k) * std::log1p(-p) + k * std::log(p);
  return std::min(1.0, std::exp(log_p));
}

// Normal-density stand-in for the pmf above, used when the trial count is
// large enough for the approximation the estimator is configured with.
inline double overflow_probability_gaussian(double est, double q_bound, uint64_t count,
                                            uint64_t b, uint64_t r_sum) {
  if (count > b) throw std::invalid_argument("count exceeds budget");
  if (count == 0) return 1.0;
  const double trials = std::ceil(est * q_bound);
  const double p = std::min(1.0, static_cast<double>(b) / static_cast<double>(r_sum));
  const double mu = trials * p;
  const double var = trials * p * (1.0 - p);
  if (var <= 0.0) return static_cast<double>(count) == mu ? 1.0 : 0.0;
  const double d = static_cast<double>(count) - mu;
  const double dens = std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  return std::min(1.0, dens);
}

namespace detail {

inline void validate(const EstimatorConfig& cfg) {
  if (cfg.budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (!(cfg.q_bound > 1.0)) throw std::invalid_argument("q_bound must exceed 1");
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0,1)");
  }
}

}  // namespace detail

inline EstimateResult estimate_cardinality(const QueryBox& box, const ZOrderIndex& index,
                                           const FilterConfig& filter_cfg,
                                           const EstimatorConfig& cfg) {
  detail::validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  EstimateResult res;
  res.budget = cfg.budget;

  const auto intervals = recursive_filter(box, filter_cfg);
  const auto ranks = project_to_ranks(intervals, index);
  res.r_sum = ranks.r_sum;
  if (ranks.r_sum == 0) {
    // No stored copy can satisfy the box: zero is exact, no fallback needed.
    res.elapsed = std::chrono::steady_clock::now() - t0;
    return res;
  }

  std::mt19937_64 rng(cfg.seed);
  const auto samples = sample_from_ranks(ranks, cfg.budget, rng);
  uint64_t hits = 0;
  for (const uint64_t r : samples) {
    if (box.contains(index.rank2key(r))) ++hits;
  }
  res.count = hits;
  res.est = (static_cast<double>(hits) / static_cast<double>(cfg.budget)) *
            static_cast<double>(ranks.r_sum);

  const bool big_trials = std::ceil(res.est * cfg.q_bound) > 20.0;
  res.overflow_p = (cfg.gaussian_approx && big_trials && hits > 0)
                       ? overflow_probability_gaussian(res.est, cfg.q_bound, hits,
                                                       cfg.budget, ranks.r_sum)
                       : overflow_probability(res.est, cfg.q_bound, hits, cfg.budget,
                                              ranks.r_sum);
  if (cfg.hybrid && res.overflow_p > 1.0 - cfg.confidence) {
    res.est = static_cast<double>(index.range_count_exact(box).cardinality);
    res.used_exact_scan = true;
  }
  res.elapsed = std::chrono::steady_clock::now() - t0;
  return res;
}

}  // namespace ice

#endif  // ICE_ESTIMATOR_HPP_
