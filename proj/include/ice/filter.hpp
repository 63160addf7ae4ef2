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

#ifndef ICE_FILTER_HPP_
#define ICE_FILTER_HPP_

// Recursive key-space filtering: split a box's z-interval at a separation
// point, skip the dead stretch around out-of-box points with BIGMIN/LITMAX,
// and stop at a depth cap. The result is at most 2^max_depth disjoint
// intervals that still cover every stored tuple inside the box.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ice/index.hpp"
#include "ice/zorder.hpp"

namespace ice {

struct ZInterval {
  ZKey low;  // inclusive
  ZKey up;   // inclusive
  bool operator==(const ZInterval&) const = default;
};

enum class SplitStrategy { kMidpoint, kOptimal1Split };

struct FilterConfig {
  uint32_t max_depth = 6;
  SplitStrategy strategy = SplitStrategy::kMidpoint;
};

// Pivot for splitting `q`. kMidpoint is the plain key-space midpoint; the
// one-split variant re-centers one attribute of the midpoint onto its box
// range and keeps the candidate whose surrounding dead gap (BIGMIN minus
// LITMAX) is longest, ties to the smaller key. Candidates are clamped into
// [q.low, q.up - 1] so both split children stay non-empty.
inline ZKey find_separation_point(const ZInterval& q, const QueryBox& box,
                                  SplitStrategy strategy) {
  if (!(q.low < q.up)) throw std::invalid_argument("degenerate interval");
  const ZKey mid = q.low + (q.up - q.low) / 2;
  if (strategy == SplitStrategy::kMidpoint) return mid;

  const AttributeSchema& schema = box.schema();
  auto vals = schema.decode(mid);
  ZKey best = mid;
  ZKey best_gap = 0;
  bool first = true;
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    const uint64_t keep = vals[a];
    vals[a] = box.low(a) + (box.high(a) - box.low(a)) / 2;
    ZKey p = schema.encode(vals);
    vals[a] = keep;
    if (p < q.low) p = q.low;
    if (p > q.up - 1) p = q.up - 1;
    const auto hi = get_bigmin(p, box);
    const auto lo = get_litmax(p, box);
    const ZKey gap = hi.value_or(p) - lo.value_or(p);
    if (first || gap > best_gap || (gap == best_gap && p < best)) {
      best = p;
      best_gap = gap;
      first = false;
    }
  }
  return best;
}

namespace detail {

inline void filter_rec(ZKey low, ZKey up, uint32_t depth, const QueryBox& box,
                       const FilterConfig& cfg, std::vector<ZInterval>& out) {
  // Upper endpoints are always box members, so a singleton (low == up) is a
  // box member and is emitted rather than recursed.
  if (low == up || depth >= cfg.max_depth) {
    out.push_back({low, up});
    return;
  }
  const ZKey p = find_separation_point({low, up}, box, cfg.strategy);
  if (box.contains(p)) {
    filter_rec(low, p, depth + 1, box, cfg, out);
    filter_rec(p + 1, up, depth + 1, box, cfg, out);
    return;
  }
  const auto lit = get_litmax(p, box);
  const auto big = get_bigmin(p, box);
  if (lit && *lit >= low) filter_rec(low, *lit, depth + 1, box, cfg, out);
  if (big && *big <= up) filter_rec(*big, up, depth + 1, box, cfg, out);
}

}  // namespace detail

// Ordered, pairwise-disjoint intervals covering every box tuple between the
// box corners. max_depth = 0 degenerates to the whole corner-to-corner span.
inline std::vector<ZInterval> recursive_filter(const QueryBox& box, const FilterConfig& cfg) {
  std::vector<ZInterval> out;
  detail::filter_rec(box.z_low(), box.z_up(), 0, box, cfg, out);
  return out;
}

// card(box) / rSum over the intervals' stored-copy counts. Empty boxes have
// no defined efficiency.
inline std::optional<double> filter_efficiency(const QueryBox& box,
                                               std::span<const ZInterval> intervals,
                                               const ZOrderIndex& index) {
  uint64_t r_sum = 0;
  for (const auto& zi : intervals) {
    r_sum += index.key2rank(zi.up) - index.key2rank_exclusive(zi.low);
  }
  const uint64_t card = index.range_count_exact(box).cardinality;
  if (card == 0) return std::nullopt;
  if (r_sum == 0) {
    throw std::logic_error("coverage violated: positive cardinality, empty rank space");
  }
  return static_cast<double>(card) / static_cast<double>(r_sum);
}

}  // namespace ice

#endif  // ICE_FILTER_HPP_
