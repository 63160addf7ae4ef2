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

#ifndef ICE_INDEX_HPP_
#define ICE_INDEX_HPP_

// Counted B+-tree over interleaved keys: the updateable backbone of the
// estimator. Adds the box-aware exact scan (with BIGMIN jumps past dead
// curve sections) and a versioned binary snapshot.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "ice/binio.hpp"
#include "ice/counted_btree.hpp"
#include "ice/zorder.hpp"

namespace ice {

struct RangeCountResult {
  uint64_t cardinality = 0;
  uint64_t tuples_scanned = 0;  // distinct keys the scan actually touched
};

class ZOrderIndex {
 public:
  ZOrderIndex(AttributeSchema schema, uint32_t fanout)
      : schema_(std::move(schema)), tree_(fanout) {}

  static ZOrderIndex bulk_load(AttributeSchema schema, std::vector<ZKey> keys,
                               uint32_t fanout) {
    ZOrderIndex idx(std::move(schema), fanout);
    idx.tree_ = CountedBTree<ZKey>::bulk_load(std::move(keys), fanout);
    return idx;
  }

  const AttributeSchema& schema() const { return schema_; }
  const CountedBTree<ZKey>& tree() const { return tree_; }
  uint32_t fanout() const { return tree_.fanout(); }
  uint64_t total_count() const { return tree_.total_count(); }
  uint64_t distinct_count() const { return tree_.distinct_count(); }
  std::size_t depth() const { return tree_.depth(); }

  QueryBox make_box(std::vector<uint64_t> low, std::vector<uint64_t> high) const {
    return QueryBox(schema_, std::move(low), std::move(high));
  }

  void insert(ZKey key) { tree_.insert(key); }
  void insert_row(std::span<const uint64_t> values) { tree_.insert(schema_.encode(values)); }
  void erase_one(ZKey key) { tree_.erase_one(key); }
  void erase_row(std::span<const uint64_t> values) { tree_.erase_one(schema_.encode(values)); }
  void modify(ZKey old_key, ZKey new_key) { tree_.modify(old_key, new_key); }

  uint64_t freq(ZKey key) const { return tree_.freq(key); }
  uint64_t key2rank(ZKey key) const { return tree_.key2rank(key); }
  uint64_t key2rank_exclusive(ZKey key) const { return tree_.key2rank_exclusive(key); }
  ZKey rank2key(uint64_t rank) const { return tree_.rank2key(rank); }

  // Exact cardinality of `box`. Walks the leaf chain from z_low and jumps
  // with BIGMIN whenever the scan leaves the box, so only curve sections
  // that can intersect the box are touched.
  RangeCountResult range_count_exact(const QueryBox& box) const {
    RangeCountResult res;
    auto cur = tree_.lower_bound(box.z_low());
    while (cur.valid() && cur.key() <= box.z_up()) {
      ++res.tuples_scanned;
      if (box.contains(cur.key())) {
        res.cardinality += cur.freq();
        cur.advance();
        continue;
      }
      const auto next = get_bigmin(cur.key(), box);
      if (!next || *next > box.z_up()) break;
      cur = tree_.lower_bound(*next);
    }
    return res;
  }

  void save(std::ostream& os) const {
    io::write_magic(os, kMagic);
    io::write_u32(os, static_cast<uint32_t>(schema_.attribute_count()));
    for (std::size_t a = 0; a < schema_.attribute_count(); ++a) {
      io::write_u8(os, static_cast<uint8_t>(schema_.bits(a)));
    }
    io::write_u64(os, tree_.total_count());
    io::write_u64(os, tree_.distinct_count());
    tree_.save(os, [](std::ostream& s, ZKey k) { io::write_u128(s, k); });
  }

  static ZOrderIndex load(std::istream& is) {
    io::expect_magic(is, kMagic, "index snapshot");
    const uint32_t m = io::read_u32(is);
    std::vector<uint8_t> beta(m);
    for (auto& b : beta) b = io::read_u8(is);
    const uint64_t total = io::read_u64(is);
    const uint64_t distinct = io::read_u64(is);
    ZOrderIndex idx{AttributeSchema(std::move(beta)), 4};
    idx.tree_ = CountedBTree<ZKey>::load(is, [](std::istream& s) { return io::read_u128(s); });
    if (idx.tree_.total_count() != total || idx.tree_.distinct_count() != distinct) {
      throw std::runtime_error("index snapshot corrupt: totals do not match");
    }
    return idx;
  }

  uint64_t snapshot_bytes() const {
    std::ostringstream os;
    save(os);
    return static_cast<uint64_t>(os.str().size());
  }

 private:
  static constexpr char kMagic[9] = "ICEIDX1\n";

  AttributeSchema schema_;
  CountedBTree<ZKey> tree_;
};

}  // namespace ice

#endif  // ICE_INDEX_HPP_
