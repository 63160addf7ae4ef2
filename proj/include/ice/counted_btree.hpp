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

#ifndef ICE_COUNTED_BTREE_HPP_
#define ICE_COUNTED_BTREE_HPP_

// Order-statistic B+-tree over a multiset of keys. Every node carries the
// total multiplicity of its subtree, which makes rank-of-key and key-of-rank
// both O(log N); duplicates collapse into one leaf entry with a counter.
//
// Structure invariants, checked by the test suite:
//   - inner keys[j] is the smallest key stored under children[j]
//   - node occupancy stays within [ceil(fanout/2), fanout] except the root
//   - c_num equals the sum of the node's counters at every node
//   - leaf entries, chained left to right, are strictly increasing

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ice/binio.hpp"

namespace ice {

template <typename Key>
class CountedBTree {
  struct Node {
    bool leaf;
    uint64_t c_num = 0;                          // total multiplicity below
    std::vector<Key> keys;                       // inner: child minimum keys
    std::vector<uint64_t> counts;                // leaf: freq; inner: child c_num
    std::vector<std::unique_ptr<Node>> children; // inner only
    Node* next = nullptr;                        // leaf chain
    explicit Node(bool is_leaf) : leaf(is_leaf) {}
    std::size_t entry_count() const { return leaf ? keys.size() : children.size(); }
  };

 public:
  explicit CountedBTree(uint32_t fanout) : fanout_(fanout) {
    if (fanout < 4) throw std::invalid_argument("fanout must be at least 4");
    root_ = std::make_unique<Node>(true);
  }

  CountedBTree(CountedBTree&&) noexcept = default;
  CountedBTree& operator=(CountedBTree&&) noexcept = default;

  uint32_t fanout() const { return fanout_; }
  uint32_t min_entries() const { return (fanout_ + 1) / 2; }
  uint64_t total_count() const { return root_->c_num; }

  uint64_t distinct_count() const {
    uint64_t n = 0;
    for (const Node* l = leftmost(); l != nullptr; l = l->next) n += l->keys.size();
    return n;
  }

  std::size_t depth() const {
    std::size_t d = 1;
    for (const Node* n = root_.get(); !n->leaf; n = n->children.front().get()) ++d;
    return d;
  }

  // ---- updates ----------------------------------------------------------

  void insert(const Key& key) {
    auto right = insert_rec(root_.get(), key);
    if (right) {
      auto top = std::make_unique<Node>(false);
      top->keys = {root_->keys.front(), right->keys.front()};
      top->counts = {root_->c_num, right->c_num};
      top->c_num = root_->c_num + right->c_num;
      top->children.push_back(std::move(root_));
      top->children.push_back(std::move(right));
      root_ = std::move(top);
    }
  }

  // Removes one copy of `key`. The structure is untouched when the key is
  // absent; the error carries no partial state change.
  void erase_one(const Key& key) {
    if (!erase_rec(root_.get(), key)) {
      throw std::out_of_range("key not present");
    }
    while (!root_->leaf && root_->children.size() == 1) {
      root_ = std::move(root_->children.front());
    }
  }

  // Moves one copy from old_key to new_key; total count is unchanged. When
  // old_key is absent nothing is inserted.
  void modify(const Key& old_key, const Key& new_key) {
    if (freq(old_key) == 0) throw std::out_of_range("key not present");
    if (old_key == new_key) return;
    erase_one(old_key);
    insert(new_key);
  }

  // ---- rank space -------------------------------------------------------

  // Number of stored copies with key <= `key`.
  uint64_t key2rank(const Key& key) const { return prefix_count(key, /*inclusive=*/true); }

  // Number of stored copies with key < `key`.
  uint64_t key2rank_exclusive(const Key& key) const {
    return prefix_count(key, /*inclusive=*/false);
  }

  // Key of the rank-th copy, ranks 1..total_count().
  Key rank2key(uint64_t rank) const {
    if (rank == 0 || rank > root_->c_num) {
      throw std::out_of_range("rank outside [1, N]");
    }
    const Node* n = root_.get();
    for (;;) {
      std::size_t j = 0;
      while (rank > n->counts[j]) {
        rank -= n->counts[j];
        ++j;
      }
      if (n->leaf) return n->keys[j];
      n = n->children[j].get();
    }
  }

  uint64_t freq(const Key& key) const {
    const Node* n = root_.get();
    while (!n->leaf) n = n->children[route(n, key)].get();
    const auto it = std::lower_bound(n->keys.begin(), n->keys.end(), key);
    if (it == n->keys.end() || *it != key) return 0;
    return n->counts[static_cast<std::size_t>(it - n->keys.begin())];
  }

  // ---- scans ------------------------------------------------------------

  class Cursor {
   public:
    bool valid() const { return node_ != nullptr; }
    const Key& key() const { return node_->keys[idx_]; }
    uint64_t freq() const { return node_->counts[idx_]; }
    void advance() {
      if (++idx_ >= node_->keys.size()) {
        node_ = node_->next;
        idx_ = 0;
      }
    }

   private:
    friend class CountedBTree;
    const Node* node_ = nullptr;
    std::size_t idx_ = 0;
  };

  // Cursor at the first entry with key >= `key` (invalid when none).
  Cursor lower_bound(const Key& key) const {
    const Node* n = root_.get();
    while (!n->leaf) n = n->children[route(n, key)].get();
    Cursor c;
    const auto it = std::lower_bound(n->keys.begin(), n->keys.end(), key);
    if (it == n->keys.end()) {
      c.node_ = n->next;
      c.idx_ = 0;
    } else {
      c.node_ = n;
      c.idx_ = static_cast<std::size_t>(it - n->keys.begin());
    }
    if (c.node_ != nullptr && c.node_->keys.empty()) c.node_ = nullptr;  // empty root leaf
    return c;
  }

  template <class F>
  void for_each_entry(F&& f) const {
    for (const Node* l = leftmost(); l != nullptr; l = l->next) {
      for (std::size_t i = 0; i < l->keys.size(); ++i) f(l->keys[i], l->counts[i]);
    }
  }

  // Structure walk for audits: f(id, is_leaf, depth, c_num, entries, counter_sum).
  template <class F>
  void visit_nodes(F&& f) const {
    visit_rec(root_.get(), 1, f);
  }

  // ---- bulk construction -------------------------------------------------

  // Sorts, collapses duplicates, then packs full nodes left to right; an
  // undersized final node borrows entries from its left neighbor.
  static CountedBTree bulk_load(std::vector<Key> keys, uint32_t fanout) {
    std::sort(keys.begin(), keys.end());
    std::vector<std::pair<Key, uint64_t>> entries;
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      while (j < keys.size() && keys[j] == keys[i]) ++j;
      entries.emplace_back(keys[i], j - i);
      i = j;
    }
    return from_entries(std::move(entries), fanout);
  }

  // Same, from pre-aggregated (key, multiplicity) pairs, strictly ascending.
  static CountedBTree bulk_load_counted(std::vector<std::pair<Key, uint64_t>> entries,
                                        uint32_t fanout) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].second == 0) throw std::invalid_argument("zero multiplicity");
      if (i > 0 && !(entries[i - 1].first < entries[i].first)) {
        throw std::invalid_argument("entries must be strictly ascending");
      }
    }
    return from_entries(std::move(entries), fanout);
  }

  // ---- serialization ----------------------------------------------------

  // Level-order structural dump; children are reattached on load by
  // consuming the next level in order, so the exact shape round-trips.
  template <class KeyWriter>
  void save(std::ostream& os, KeyWriter&& wk) const {
    std::vector<std::vector<const Node*>> levels{{root_.get()}};
    while (!levels.back().front()->leaf) {
      std::vector<const Node*> next;
      for (const Node* n : levels.back()) {
        for (const auto& c : n->children) next.push_back(c.get());
      }
      levels.push_back(std::move(next));
    }
    io::write_u32(os, fanout_);
    io::write_u32(os, static_cast<uint32_t>(levels.size()));
    for (const auto& level : levels) {
      io::write_u64(os, level.size());
      for (const Node* n : level) {
        io::write_u32(os, static_cast<uint32_t>(n->keys.size()));
        for (std::size_t i = 0; i < n->keys.size(); ++i) {
          wk(os, n->keys[i]);
          io::write_u64(os, n->counts[i]);
        }
      }
    }
  }

  template <class KeyReader>
  static CountedBTree load(std::istream& is, KeyReader&& rk) {
    const uint32_t fanout = io::read_u32(is);
    CountedBTree tree(fanout);
    const uint32_t level_count = io::read_u32(is);
    if (level_count == 0) throw std::runtime_error("index snapshot corrupt: no levels");
    std::vector<std::vector<std::unique_ptr<Node>>> levels(level_count);
    for (uint32_t d = 0; d < level_count; ++d) {
      const bool leaf = (d + 1 == level_count);
      const uint64_t node_count = io::read_u64(is);
      levels[d].reserve(node_count);
      for (uint64_t k = 0; k < node_count; ++k) {
        auto n = std::make_unique<Node>(leaf);
        const uint32_t entries = io::read_u32(is);
        n->keys.reserve(entries);
        n->counts.reserve(entries);
        for (uint32_t e = 0; e < entries; ++e) {
          n->keys.push_back(rk(is));
          n->counts.push_back(io::read_u64(is));
        }
        levels[d].push_back(std::move(n));
      }
    }
    // Reattach children and rebuild subtree totals bottom-up.
    for (auto& leaf_node : levels.back()) {
      leaf_node->c_num = 0;
      for (uint64_t c : leaf_node->counts) leaf_node->c_num += c;
    }
    for (uint32_t d = level_count - 1; d-- > 0;) {
      std::size_t take = 0;
      for (auto& n : levels[d]) {
        n->c_num = 0;
        for (std::size_t i = 0; i < n->keys.size(); ++i) {
          if (take >= levels[d + 1].size()) {
            throw std::runtime_error("index snapshot corrupt: child underrun");
          }
          auto child = std::move(levels[d + 1][take++]);
          if (n->counts[i] != child->c_num || (!child->keys.empty() && !(n->keys[i] == child->keys.front()))) {
            throw std::runtime_error("index snapshot corrupt: counter mismatch");
          }
          n->c_num += n->counts[i];
          n->children.push_back(std::move(child));
        }
      }
      if (take != levels[d + 1].size()) {
        throw std::runtime_error("index snapshot corrupt: dangling children");
      }
    }
    if (levels[0].size() != 1) throw std::runtime_error("index snapshot corrupt: bad root");
    // Rebuild the leaf chain.
    tree.root_ = std::move(levels[0][0]);
    Node* prev = nullptr;
    chain_leaves(tree.root_.get(), prev);
    return tree;
  }

 private:
  const Node* leftmost() const {
    const Node* n = root_.get();
    while (!n->leaf) n = n->children.front().get();
    return n->keys.empty() ? nullptr : n;
  }

  static void chain_leaves(Node* n, Node*& prev) {
    if (n->leaf) {
      if (prev != nullptr) prev->next = n;
      prev = n;
      return;
    }
    for (auto& c : n->children) chain_leaves(c.get(), prev);
  }

  // Child index for `key`: the last child whose minimum is <= key, clamped
  // to the first child (whose minimum acts as an open lower bound).
  static std::size_t route(const Node* n, const Key& key) {
    const auto it = std::upper_bound(n->keys.begin(), n->keys.end(), key);
    const std::size_t j = static_cast<std::size_t>(it - n->keys.begin());
    return j == 0 ? 0 : j - 1;
  }

  uint64_t prefix_count(const Key& key, bool inclusive) const {
    const Node* n = root_.get();
    uint64_t r = 0;
    while (!n->leaf) {
      const std::size_t j = route(n, key);
      for (std::size_t i = 0; i < j; ++i) r += n->counts[i];
      n = n->children[j].get();
    }
    const auto it = inclusive ? std::upper_bound(n->keys.begin(), n->keys.end(), key)
                              : std::lower_bound(n->keys.begin(), n->keys.end(), key);
    const std::size_t j = static_cast<std::size_t>(it - n->keys.begin());
    for (std::size_t i = 0; i < j; ++i) r += n->counts[i];
    return r;
  }

  template <class F>
  static void visit_rec(const Node* n, std::size_t depth, F& f) {
    uint64_t sum = 0;
    for (uint64_t c : n->counts) sum += c;
    f(static_cast<const void*>(n), n->leaf, depth, n->c_num, n->entry_count(), sum);
    if (!n->leaf) {
      for (const auto& c : n->children) visit_rec(c.get(), depth + 1, f);
    }
  }

  std::unique_ptr<Node> split(Node* n) {
    auto right = std::make_unique<Node>(n->leaf);
    const std::size_t total = n->entry_count();
    const std::size_t right_cnt = (fanout_ + 1) / 2;
    const std::size_t at = total - right_cnt;
    right->keys.assign(std::make_move_iterator(n->keys.begin() + at),
                       std::make_move_iterator(n->keys.end()));
    right->counts.assign(n->counts.begin() + at, n->counts.end());
    n->keys.resize(at);
    n->counts.resize(at);
    if (n->leaf) {
      right->next = n->next;
      n->next = right.get();
    } else {
      right->children.assign(std::make_move_iterator(n->children.begin() + at),
                             std::make_move_iterator(n->children.end()));
      n->children.resize(at);
    }
    uint64_t moved = 0;
    for (uint64_t c : right->counts) moved += c;
    right->c_num = moved;
    n->c_num -= moved;
    return right;
  }

  std::unique_ptr<Node> insert_rec(Node* n, const Key& key) {
    if (n->leaf) {
      const auto it = std::lower_bound(n->keys.begin(), n->keys.end(), key);
      const std::size_t i = static_cast<std::size_t>(it - n->keys.begin());
      ++n->c_num;
      if (it != n->keys.end() && *it == key) {
        ++n->counts[i];
        return nullptr;
      }
      n->keys.insert(it, key);
      n->counts.insert(n->counts.begin() + i, 1);
      return n->keys.size() <= fanout_ ? nullptr : split(n);
    }
    const std::size_t j = route(n, key);
    auto right = insert_rec(n->children[j].get(), key);
    ++n->c_num;
    n->keys[j] = n->children[j]->keys.front();
    n->counts[j] = n->children[j]->c_num;
    if (right) {
      n->keys.insert(n->keys.begin() + j + 1, right->keys.front());
      n->counts.insert(n->counts.begin() + j + 1, right->c_num);
      n->children.insert(n->children.begin() + j + 1, std::move(right));
    }
    return n->children.size() <= fanout_ ? nullptr : split(n);
  }

  bool erase_rec(Node* n, const Key& key) {
    if (n->leaf) {
      const auto it = std::lower_bound(n->keys.begin(), n->keys.end(), key);
      if (it == n->keys.end() || *it != key) return false;
      const std::size_t i = static_cast<std::size_t>(it - n->keys.begin());
      if (--n->counts[i] == 0) {
        n->keys.erase(it);
        n->counts.erase(n->counts.begin() + i);
      }
      --n->c_num;
      return true;
    }
    const std::size_t j = route(n, key);
    if (!erase_rec(n->children[j].get(), key)) return false;
    --n->c_num;
    n->counts[j] = n->children[j]->c_num;
    if (!n->children[j]->keys.empty()) n->keys[j] = n->children[j]->keys.front();
    if (n->children[j]->entry_count() < min_entries()) rebalance(n, j);
    return true;
  }

  void rebalance(Node* parent, std::size_t i) {
    Node* node = parent->children[i].get();
    if (i > 0 && parent->children[i - 1]->entry_count() > min_entries()) {
      Node* left = parent->children[i - 1].get();
      const uint64_t moved = left->counts.back();
      node->keys.insert(node->keys.begin(), std::move(left->keys.back()));
      node->counts.insert(node->counts.begin(), left->counts.back());
      if (!node->leaf) {
        node->children.insert(node->children.begin(), std::move(left->children.back()));
        left->children.pop_back();
      }
      left->keys.pop_back();
      left->counts.pop_back();
      left->c_num -= moved;
      node->c_num += moved;
      parent->keys[i] = node->keys.front();
      parent->counts[i - 1] = left->c_num;
      parent->counts[i] = node->c_num;
      return;
    }
    if (i + 1 < parent->children.size() &&
        parent->children[i + 1]->entry_count() > min_entries()) {
      Node* right = parent->children[i + 1].get();
      const uint64_t moved = right->counts.front();
      node->keys.push_back(std::move(right->keys.front()));
      node->counts.push_back(right->counts.front());
      if (!node->leaf) {
        node->children.push_back(std::move(right->children.front()));
        right->children.erase(right->children.begin());
      }
      right->keys.erase(right->keys.begin());
      right->counts.erase(right->counts.begin());
      right->c_num -= moved;
      node->c_num += moved;
      parent->keys[i + 1] = right->keys.front();
      parent->counts[i] = node->c_num;
      parent->counts[i + 1] = right->c_num;
      return;
    }
    // Merge with a neighbor: fold children[l+1] into children[l].
    const std::size_t l = i > 0 ? i - 1 : i;
    Node* left = parent->children[l].get();
    Node* right = parent->children[l + 1].get();
    left->keys.insert(left->keys.end(), std::make_move_iterator(right->keys.begin()),
                      std::make_move_iterator(right->keys.end()));
    left->counts.insert(left->counts.end(), right->counts.begin(), right->counts.end());
    if (left->leaf) {
      left->next = right->next;
    } else {
      left->children.insert(left->children.end(),
                            std::make_move_iterator(right->children.begin()),
                            std::make_move_iterator(right->children.end()));
    }
    left->c_num += right->c_num;
    parent->keys.erase(parent->keys.begin() + static_cast<std::ptrdiff_t>(l) + 1);
    parent->counts.erase(parent->counts.begin() + static_cast<std::ptrdiff_t>(l) + 1);
    parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(l) + 1);
    parent->counts[l] = left->c_num;
  }

  static CountedBTree from_entries(std::vector<std::pair<Key, uint64_t>> entries,
                                   uint32_t fanout) {
    CountedBTree tree(fanout);
    if (entries.empty()) return tree;
    const std::size_t min = tree.min_entries();

    // Pack one level into nodes of exactly `fanout` entries; the undersized
    // tail borrows from its left neighbor so occupancy holds everywhere.
    const auto boundaries = [&](std::size_t n) {
      std::vector<std::size_t> cuts{0};
      while (n - cuts.back() > fanout) cuts.push_back(cuts.back() + fanout);
      cuts.push_back(n);
      const std::size_t last = cuts[cuts.size() - 1] - cuts[cuts.size() - 2];
      if (cuts.size() > 2 && last < min) {
        cuts[cuts.size() - 2] -= min - last;
      }
      return cuts;
    };

    std::vector<std::unique_ptr<Node>> level;
    {
      const auto cuts = boundaries(entries.size());
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        auto n = std::make_unique<Node>(true);
        for (std::size_t e = cuts[k]; e < cuts[k + 1]; ++e) {
          n->keys.push_back(std::move(entries[e].first));
          n->counts.push_back(entries[e].second);
          n->c_num += entries[e].second;
        }
        if (!level.empty()) level.back()->next = n.get();
        level.push_back(std::move(n));
      }
    }
    while (level.size() > 1) {
      std::vector<std::unique_ptr<Node>> up;
      const auto cuts = boundaries(level.size());
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        auto n = std::make_unique<Node>(false);
        for (std::size_t e = cuts[k]; e < cuts[k + 1]; ++e) {
          n->keys.push_back(level[e]->keys.front());
          n->counts.push_back(level[e]->c_num);
          n->c_num += level[e]->c_num;
          n->children.push_back(std::move(level[e]));
        }
        up.push_back(std::move(n));
      }
      level = std::move(up);
    }
    tree.root_ = std::move(level.front());
    return tree;
  }

  uint32_t fanout_;
  std::unique_ptr<Node> root_;
};

}  // namespace ice

#endif  // ICE_COUNTED_BTREE_HPP_
