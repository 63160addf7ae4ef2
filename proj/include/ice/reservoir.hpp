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

#ifndef ICE_RESERVOIR_HPP_
#define ICE_RESERVOIR_HPP_

// Uniform-sample baseline: a reservoir of 1/1000 of the rows (at least
// one), scaled up at estimate time. Maintained under inserts with the
// classic accept-then-replace rule; deletes shrink the reservoir without
// refill, since refilling would need table access the baseline does not
// keep.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "ice/table.hpp"
#include "ice/workload.hpp"

namespace ice {

struct ReservoirEstimate {
  double est = 0.0;
  bool empty_reservoir = false;  // nothing sampled; the zero is a guess
};

class Reservoir {
 public:
  static uint64_t budget_for(uint64_t source_size) {
    return std::max<uint64_t>(1, (source_size + 999) / 1000);
  }

  // Uniform sample without replacement of budget_for(N) rows.
  static Reservoir build(const Table& table, uint64_t seed) {
    Reservoir r;
    r.n_ = table.row_count();
    r.rng_.seed(seed);
    const uint64_t take = std::min<uint64_t>(budget_for(r.n_), r.n_);
    std::vector<uint64_t> idx(table.row_count());
    std::iota(idx.begin(), idx.end(), uint64_t{0});
    std::vector<uint64_t> picked;
    std::sample(idx.begin(), idx.end(), std::back_inserter(picked), take, r.rng_);
    r.rows_.reserve(picked.size());
    for (const uint64_t i : picked) {
      const auto row = table.row(i);
      r.rows_.emplace_back(row.begin(), row.end());
    }
    return r;
  }

  uint64_t source_size() const { return n_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::vector<uint64_t>>& rows() const { return rows_; }
  uint64_t bytes() const {
    uint64_t b = 0;
    for (const auto& r : rows_) b += r.size() * sizeof(uint64_t);
    return b;
  }

  void insert(const std::vector<uint64_t>& row) {
    ++n_;
    const uint64_t budget = budget_for(n_);
    if (rows_.size() < budget) {
      rows_.push_back(row);
      return;
    }
    std::uniform_int_distribution<uint64_t> accept(1, n_);
    if (accept(rng_) <= budget) {
      std::uniform_int_distribution<std::size_t> victim(0, rows_.size() - 1);
      rows_[victim(rng_)] = row;
    }
  }

  void erase(const std::vector<uint64_t>& row) {
    if (n_ > 0) --n_;
    const auto it = std::find(rows_.begin(), rows_.end(), row);
    if (it != rows_.end()) {
      *it = std::move(rows_.back());
      rows_.pop_back();
    }
  }

  void apply(const WorkloadOp& op) {
    switch (op.kind) {
      case OpKind::kInsert:
        insert(op.values);
        break;
      case OpKind::kDelete:
        erase(op.values);
        break;
      case OpKind::kModify:
        erase(op.old_values);
        insert(op.new_values);
        break;
      case OpKind::kQuery:
        break;
    }
  }

  ReservoirEstimate estimate(std::span<const uint64_t> low,
                             std::span<const uint64_t> high) const {
    if (rows_.empty()) return {0.0, true};
    uint64_t hits = 0;
    for (const auto& row : rows_) {
      bool in = true;
      for (std::size_t a = 0; a < row.size(); ++a) {
        if (row[a] < low[a] || row[a] > high[a]) {
          in = false;
          break;
        }
      }
      hits += in;
    }
    return {static_cast<double>(hits) / static_cast<double>(rows_.size()) *
                static_cast<double>(n_),
            false};
  }

 private:
  uint64_t n_ = 0;  // source size at the last sync
  std::vector<std::vector<uint64_t>> rows_;
  std::mt19937_64 rng_;
};

}  // namespace ice

#endif  // ICE_RESERVOIR_HPP_
