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

#ifndef ICE_WORKLOAD_HPP_
#define ICE_WORKLOAD_HPP_

// Benchmark workloads: box-query generation (with drift modes), adversarial
// update selection biased toward low-cardinality query regions, and ordered
// operation streams whose query cardinalities are ground truth against the
// table state at each position. Streams serialize to JSON Lines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ice/table.hpp"
#include "ice/zorder.hpp"

namespace ice {

enum class OpKind : uint8_t { kInsert, kDelete, kModify, kQuery };

struct WorkloadOp {
  OpKind kind = OpKind::kQuery;
  std::vector<uint64_t> values;      // insert / delete payload (codes)
  std::vector<uint64_t> old_values;  // modify: the row removed
  std::vector<uint64_t> new_values;  // modify: the row added
  std::vector<uint64_t> low, high;   // query box (codes, inclusive)
  uint64_t true_card = 0;            // query: exact cardinality at this position
};

enum class QueryDrift : uint8_t {
  kNone = 0,   // centers drawn uniformly over all rows
  kData = 1,   // centers drawn from the upper half of the first column's order
  kQuery = 2,  // only the last attribute is constrained
};

inline std::string to_string(QueryDrift d) {
  switch (d) {
    case QueryDrift::kNone: return "none";
    case QueryDrift::kData: return "data";
    case QueryDrift::kQuery: return "query";
  }
  throw std::invalid_argument("unknown drift mode");
}

inline QueryDrift drift_from_string(const std::string& s) {
  if (s == "none") return QueryDrift::kNone;
  if (s == "data") return QueryDrift::kData;
  if (s == "query") return QueryDrift::kQuery;
  throw std::invalid_argument("unknown drift mode \"" + s + "\"");
}

struct WorkloadSpec {
  // insert : delete : modify ratio. Allowed, up to a common factor:
  // 0:0:0 (static), 2:1:1 (insert-heavy), 1:1:2 (update-heavy).
  uint32_t insert_parts = 0;
  uint32_t delete_parts = 0;
  uint32_t modify_parts = 0;
  std::size_t query_count = 2048;
  double update_fraction = 0.20;  // update ops as a fraction of the table size
  uint64_t seed = 1;
  QueryDrift drift = QueryDrift::kNone;

  static WorkloadSpec static_mix() { return {}; }
  static WorkloadSpec insert_heavy() {
    WorkloadSpec s;
    s.insert_parts = 2;
    s.delete_parts = 1;
    s.modify_parts = 1;
    return s;
  }
  static WorkloadSpec update_heavy() {
    WorkloadSpec s;
    s.insert_parts = 1;
    s.delete_parts = 1;
    s.modify_parts = 2;
    return s;
  }
};

inline void validate(const WorkloadSpec& spec) {
  uint32_t g = std::gcd(std::gcd(spec.insert_parts, spec.delete_parts), spec.modify_parts);
  if (g == 0) g = 1;
  const uint32_t i = spec.insert_parts / g;
  const uint32_t d = spec.delete_parts / g;
  const uint32_t m = spec.modify_parts / g;
  const bool ok = (i == 0 && d == 0 && m == 0) || (i == 2 && d == 1 && m == 1) ||
                  (i == 1 && d == 1 && m == 2);
  if (!ok) {
    throw std::invalid_argument("mix " + std::to_string(spec.insert_parts) + ":" +
                                std::to_string(spec.delete_parts) + ":" +
                                std::to_string(spec.modify_parts) +
                                " is not one of 0:0:0, 2:1:1, 1:1:2");
  }
  if (spec.query_count == 0) throw std::invalid_argument("query_count must be positive");
  if (i + d + m != 0 &&
      !(spec.update_fraction > 0.0 && spec.update_fraction < 1.0)) {
    throw std::invalid_argument("update_fraction must lie in (0,1)");
  }
}

struct GeneratedQuery {
  std::vector<uint64_t> low, high;
  uint64_t true_card = 0;
};

namespace detail {

// Box of the given width containing `center`, clamped into [0, domain).
inline std::pair<uint64_t, uint64_t> box_side(uint64_t center, uint64_t width,
                                              uint64_t domain) {
  const uint64_t half = (width - 1) / 2;
  uint64_t lo = center > half ? center - half : 0;
  uint64_t hi = lo + width - 1;
  if (hi > domain - 1) {
    hi = domain - 1;
    lo = hi >= width - 1 ? hi - (width - 1) : 0;
  }
  return {lo, hi};
}

inline std::vector<GeneratedQuery> generate_queries(const Table& table,
                                                    std::size_t count,
                                                    std::mt19937_64& rng,
                                                    QueryDrift drift) {
  if (table.row_count() == 0) throw std::invalid_argument("table is empty");
  const auto& schema = table.schema();
  const std::size_t m = schema.attribute_count();

  // Center pool. Data drift reproduces the sorted-by-first-column split:
  // centers come only from the upper half of that order.
  std::vector<std::size_t> pool(table.row_count());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (drift == QueryDrift::kData) {
    std::sort(pool.begin(), pool.end(), [&table](std::size_t a, std::size_t b) {
      return table.row(a)[0] < table.row(b)[0];
    });
    pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(pool.size() / 2));
  }

  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<GeneratedQuery> out;
  out.reserve(count);
  for (std::size_t q = 0; q < count; ++q) {
    const auto center = table.row(pool[pick(rng)]);
    GeneratedQuery g;
    g.low.resize(m);
    g.high.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
      const uint64_t dom = schema.domain_size(a);
      if (drift == QueryDrift::kQuery && a + 1 < m) {
        g.low[a] = 0;
        g.high[a] = dom - 1;
        continue;
      }
      // Width log-uniform over [1, dom]: every scale equally likely.
      const double w = std::exp(u01(rng) * std::log(static_cast<double>(dom)));
      const uint64_t width = std::min<uint64_t>(
          dom, std::max<uint64_t>(1, static_cast<uint64_t>(std::llround(w))));
      const auto [lo, hi] = box_side(center[a], width, dom);
      g.low[a] = lo;
      g.high[a] = hi;
    }
    g.true_card = oracle_cardinality(table, QueryBox(schema, g.low, g.high));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

// Boxes built around uniformly drawn center rows with per-attribute widths
// log-uniform over each domain; every box contains its center row. True
// cardinalities are filled by the full-scan oracle.
inline std::vector<GeneratedQuery> generate_queries(const Table& table, std::size_t count,
                                                    uint64_t seed,
                                                    QueryDrift drift = QueryDrift::kNone) {
  std::mt19937_64 rng(seed);
  return detail::generate_queries(table, count, rng, drift);
}

struct MixCounts {
  uint64_t inserts = 0;
  uint64_t deletes = 0;
  uint64_t modifies = 0;
  uint64_t total = 0;
};

// Op counts for the requested mix: total = round(fraction * N), deletes and
// modifies rounded per ratio, the remainder handed to inserts.
inline MixCounts mix_counts(const WorkloadSpec& spec, uint64_t table_rows) {
  MixCounts mc;
  const uint64_t parts = spec.insert_parts + spec.delete_parts + spec.modify_parts;
  if (parts == 0) return mc;
  mc.total = static_cast<uint64_t>(
      std::llround(spec.update_fraction * static_cast<double>(table_rows)));
  mc.deletes = static_cast<uint64_t>(std::llround(
      static_cast<double>(mc.total) * spec.delete_parts / static_cast<double>(parts)));
  mc.modifies = static_cast<uint64_t>(std::llround(
      static_cast<double>(mc.total) * spec.modify_parts / static_cast<double>(parts)));
  while (mc.deletes + mc.modifies > mc.total) {
    if (mc.modifies > 0) --mc.modifies;
    else --mc.deletes;
  }
  mc.inserts = mc.total - mc.deletes - mc.modifies;
  return mc;
}

struct AdversarialUpdates {
  std::vector<std::vector<uint64_t>> inserts;  // weighted draws, with replacement
  std::vector<std::vector<uint64_t>> deletes;  // uniform draws, without replacement
  bool uniform_fallback = false;  // every weight was zero; inserts fell back to uniform
};

namespace detail {

// Per-row adversarial weight: the sum, over the witness boxes containing
// the row, of the box's inverse selectivity capped at 1e5. Rows that only
// low-cardinality boxes select end up heavily favored.
inline std::vector<double> adversarial_weights(const Table& table,
                                               std::span<const GeneratedQuery> queries,
                                               std::span<const std::size_t> witness) {
  const uint64_t n = table.row_count();
  const std::size_t m = table.column_count();
  std::vector<double> weight(n, 0.0);
  for (const std::size_t qi : witness) {
    const auto& q = queries[qi];
    if (q.true_card == 0) continue;  // contains no row, contributes nothing
    const double sel = static_cast<double>(q.true_card) / static_cast<double>(n);
    const double contribution = std::min(1.0 / sel, 1e5);
    for (uint64_t r = 0; r < n; ++r) {
      const auto row = table.row(r);
      bool in = true;
      for (std::size_t a = 0; a < m; ++a) {
        if (row[a] < q.low[a] || row[a] > q.high[a]) {
          in = false;
          break;
        }
      }
      if (in) weight[r] += contribution;
    }
  }
  return weight;
}

inline AdversarialUpdates select_adversarial_updates(
    const Table& table, std::span<const GeneratedQuery> queries,
    const WorkloadSpec& spec, std::mt19937_64& rng) {
  validate(spec);
  const MixCounts mc = mix_counts(spec, table.row_count());
  const uint64_t n = table.row_count();
  const uint64_t insert_pool = mc.inserts + mc.modifies;
  const uint64_t delete_pool = mc.deletes + mc.modifies;
  if (delete_pool > n) {
    throw std::invalid_argument("delete pool exceeds the table size");
  }

  AdversarialUpdates out;
  if (insert_pool > 0) {
    // W: a uniform 10% subset of the query boxes.
    std::vector<std::size_t> idx(queries.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> witness;
    const std::size_t w_count = std::max<std::size_t>(1, queries.size() / 10);
    std::sample(idx.begin(), idx.end(), std::back_inserter(witness), w_count, rng);

    std::vector<double> weight = adversarial_weights(table, queries, witness);
    if (std::all_of(weight.begin(), weight.end(), [](double w) { return w == 0.0; })) {
      out.uniform_fallback = true;
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    std::discrete_distribution<uint64_t> draw(weight.begin(), weight.end());
    out.inserts.reserve(insert_pool);
    for (uint64_t k = 0; k < insert_pool; ++k) {
      const auto row = table.row(draw(rng));
      out.inserts.emplace_back(row.begin(), row.end());
    }
  }

  if (delete_pool > 0) {
    std::vector<uint64_t> idx(n);
    std::iota(idx.begin(), idx.end(), uint64_t{0});
    std::vector<uint64_t> victims;
    std::sample(idx.begin(), idx.end(), std::back_inserter(victims), delete_pool, rng);
    out.deletes.reserve(delete_pool);
    for (const uint64_t r : victims) {
      const auto row = table.row(r);
      out.deletes.emplace_back(row.begin(), row.end());
    }
  }
  return out;
}

// Exact multiset of rows keyed by their code vectors; the evolving ground
// truth during stream construction. Knows nothing about interleaved keys.
class CodeMultiset {
 public:
  explicit CodeMultiset(const Table& table) {
    map_.reserve(table.row_count());
    for (std::size_t i = 0; i < table.row_count(); ++i) {
      const auto row = table.row(i);
      ++map_[std::vector<uint64_t>(row.begin(), row.end())];
    }
  }

  void add(const std::vector<uint64_t>& row) { ++map_[row]; }

  void remove(const std::vector<uint64_t>& row) {
    const auto it = map_.find(row);
    if (it == map_.end()) throw std::logic_error("delete target is not present");
    if (--it->second == 0) map_.erase(it);
  }

  uint64_t count_box(std::span<const uint64_t> low, std::span<const uint64_t> high) const {
    uint64_t card = 0;
    for (const auto& [row, copies] : map_) {
      bool in = true;
      for (std::size_t a = 0; a < row.size(); ++a) {
        if (row[a] < low[a] || row[a] > high[a]) {
          in = false;
          break;
        }
      }
      if (in) card += copies;
    }
    return card;
  }

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<uint64_t>& v) const {
      uint64_t h = 14695981039346656037ULL;
      for (const uint64_t x : v) {
        for (int i = 0; i < 8; ++i) {
          h ^= (x >> (8 * i)) & 0xff;
          h *= 1099511628211ULL;
        }
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::vector<uint64_t>, uint64_t, VecHash> map_;
};

}  // namespace detail

inline AdversarialUpdates select_adversarial_updates(
    const Table& table, std::span<const GeneratedQuery> queries, const WorkloadSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return detail::select_adversarial_updates(table, queries, spec, rng);
}

struct WorkloadStream {
  std::vector<WorkloadOp> ops;  // execution order
  MixCounts mix;                // realized update-op counts
  std::size_t query_count = 0;
  bool uniform_fallback = false;
};

// Shuffled update ops dealt into near-equal batches, one batch before each
// query; every query's true_card is the exact cardinality against the
// multiset state at that point in the stream.
inline WorkloadStream build_workload_stream(const Table& table, const WorkloadSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);

  const auto queries = detail::generate_queries(table, spec.query_count, rng, spec.drift);
  const MixCounts mc = mix_counts(spec, table.row_count());
  const auto adv = detail::select_adversarial_updates(table, queries, spec, rng);

  std::vector<WorkloadOp> updates;
  updates.reserve(mc.total);
  for (uint64_t j = 0; j < mc.inserts; ++j) {
    WorkloadOp op;
    op.kind = OpKind::kInsert;
    op.values = adv.inserts[j];
    updates.push_back(std::move(op));
  }
  for (uint64_t j = 0; j < mc.deletes; ++j) {
    WorkloadOp op;
    op.kind = OpKind::kDelete;
    op.values = adv.deletes[j];
    updates.push_back(std::move(op));
  }
  for (uint64_t j = 0; j < mc.modifies; ++j) {
    WorkloadOp op;
    op.kind = OpKind::kModify;
    op.old_values = adv.deletes[mc.deletes + j];
    op.new_values = adv.inserts[mc.inserts + j];
    updates.push_back(std::move(op));
  }
  std::shuffle(updates.begin(), updates.end(), rng);

  WorkloadStream stream;
  stream.mix = mc;
  stream.query_count = spec.query_count;
  stream.uniform_fallback = adv.uniform_fallback;
  stream.ops.reserve(updates.size() + queries.size());

  detail::CodeMultiset state(table);
  std::size_t next = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const std::size_t upto = (mc.total * (q + 1)) / queries.size();
    for (; next < upto; ++next) {
      auto& op = updates[next];
      switch (op.kind) {
        case OpKind::kInsert:
          state.add(op.values);
          break;
        case OpKind::kDelete:
          state.remove(op.values);
          break;
        case OpKind::kModify:
          state.remove(op.old_values);
          state.add(op.new_values);
          break;
        case OpKind::kQuery:
          break;
      }
      stream.ops.push_back(std::move(op));
    }
    WorkloadOp op;
    op.kind = OpKind::kQuery;
    op.low = queries[q].low;
    op.high = queries[q].high;
    op.true_card = state.count_box(op.low, op.high);
    stream.ops.push_back(std::move(op));
  }
  return stream;
}

struct WorkloadMeta {
  uint32_t version = 1;
  uint64_t dataset_hash = 0;
  uint32_t insert_parts = 0, delete_parts = 0, modify_parts = 0;
  std::size_t query_count = 0;
  double update_fraction = 0.0;
  uint64_t seed = 0;
  QueryDrift drift = QueryDrift::kNone;
  MixCounts mix;
};

inline WorkloadMeta make_meta(const Table& table, const WorkloadSpec& spec,
                              const WorkloadStream& stream) {
  WorkloadMeta meta;
  meta.dataset_hash = table.content_hash();
  meta.insert_parts = spec.insert_parts;
  meta.delete_parts = spec.delete_parts;
  meta.modify_parts = spec.modify_parts;
  meta.query_count = stream.query_count;
  meta.update_fraction = spec.update_fraction;
  meta.seed = spec.seed;
  meta.drift = spec.drift;
  meta.mix = stream.mix;
  return meta;
}

namespace detail {

inline std::string hash_to_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int i = 15; i >= 0; --i) s.push_back(digits[(h >> (4 * i)) & 0xf]);
  return s;
}

inline uint64_t hash_from_hex(const std::string& s) {
  if (s.size() < 3 || s[0] != '0' || s[1] != 'x') {
    throw std::runtime_error("bad hash literal \"" + s + "\"");
  }
  uint64_t h = 0;
  for (std::size_t i = 2; i < s.size(); ++i) {
    const char c = s[i];
    h <<= 4;
    if (c >= '0' && c <= '9') h |= static_cast<uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') h |= static_cast<uint64_t>(c - 'a' + 10);
    else throw std::runtime_error("bad hash literal \"" + s + "\"");
  }
  return h;
}

}  // namespace detail

// One JSON object per line; the first line is a meta record tying the file
// to the dataset snapshot it was generated from.
inline void write_workload_jsonl(std::ostream& os, const WorkloadMeta& meta,
                                 std::span<const WorkloadOp> ops) {
  nlohmann::json mj;
  mj["op"] = "meta";
  mj["version"] = meta.version;
  mj["dataset_hash"] = detail::hash_to_hex(meta.dataset_hash);
  mj["mix"] = {meta.insert_parts, meta.delete_parts, meta.modify_parts};
  mj["query_count"] = meta.query_count;
  mj["update_fraction"] = meta.update_fraction;
  mj["seed"] = meta.seed;
  mj["drift"] = to_string(meta.drift);
  mj["ops"] = {{"insert", meta.mix.inserts},
               {"delete", meta.mix.deletes},
               {"modify", meta.mix.modifies}};
  os << mj.dump() << '\n';

  for (const auto& op : ops) {
    nlohmann::json j;
    switch (op.kind) {
      case OpKind::kInsert:
        j["op"] = "insert";
        j["values"] = op.values;
        break;
      case OpKind::kDelete:
        j["op"] = "delete";
        j["values"] = op.values;
        break;
      case OpKind::kModify:
        j["op"] = "modify";
        j["old"] = op.old_values;
        j["new"] = op.new_values;
        break;
      case OpKind::kQuery:
        j["op"] = "query";
        j["box"] = {{"low", op.low}, {"high", op.high}};
        j["true_card"] = op.true_card;
        break;
    }
    os << j.dump() << '\n';
  }
}

struct WorkloadFile {
  WorkloadMeta meta;
  std::vector<WorkloadOp> ops;
};

inline WorkloadFile read_workload_jsonl(std::istream& is) {
  WorkloadFile out;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("workload line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    const std::string op = j.at("op").get<std::string>();
    if (!have_meta) {
      if (op != "meta") {
        throw std::runtime_error("workload file must start with a meta record");
      }
      out.meta.version = j.at("version").get<uint32_t>();
      out.meta.dataset_hash =
          detail::hash_from_hex(j.at("dataset_hash").get<std::string>());
      const auto mix = j.at("mix");
      out.meta.insert_parts = mix.at(0).get<uint32_t>();
      out.meta.delete_parts = mix.at(1).get<uint32_t>();
      out.meta.modify_parts = mix.at(2).get<uint32_t>();
      out.meta.query_count = j.at("query_count").get<std::size_t>();
      out.meta.update_fraction = j.at("update_fraction").get<double>();
      out.meta.seed = j.at("seed").get<uint64_t>();
      out.meta.drift = drift_from_string(j.at("drift").get<std::string>());
      out.meta.mix.inserts = j.at("ops").at("insert").get<uint64_t>();
      out.meta.mix.deletes = j.at("ops").at("delete").get<uint64_t>();
      out.meta.mix.modifies = j.at("ops").at("modify").get<uint64_t>();
      out.meta.mix.total =
          out.meta.mix.inserts + out.meta.mix.deletes + out.meta.mix.modifies;
      have_meta = true;
      continue;
    }
    WorkloadOp w;
    if (op == "insert" || op == "delete") {
      w.kind = op == "insert" ? OpKind::kInsert : OpKind::kDelete;
      w.values = j.at("values").get<std::vector<uint64_t>>();
    } else if (op == "modify") {
      w.kind = OpKind::kModify;
      w.old_values = j.at("old").get<std::vector<uint64_t>>();
      w.new_values = j.at("new").get<std::vector<uint64_t>>();
    } else if (op == "query") {
      w.kind = OpKind::kQuery;
      w.low = j.at("box").at("low").get<std::vector<uint64_t>>();
      w.high = j.at("box").at("high").get<std::vector<uint64_t>>();
      w.true_card = j.at("true_card").get<uint64_t>();
    } else {
      throw std::runtime_error("workload line " + std::to_string(line_no) +
                               ": unknown op \"" + op + "\"");
    }
    out.ops.push_back(std::move(w));
  }
  if (!have_meta) throw std::runtime_error("workload file is empty");
  return out;
}

}  // namespace ice

#endif  // ICE_WORKLOAD_HPP_
