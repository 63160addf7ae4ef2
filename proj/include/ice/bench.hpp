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

#ifndef ICE_BENCH_HPP_
#define ICE_BENCH_HPP_

// Workload replay harness: applies a stream's updates in order (timed),
// estimates every query (timed) against the current state, and reports
// q-error quantiles, latencies, and model sizes per method. Ground-truth
// cardinalities ride in the stream, so no oracle work happens inside timed
// sections.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ice/estimator.hpp"
#include "ice/index.hpp"
#include "ice/reservoir.hpp"
#include "ice/table.hpp"
#include "ice/workload.hpp"

namespace ice {

// max(E/T, T/E); both sides must be positive.
inline double qerror(double est, double true_card) {
  if (!(est > 0.0) || !(true_card > 0.0)) {
    throw std::invalid_argument("qerror needs positive inputs");
  }
  return std::max(est / true_card, true_card / est);
}

// Zero-safe form: when either side is zero, max(est, card) + 1, so an exact
// (0,0) scores 1 and a miss scores in proportion to what was missed.
inline double qerror_with_convention(double est, double true_card) {
  if (est <= 0.0 || true_card <= 0.0) return std::max(est, true_card) + 1.0;
  return qerror(est, true_card);
}

// Nearest-rank percentile: the smallest element with at least pct percent
// of the sample at or below it.
inline double quantile_nearest_rank(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(pct > 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile out of range");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

enum class Method : uint8_t { kIce, kSample, kOracle };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::kIce: return "ice";
    case Method::kSample: return "sample";
    case Method::kOracle: return "oracle";
  }
  throw std::invalid_argument("unknown method");
}

inline Method method_from_string(const std::string& s) {
  if (s == "ice") return Method::kIce;
  if (s == "sample") return Method::kSample;
  if (s == "oracle") return Method::kOracle;
  throw std::invalid_argument("unknown method \"" + s + "\"");
}

inline std::string to_string(SplitStrategy s) {
  return s == SplitStrategy::kMidpoint ? "middle" : "opt1";
}

inline SplitStrategy strategy_from_string(const std::string& s) {
  if (s == "middle") return SplitStrategy::kMidpoint;
  if (s == "opt1") return SplitStrategy::kOptimal1Split;
  throw std::invalid_argument("unknown strategy \"" + s + "\" (middle or opt1)");
}

struct BenchParams {
  uint32_t fanout = 100;
  FilterConfig filter;
  EstimatorConfig estimator;
  bool freeze = false;       // replay with update ops ignored (stale model)
  uint64_t sample_seed = 0x5a3b1e;
};

struct LatencyStats {
  double mean_ns = 0.0;
  double p99_ns = 0.0;
  std::size_t count = 0;
};

struct MethodReport {
  std::string method;
  std::size_t queries = 0;           // all QUERY ops
  std::size_t positive_queries = 0;  // true_card > 0: the quantile population
  double q50 = 0.0, q95 = 0.0, q99 = 0.0;
  double qmax = 0.0;                 // over every query, zero-convention included
  LatencyStats estimate_latency;
  LatencyStats update_latency;
  double bulk_load_seconds = 0.0;
  uint64_t model_bytes = 0;
  uint64_t exact_fallbacks = 0;      // hybrid escalations (ice only)
};

struct ReplayResult {
  MethodReport report;
  std::vector<double> estimates;   // per query, stream order
  std::vector<double> true_cards;  // per query
  std::vector<double> qerrors;     // per query, zero-convention applied
};

namespace detail {

inline uint64_t mix_seed(uint64_t base, uint64_t salt) {
  uint64_t x = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline LatencyStats latency_stats(std::vector<double>& ns) {
  LatencyStats s;
  s.count = ns.size();
  if (ns.empty()) return s;
  double sum = 0.0;
  for (const double v : ns) sum += v;
  s.mean_ns = sum / static_cast<double>(ns.size());
  s.p99_ns = quantile_nearest_rank(ns, 99.0);
  return s;
}

}  // namespace detail

inline ReplayResult replay(const Table& table, std::span<const WorkloadOp> ops,
                           Method method, const BenchParams& params) {
  using Clock = std::chrono::steady_clock;
  const auto ns_between = [](Clock::time_point a, Clock::time_point b) {
    return static_cast<double>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
  };

  ReplayResult out;
  auto& rep = out.report;
  rep.method = to_string(method);

  // Build the method's structure from the snapshot (timed).
  ZOrderIndex index(table.schema(), params.fanout);
  Reservoir reservoir;
  {
    const auto t0 = Clock::now();
    if (method == Method::kSample) {
      reservoir = Reservoir::build(table, params.sample_seed);
    } else {
      index = ZOrderIndex::bulk_load(table.schema(), table.zkeys(), params.fanout);
    }
    rep.bulk_load_seconds = ns_between(t0, Clock::now()) / 1e9;
  }
  rep.model_bytes = method == Method::kSample ? reservoir.bytes() : index.snapshot_bytes();

  std::vector<double> update_ns, estimate_ns;
  uint64_t qidx = 0;
  for (const auto& op : ops) {
    if (op.kind == OpKind::kQuery) {
      double est = 0.0;
      const auto t0 = Clock::now();
      if (method == Method::kSample) {
        est = reservoir.estimate(op.low, op.high).est;
      } else if (method == Method::kOracle) {
        QueryBox box(table.schema(), op.low, op.high);
        est = static_cast<double>(index.range_count_exact(box).cardinality);
      } else {
        QueryBox box(table.schema(), op.low, op.high);
        EstimatorConfig cfg = params.estimator;
        cfg.seed = detail::mix_seed(params.estimator.seed, qidx);
        const auto r = estimate_cardinality(box, index, params.filter, cfg);
        est = r.est;
        rep.exact_fallbacks += r.used_exact_scan;
      }
      estimate_ns.push_back(ns_between(t0, Clock::now()));
      out.estimates.push_back(est);
      out.true_cards.push_back(static_cast<double>(op.true_card));
      out.qerrors.push_back(qerror_with_convention(est, static_cast<double>(op.true_card)));
      ++qidx;
      continue;
    }
    if (params.freeze) continue;
    const auto t0 = Clock::now();
    switch (op.kind) {
      case OpKind::kInsert:
        if (method == Method::kSample) reservoir.insert(op.values);
        else index.insert_row(op.values);
        break;
      case OpKind::kDelete:
        if (method == Method::kSample) reservoir.erase(op.values);
        else index.erase_row(op.values);
        break;
      case OpKind::kModify:
        if (method == Method::kSample) {
          reservoir.erase(op.old_values);
          reservoir.insert(op.new_values);
        } else {
          index.modify(table.schema().encode(op.old_values),
                       table.schema().encode(op.new_values));
        }
        break;
      case OpKind::kQuery:
        break;
    }
    update_ns.push_back(ns_between(t0, Clock::now()));
  }

  rep.queries = out.qerrors.size();
  std::vector<double> positive;
  positive.reserve(out.qerrors.size());
  for (std::size_t i = 0; i < out.qerrors.size(); ++i) {
    if (out.true_cards[i] > 0.0) positive.push_back(out.qerrors[i]);
  }
  rep.positive_queries = positive.size();
  if (!positive.empty()) {
    rep.q50 = quantile_nearest_rank(positive, 50.0);
    rep.q95 = quantile_nearest_rank(positive, 95.0);
    rep.q99 = quantile_nearest_rank(positive, 99.0);
  }
  rep.qmax = out.qerrors.empty() ? 0.0
                                 : *std::max_element(out.qerrors.begin(), out.qerrors.end());
  rep.estimate_latency = detail::latency_stats(estimate_ns);
  rep.update_latency = detail::latency_stats(update_ns);
  return out;
}

// Readers-only evaluation of an update-free stream across several worker
// threads. Estimates match the single-threaded replay exactly (per-query
// seeds do not depend on thread assignment); latency is not measured, since
// only the single-threaded replay produces faithful timing.
inline ReplayResult replay_parallel(const Table& table, std::span<const WorkloadOp> ops,
                                    Method method, const BenchParams& params,
                                    unsigned threads) {
  for (const auto& op : ops) {
    if (op.kind != OpKind::kQuery) {
      throw std::invalid_argument("parallel replay requires an update-free workload");
    }
  }
  if (threads == 0) threads = 1;

  ReplayResult out;
  auto& rep = out.report;
  rep.method = to_string(method);

  ZOrderIndex index(table.schema(), params.fanout);
  Reservoir reservoir;
  if (method == Method::kSample) {
    reservoir = Reservoir::build(table, params.sample_seed);
  } else {
    index = ZOrderIndex::bulk_load(table.schema(), table.zkeys(), params.fanout);
  }
  rep.model_bytes = method == Method::kSample ? reservoir.bytes() : index.snapshot_bytes();

  out.estimates.resize(ops.size());
  out.true_cards.resize(ops.size());
  out.qerrors.resize(ops.size());
  std::vector<uint64_t> fallbacks(threads, 0);

  const auto worker = [&](unsigned tid) {
    for (std::size_t i = tid; i < ops.size(); i += threads) {
      const auto& op = ops[i];
      double est = 0.0;
      if (method == Method::kSample) {
        est = reservoir.estimate(op.low, op.high).est;
      } else if (method == Method::kOracle) {
        QueryBox box(table.schema(), op.low, op.high);
        est = static_cast<double>(index.range_count_exact(box).cardinality);
      } else {
        QueryBox box(table.schema(), op.low, op.high);
        EstimatorConfig cfg = params.estimator;
        cfg.seed = detail::mix_seed(params.estimator.seed, i);
        const auto r = estimate_cardinality(box, index, params.filter, cfg);
        est = r.est;
        fallbacks[tid] += r.used_exact_scan;
      }
      out.estimates[i] = est;
      out.true_cards[i] = static_cast<double>(op.true_card);
      out.qerrors[i] = qerror_with_convention(est, static_cast<double>(op.true_card));
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& t : pool) t.join();
  for (const uint64_t f : fallbacks) rep.exact_fallbacks += f;

  rep.queries = out.qerrors.size();
  std::vector<double> positive;
  for (std::size_t i = 0; i < out.qerrors.size(); ++i) {
    if (out.true_cards[i] > 0.0) positive.push_back(out.qerrors[i]);
  }
  rep.positive_queries = positive.size();
  if (!positive.empty()) {
    rep.q50 = quantile_nearest_rank(positive, 50.0);
    rep.q95 = quantile_nearest_rank(positive, 95.0);
    rep.q99 = quantile_nearest_rank(positive, 99.0);
  }
  rep.qmax = out.qerrors.empty() ? 0.0
                                 : *std::max_element(out.qerrors.begin(), out.qerrors.end());
  return out;
}

// Replay a serialized workload after checking it was generated from this
// exact dataset snapshot.
inline std::vector<ReplayResult> run_benchmark(const Table& table,
                                               const WorkloadFile& workload,
                                               std::span<const Method> methods,
                                               const BenchParams& params) {
  if (workload.meta.dataset_hash != table.content_hash()) {
    throw std::runtime_error(
        "workload was generated from a different dataset snapshot");
  }
  std::vector<ReplayResult> out;
  out.reserve(methods.size());
  for (const Method m : methods) out.push_back(replay(table, workload.ops, m, params));
  return out;
}

enum class SweepParameter : uint8_t { kBudget, kDMax, kStrategy, kQBound, kConfidence };

inline SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "budget") return SweepParameter::kBudget;
  if (s == "dmax") return SweepParameter::kDMax;
  if (s == "strategy") return SweepParameter::kStrategy;
  if (s == "qbound") return SweepParameter::kQBound;
  if (s == "confidence") return SweepParameter::kConfidence;
  throw std::invalid_argument(
      "unknown sweep parameter \"" + s +
      "\" (budget, dmax, strategy, qbound, confidence)");
}

struct SweepRow {
  std::string value;
  ReplayResult result;
};

// One replay per value, everything else (seeds included) held fixed.
inline std::vector<SweepRow> sweep(const Table& table, std::span<const WorkloadOp> ops,
                                   SweepParameter parameter,
                                   std::span<const std::string> values,
                                   const BenchParams& base) {
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (const auto& v : values) {
    BenchParams p = base;
    switch (parameter) {
      case SweepParameter::kBudget:
        p.estimator.budget = std::stoull(v);
        break;
      case SweepParameter::kDMax:
        p.filter.max_depth = static_cast<uint32_t>(std::stoul(v));
        break;
      case SweepParameter::kStrategy:
        p.filter.strategy = strategy_from_string(v);
        break;
      case SweepParameter::kQBound:
        p.estimator.q_bound = std::stod(v);
        break;
      case SweepParameter::kConfidence:
        p.estimator.confidence = std::stod(v);
        break;
    }
    rows.push_back({v, replay(table, ops, Method::kIce, p)});
  }
  return rows;
}

inline nlohmann::json params_to_json(const BenchParams& p) {
  return {{"fanout", p.fanout},
          {"budget", p.estimator.budget},
          {"dmax", p.filter.max_depth},
          {"strategy", to_string(p.filter.strategy)},
          {"qbound", p.estimator.q_bound},
          {"confidence", p.estimator.confidence},
          {"hybrid", p.estimator.hybrid},
          {"freeze", p.freeze},
          {"seed", p.estimator.seed}};
}

inline nlohmann::json report_to_json(const MethodReport& r) {
  return {{"method", r.method},
          {"queries", {{"total", r.queries}, {"positive", r.positive_queries}}},
          {"qerror", {{"q50", r.q50}, {"q95", r.q95}, {"q99", r.q99}, {"qmax", r.qmax}}},
          {"estimate_latency_ns",
           {{"mean", r.estimate_latency.mean_ns}, {"p99", r.estimate_latency.p99_ns}}},
          {"update_latency_ns",
           {{"mean", r.update_latency.mean_ns},
            {"p99", r.update_latency.p99_ns},
            {"ops", r.update_latency.count}}},
          {"bulk_load_seconds", r.bulk_load_seconds},
          {"model_bytes", r.model_bytes},
          {"exact_fallbacks", r.exact_fallbacks}};
}

inline const char* report_csv_header() {
  return "method,queries,positive_queries,q50,q95,q99,qmax,"
         "estimate_mean_ns,estimate_p99_ns,update_mean_ns,update_p99_ns,"
         "update_ops,bulk_load_seconds,model_bytes,exact_fallbacks";
}

inline void report_to_csv(std::ostream& os, const MethodReport& r) {
  os << r.method << ',' << r.queries << ',' << r.positive_queries << ',' << r.q50
     << ',' << r.q95 << ',' << r.q99 << ',' << r.qmax << ','
     << r.estimate_latency.mean_ns << ',' << r.estimate_latency.p99_ns << ','
     << r.update_latency.mean_ns << ',' << r.update_latency.p99_ns << ','
     << r.update_latency.count << ',' << r.bulk_load_seconds << ',' << r.model_bytes
     << ',' << r.exact_fallbacks << '\n';
}

}  // namespace ice

#endif  // ICE_BENCH_HPP_
