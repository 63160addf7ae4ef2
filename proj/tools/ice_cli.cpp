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

// Command-line front end: dataset ingestion, synthetic data, workload
// generation, index builds, single estimates, the exact oracle, benchmark
// replays, and parameter sweeps. Reports are JSON or CSV; failures exit
// nonzero with a one-line error JSON on stderr. Every flag can also be set
// through an ICE_-prefixed environment variable.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ice/bench.hpp"
#include "ice/estimator.hpp"
#include "ice/index.hpp"
#include "ice/reservoir.hpp"
#include "ice/synthetic.hpp"
#include "ice/table.hpp"
#include "ice/workload.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(csv);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

std::vector<uint64_t> parse_u64_list(const std::string& csv, const char* what) {
  std::vector<uint64_t> out;
  for (const auto& tok : split_list(csv)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::runtime_error(std::string(what) + ": \"" + tok + "\" is not an integer");
    }
  }
  if (out.empty()) throw std::runtime_error(std::string(what) + ": empty list");
  return out;
}

std::vector<ice::ColumnSpec> parse_columns(const std::string& csv) {
  std::vector<ice::ColumnSpec> specs;
  for (const auto& tok : split_list(csv)) {
    ice::ColumnSpec spec;
    std::string kind = tok;
    const auto colon = tok.rfind(':');
    if (colon != std::string::npos) {
      spec.name = tok.substr(0, colon);
      kind = tok.substr(colon + 1);
    }
    if (kind == "num") spec.kind = ice::ColumnKind::kNumeric;
    else if (kind == "cat") spec.kind = ice::ColumnKind::kCategorical;
    else throw std::runtime_error("column \"" + tok + "\": kind must be num or cat");
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw std::runtime_error("--columns: empty list");
  return specs;
}

ice::WorkloadSpec parse_mix(const std::string& mix) {
  if (mix == "static") return ice::WorkloadSpec::static_mix();
  if (mix == "insert-heavy") return ice::WorkloadSpec::insert_heavy();
  if (mix == "update-heavy") return ice::WorkloadSpec::update_heavy();
  const auto parts = split_list(mix);
  if (parts.size() == 3) {
    ice::WorkloadSpec spec;
    try {
      spec.insert_parts = static_cast<uint32_t>(std::stoul(parts[0]));
      spec.delete_parts = static_cast<uint32_t>(std::stoul(parts[1]));
      spec.modify_parts = static_cast<uint32_t>(std::stoul(parts[2]));
      return spec;
    } catch (const std::exception&) {
    }
  }
  throw std::runtime_error("--mix: \"" + mix +
                           "\" (use static, insert-heavy, update-heavy, or i,d,m)");
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + out_path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write to " + out_path + " failed");
}

struct Options {
  // shared estimator / index knobs
  uint64_t seed = 1;
  uint32_t fanout = 100;
  uint64_t budget = 20000;
  uint32_t dmax = 6;
  double qbound = 20.0;
  double confidence = 1.0 - 1e-7;
  std::string strategy = "middle";
  std::string hybrid = "on";
  bool freeze = false;
  std::string out_path;
  std::string format = "json";
  unsigned parallel = 0;

  // inputs
  std::string input;
  std::string dataset;
  std::string workload;
  std::string index_path;
  std::string columns;
  bool header = false;

  // gen-data
  std::string kind = "clustered";
  uint64_t rows = 100000;
  std::string bits = "10,10";
  uint64_t clusters = 8;
  double spread = 0.02;
  double noise = 0.05;
  double skew = 1.1;

  // gen-workload
  std::string mix = "static";
  uint64_t queries = 2048;
  double update_fraction = 0.20;
  std::string drift = "none";

  // estimate / oracle
  std::string low;
  std::string high;

  // bench / sweep
  std::string methods = "ice";
  std::string parameter;
  std::string values;
};

ice::BenchParams bench_params(const Options& o) {
  ice::BenchParams p;
  p.fanout = o.fanout;
  p.filter.max_depth = o.dmax;
  p.filter.strategy = ice::strategy_from_string(o.strategy);
  p.estimator.budget = o.budget;
  p.estimator.q_bound = o.qbound;
  p.estimator.confidence = o.confidence;
  p.estimator.hybrid = o.hybrid == "on";
  p.estimator.seed = o.seed;
  p.freeze = o.freeze;
  p.sample_seed = o.seed;
  return p;
}

void add_shared_flags(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Seed for every random choice")->envname("ICE_SEED");
  sub->add_option("--fanout", o.fanout, "Tree fanout")->envname("ICE_FANOUT");
  sub->add_option("--budget", o.budget, "Sample draws per estimate")->envname("ICE_BUDGET");
  sub->add_option("--dmax", o.dmax, "Recursive filtering depth")->envname("ICE_DMAX");
  sub->add_option("--qbound", o.qbound, "Certified q-error target")->envname("ICE_QBOUND");
  sub->add_option("--confidence", o.confidence, "Per-query certainty of the bound")
      ->envname("ICE_CONFIDENCE");
  sub->add_option("--strategy", o.strategy, "Split point choice: middle or opt1")
      ->check(CLI::IsMember({"middle", "opt1"}))
      ->envname("ICE_STRATEGY");
  sub->add_option("--hybrid", o.hybrid, "Exact-scan fallback: on or off")
      ->check(CLI::IsMember({"on", "off"}))
      ->envname("ICE_HYBRID");
  sub->add_option("--out", o.out_path, "Output path (default: stdout)")->envname("ICE_OUT");
  sub->add_option("--format", o.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->envname("ICE_FORMAT");
}

int run_ingest(const Options& o) {
  const auto specs = parse_columns(o.columns);
  const ice::Table table = ice::ingest_csv_file(o.input, specs, o.header);
  if (o.out_path.empty()) throw std::runtime_error("ingest needs --out");
  table.save_file(o.out_path);
  nlohmann::json j{{"rows", table.row_count()},
                   {"columns", table.column_count()},
                   {"dataset_hash", ice::detail::hash_to_hex(table.content_hash())},
                   {"total_bits", table.schema().total_bits()}};
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t a = 0; a < table.column_count(); ++a) {
    cols.push_back({{"name", table.column_name(a)},
                    {"distinct", table.dictionary(a).size()},
                    {"bits", table.schema().bits(a)}});
  }
  j["per_column"] = cols;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_gen_data(const Options& o) {
  const auto bit_list = parse_u64_list(o.bits, "--bits");
  std::vector<uint8_t> bits;
  for (const uint64_t b : bit_list) bits.push_back(static_cast<uint8_t>(b));
  ice::Table table;
  if (o.kind == "clustered") {
    table = ice::make_clustered_table(o.rows, bits, o.clusters, o.spread, o.seed);
  } else if (o.kind == "correlated") {
    table = ice::make_correlated_table(o.rows, bits, o.noise, o.seed);
  } else if (o.kind == "zipfian") {
    table = ice::make_zipfian_table(o.rows, bits, o.skew, o.seed);
  } else {
    throw std::runtime_error("--kind: \"" + o.kind +
                             "\" (use clustered, correlated, or zipfian)");
  }
  std::ostringstream os;
  ice::write_csv(table, os, o.header);
  emit(o.out_path, os.str());
  return 0;
}

int run_gen_workload(const Options& o) {
  const ice::Table table = ice::Table::load_file(o.dataset);
  ice::WorkloadSpec spec = parse_mix(o.mix);
  spec.query_count = o.queries;
  spec.update_fraction = o.update_fraction;
  spec.seed = o.seed;
  spec.drift = ice::drift_from_string(o.drift);
  const ice::WorkloadStream stream = ice::build_workload_stream(table, spec);
  if (stream.uniform_fallback) {
    std::cerr << "note: adversarial weights were all zero; inserts drawn uniformly\n";
  }
  std::ostringstream os;
  ice::write_workload_jsonl(os, ice::make_meta(table, spec, stream), stream.ops);
  emit(o.out_path, os.str());
  return 0;
}

int run_build(const Options& o) {
  const ice::Table table = ice::Table::load_file(o.dataset);
  const auto t0 = std::chrono::steady_clock::now();
  const ice::ZOrderIndex index =
      ice::ZOrderIndex::bulk_load(table.schema(), table.zkeys(), o.fanout);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.out_path.empty()) throw std::runtime_error("build needs --out");
  std::ofstream os(o.out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + o.out_path + " for writing");
  index.save(os);
  nlohmann::json j{{"rows", index.total_count()},
                   {"distinct_keys", index.distinct_count()},
                   {"depth", index.depth()},
                   {"bulk_load_seconds", secs},
                   {"model_bytes", index.snapshot_bytes()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_estimate(const Options& o) {
  std::ifstream is(o.index_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + o.index_path);
  const ice::ZOrderIndex index = ice::ZOrderIndex::load(is);
  const auto low = parse_u64_list(o.low, "--low");
  const auto high = parse_u64_list(o.high, "--high");
  const ice::QueryBox box = index.make_box(low, high);
  const ice::BenchParams p = bench_params(o);
  const auto r = ice::estimate_cardinality(box, index, p.filter, p.estimator);
  nlohmann::json j{{"est", r.est},
                   {"count", r.count},
                   {"budget", r.budget},
                   {"r_sum", r.r_sum},
                   {"overflow_p", r.overflow_p},
                   {"used_exact_scan", r.used_exact_scan},
                   {"elapsed_ns", r.elapsed.count()}};
  emit(o.out_path, j.dump(2) + "\n");
  return 0;
}

int run_oracle(const Options& o) {
  const ice::Table table = ice::Table::load_file(o.dataset);
  const auto low = parse_u64_list(o.low, "--low");
  const auto high = parse_u64_list(o.high, "--high");
  const ice::QueryBox box(table.schema(), low, high);
  nlohmann::json j{{"cardinality", ice::oracle_cardinality(table, box)}};
  emit(o.out_path, j.dump(2) + "\n");
  return 0;
}

int run_bench(const Options& o) {
  const ice::Table table = ice::Table::load_file(o.dataset);
  std::ifstream is(o.workload);
  if (!is) throw std::runtime_error("cannot open " + o.workload);
  const ice::WorkloadFile wf = ice::read_workload_jsonl(is);
  if (wf.meta.dataset_hash != table.content_hash()) {
    throw std::runtime_error("workload was generated from a different dataset snapshot");
  }
  std::vector<ice::Method> methods;
  for (const auto& name : split_list(o.methods)) {
    methods.push_back(ice::method_from_string(name));
  }
  const ice::BenchParams params = bench_params(o);

  std::vector<ice::MethodReport> reports;
  for (const ice::Method m : methods) {
    const ice::ReplayResult r =
        o.parallel > 0 ? ice::replay_parallel(table, wf.ops, m, params, o.parallel)
                       : ice::replay(table, wf.ops, m, params);
    reports.push_back(r.report);
  }

  if (o.format == "csv") {
    std::ostringstream os;
    os << ice::report_csv_header() << '\n';
    for (const auto& r : reports) ice::report_to_csv(os, r);
    emit(o.out_path, os.str());
  } else {
    nlohmann::json j{{"params", ice::params_to_json(params)},
                     {"dataset",
                      {{"rows", table.row_count()},
                       {"hash", ice::detail::hash_to_hex(table.content_hash())}}},
                     {"timing_valid", o.parallel == 0}};
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : reports) rs.push_back(ice::report_to_json(r));
    j["reports"] = rs;
    emit(o.out_path, j.dump(2) + "\n");
  }
  return 0;
}

int run_sweep(const Options& o) {
  const ice::Table table = ice::Table::load_file(o.dataset);
  std::ifstream is(o.workload);
  if (!is) throw std::runtime_error("cannot open " + o.workload);
  const ice::WorkloadFile wf = ice::read_workload_jsonl(is);
  if (wf.meta.dataset_hash != table.content_hash()) {
    throw std::runtime_error("workload was generated from a different dataset snapshot");
  }
  const ice::SweepParameter param = ice::sweep_parameter_from_string(o.parameter);
  const auto values = split_list(o.values);
  const auto rows = ice::sweep(table, wf.ops, param, values, bench_params(o));

  if (o.format == "csv") {
    std::ostringstream os;
    os << o.parameter << ',' << ice::report_csv_header() << '\n';
    for (const auto& row : rows) {
      os << row.value << ',';
      ice::report_to_csv(os, row.result.report);
    }
    emit(o.out_path, os.str());
  } else {
    nlohmann::json j{{"parameter", o.parameter},
                     {"params", ice::params_to_json(bench_params(o))}};
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& row : rows) {
      rs.push_back({{"value", row.value}, {"report", ice::report_to_json(row.result.report)}});
    }
    j["rows"] = rs;
    emit(o.out_path, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Updateable sampling-based cardinality estimation over an order-statistic "
               "tree on interleaved keys"};
  app.require_subcommand(1);
  Options o;

  CLI::App* ingest = app.add_subcommand("ingest", "CSV to dataset artifact");
  ingest->add_option("input", o.input, "CSV file")->required()->envname("ICE_INPUT");
  ingest->add_option("--columns", o.columns, "Comma list of num|cat (or name:kind)")
      ->required()
      ->envname("ICE_COLUMNS");
  ingest->add_flag("--header", o.header, "First row is a header")->envname("ICE_HEADER");
  add_shared_flags(ingest, o);

  CLI::App* gen_data = app.add_subcommand("gen-data", "Synthetic dataset CSV");
  gen_data->add_option("--kind", o.kind, "clustered, correlated, or zipfian")
      ->envname("ICE_KIND");
  gen_data->add_option("--rows", o.rows, "Row count")->envname("ICE_ROWS");
  gen_data->add_option("--bits", o.bits, "Comma list of per-column bit widths")
      ->envname("ICE_BITS");
  gen_data->add_option("--clusters", o.clusters, "Cluster count (clustered)")
      ->envname("ICE_CLUSTERS");
  gen_data->add_option("--spread", o.spread, "Cluster spread fraction (clustered)")
      ->envname("ICE_SPREAD");
  gen_data->add_option("--noise", o.noise, "Noise fraction (correlated)")
      ->envname("ICE_NOISE");
  gen_data->add_option("--skew", o.skew, "Zipf exponent (zipfian)")->envname("ICE_SKEW");
  gen_data->add_flag("--header", o.header, "Emit a header row")->envname("ICE_HEADER");
  add_shared_flags(gen_data, o);

  CLI::App* gen_wl = app.add_subcommand("gen-workload", "Workload stream JSONL");
  gen_wl->add_option("--dataset", o.dataset, "Dataset artifact")->required()
      ->envname("ICE_DATASET");
  gen_wl->add_option("--mix", o.mix, "static, insert-heavy, update-heavy, or i,d,m")
      ->envname("ICE_MIX");
  gen_wl->add_option("--queries", o.queries, "Query count")->envname("ICE_QUERIES");
  gen_wl->add_option("--update-fraction", o.update_fraction,
                     "Update ops as a fraction of the table size")
      ->envname("ICE_UPDATE_FRACTION");
  gen_wl->add_option("--drift", o.drift, "none, data, or query")
      ->check(CLI::IsMember({"none", "data", "query"}))
      ->envname("ICE_DRIFT");
  add_shared_flags(gen_wl, o);

  CLI::App* build = app.add_subcommand("build", "Bulk-load an index snapshot");
  build->add_option("--dataset", o.dataset, "Dataset artifact")->required()
      ->envname("ICE_DATASET");
  add_shared_flags(build, o);

  CLI::App* estimate = app.add_subcommand("estimate", "One estimate against a snapshot");
  estimate->add_option("--index", o.index_path, "Index snapshot")->required()
      ->envname("ICE_INDEX");
  estimate->add_option("--low", o.low, "Comma list of low codes")->required()
      ->envname("ICE_LOW");
  estimate->add_option("--high", o.high, "Comma list of high codes")->required()
      ->envname("ICE_HIGH");
  add_shared_flags(estimate, o);

  CLI::App* oracle = app.add_subcommand("oracle", "Exact cardinality by full scan");
  oracle->add_option("--dataset", o.dataset, "Dataset artifact")->required()
      ->envname("ICE_DATASET");
  oracle->add_option("--low", o.low, "Comma list of low codes")->required()
      ->envname("ICE_LOW");
  oracle->add_option("--high", o.high, "Comma list of high codes")->required()
      ->envname("ICE_HIGH");
  add_shared_flags(oracle, o);

  CLI::App* bench = app.add_subcommand("bench", "Replay a workload and report");
  bench->add_option("--dataset", o.dataset, "Dataset artifact")->required()
      ->envname("ICE_DATASET");
  bench->add_option("--workload", o.workload, "Workload JSONL")->required()
      ->envname("ICE_WORKLOAD");
  bench->add_option("--methods", o.methods, "Comma list of ice, sample, oracle")
      ->envname("ICE_METHODS");
  bench->add_flag("--freeze", o.freeze, "Ignore update ops (stale model)")
      ->envname("ICE_FREEZE");
  bench->add_option("--parallel", o.parallel,
                    "Worker threads for update-free replays (disables timing)")
      ->envname("ICE_PARALLEL");
  add_shared_flags(bench, o);

  CLI::App* sweep = app.add_subcommand("sweep", "Replay once per parameter value");
  sweep->add_option("--dataset", o.dataset, "Dataset artifact")->required()
      ->envname("ICE_DATASET");
  sweep->add_option("--workload", o.workload, "Workload JSONL")->required()
      ->envname("ICE_WORKLOAD");
  sweep->add_option("--parameter", o.parameter,
                    "budget, dmax, strategy, qbound, or confidence")
      ->required()
      ->envname("ICE_PARAMETER");
  sweep->add_option("--values", o.values, "Comma list of values")->required()
      ->envname("ICE_VALUES");
  add_shared_flags(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    nlohmann::json err{{"error", e.what()}, {"kind", "usage"}};
    std::cerr << err.dump() << '\n';
    return e.get_exit_code();
  }

  try {
    if (ingest->parsed()) return run_ingest(o);
    if (gen_data->parsed()) return run_gen_data(o);
    if (gen_wl->parsed()) return run_gen_workload(o);
    if (build->parsed()) return run_build(o);
    if (estimate->parsed()) return run_estimate(o);
    if (oracle->parsed()) return run_oracle(o);
    if (bench->parsed()) return run_bench(o);
    if (sweep->parsed()) return run_sweep(o);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
