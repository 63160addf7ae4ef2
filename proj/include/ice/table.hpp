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

#ifndef ICE_TABLE_HPP_
#define ICE_TABLE_HPP_

// Dataset snapshot: CSV ingestion, per-column dictionaries mapping raw
// values to dense codes, the full-scan cardinality oracle, and a binary
// artifact whose content hash ties workloads to the snapshot they were
// generated from.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ice/binio.hpp"
#include "ice/zorder.hpp"

namespace ice {

enum class ColumnKind : uint8_t {
  kNumeric = 0,      // codes follow numeric order, so code ranges are value ranges
  kCategorical = 1,  // codes in first-seen order
};

struct ColumnSpec {
  std::string name;  // empty: taken from the header row, or "col<i>"
  ColumnKind kind = ColumnKind::kNumeric;
};

// Raw value <-> dense code map for one column. Identity dictionaries carry
// no raw values; their codes are the values (synthetic data).
class Dictionary {
 public:
  Dictionary() = default;

  static Dictionary identity() {
    Dictionary d;
    d.identity_ = true;
    return d;
  }

  // Numeric values in ascending order, each with the raw text it first
  // appeared as. Code = position.
  static Dictionary numeric(std::vector<double> sorted_values,
                            std::vector<std::string> labels) {
    Dictionary d;
    d.kind_ = ColumnKind::kNumeric;
    d.numeric_ = std::move(sorted_values);
    d.labels_ = std::move(labels);
    return d;
  }

  // Categorical values in first-seen order. Code = position.
  static Dictionary categorical(std::vector<std::string> labels) {
    Dictionary d;
    d.kind_ = ColumnKind::kCategorical;
    d.labels_ = std::move(labels);
    for (std::size_t i = 0; i < d.labels_.size(); ++i) d.index_[d.labels_[i]] = i;
    return d;
  }

  ColumnKind kind() const { return kind_; }
  bool is_identity() const { return identity_; }
  uint64_t size() const { return labels_.size(); }

  std::string label(uint64_t code) const {
    if (identity_) return std::to_string(code);
    if (code >= labels_.size()) throw std::out_of_range("code outside dictionary");
    return labels_[code];
  }

  std::optional<uint64_t> code_of(const std::string& raw) const {
    if (identity_) {
      uint64_t v = 0;
      const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc{} || p != raw.data() + raw.size()) return std::nullopt;
      return v;
    }
    if (kind_ == ColumnKind::kCategorical) {
      const auto it = index_.find(raw);
      if (it == index_.end()) return std::nullopt;
      return it->second;
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || p != raw.data() + raw.size()) return std::nullopt;
    const auto it = std::lower_bound(numeric_.begin(), numeric_.end(), v);
    if (it == numeric_.end() || *it != v) return std::nullopt;
    return static_cast<uint64_t>(it - numeric_.begin());
  }

  void save(std::ostream& os) const {
    io::write_u8(os, static_cast<uint8_t>(kind_));
    io::write_u8(os, identity_ ? 1 : 0);
    io::write_u64(os, labels_.size());
    for (const auto& s : labels_) io::write_string(os, s);
    io::write_u64(os, numeric_.size());
    for (const double v : numeric_) io::write_f64(os, v);
  }

  static Dictionary load(std::istream& is) {
    Dictionary d;
    d.kind_ = static_cast<ColumnKind>(io::read_u8(is));
    d.identity_ = io::read_u8(is) != 0;
    d.labels_.resize(io::read_u64(is));
    for (auto& s : d.labels_) s = io::read_string(is);
    d.numeric_.resize(io::read_u64(is));
    for (auto& v : d.numeric_) v = io::read_f64(is);
    if (d.kind_ == ColumnKind::kCategorical) {
      for (std::size_t i = 0; i < d.labels_.size(); ++i) d.index_[d.labels_[i]] = i;
    }
    return d;
  }

 private:
  ColumnKind kind_ = ColumnKind::kNumeric;
  bool identity_ = false;
  std::vector<std::string> labels_;                   // code -> raw text
  std::vector<double> numeric_;                       // numeric: sorted values
  std::unordered_map<std::string, uint64_t> index_;   // categorical: raw -> code
};

// Immutable dataset snapshot: a schema, one dictionary per column, and the
// rows as flat dictionary codes (row-major, stride = column count).
class Table {
 public:
  Table() = default;

  Table(AttributeSchema schema, std::vector<std::string> names,
        std::vector<Dictionary> dicts, std::vector<uint64_t> codes)
      : schema_(std::move(schema)),
        names_(std::move(names)),
        dicts_(std::move(dicts)),
        codes_(std::move(codes)) {
    const std::size_t m = schema_.attribute_count();
    if (names_.size() != m || dicts_.size() != m || codes_.size() % m != 0) {
      throw std::invalid_argument("table pieces disagree on column count");
    }
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      const std::size_t a = i % m;
      if (schema_.bits(a) < 64 && codes_[i] >= (uint64_t{1} << schema_.bits(a))) {
        throw std::domain_error("row " + std::to_string(i / m) + " column " +
                                std::to_string(a) + " code outside its domain");
      }
    }
    hash_ = compute_hash();
  }

  // Synthetic data path: codes are the values, identity dictionaries.
  static Table from_codes(std::vector<uint8_t> bits, std::vector<uint64_t> codes,
                          std::vector<std::string> names = {}) {
    AttributeSchema schema(std::move(bits));
    const std::size_t m = schema.attribute_count();
    if (names.empty()) {
      for (std::size_t a = 0; a < m; ++a) names.push_back("col" + std::to_string(a));
    }
    std::vector<Dictionary> dicts(m, Dictionary::identity());
    return Table(std::move(schema), std::move(names), std::move(dicts), std::move(codes));
  }

  const AttributeSchema& schema() const { return schema_; }
  std::size_t column_count() const { return schema_.attribute_count(); }
  std::size_t row_count() const { return codes_.size() / schema_.attribute_count(); }
  const std::string& column_name(std::size_t a) const { return names_[a]; }
  const Dictionary& dictionary(std::size_t a) const { return dicts_[a]; }
  const std::vector<uint64_t>& codes() const { return codes_; }

  std::span<const uint64_t> row(std::size_t i) const {
    const std::size_t m = schema_.attribute_count();
    return std::span<const uint64_t>(codes_).subspan(i * m, m);
  }

  ZKey zkey(std::size_t i) const { return schema_.encode(row(i)); }

  std::vector<ZKey> zkeys() const {
    std::vector<ZKey> keys;
    keys.reserve(row_count());
    for (std::size_t i = 0; i < row_count(); ++i) keys.push_back(zkey(i));
    return keys;
  }

  // Content hash over schema, dictionaries, and rows; workload files carry
  // it so a replay against a different snapshot is refused.
  uint64_t content_hash() const { return hash_; }

  void save(std::ostream& os) const {
    io::write_magic(os, kMagic);
    io::write_u32(os, static_cast<uint32_t>(schema_.attribute_count()));
    for (std::size_t a = 0; a < schema_.attribute_count(); ++a) {
      io::write_string(os, names_[a]);
      io::write_u8(os, static_cast<uint8_t>(schema_.bits(a)));
      dicts_[a].save(os);
    }
    io::write_u64(os, row_count());
    for (const uint64_t c : codes_) io::write_u64(os, c);
    io::write_u64(os, hash_);
  }

  static Table load(std::istream& is) {
    io::expect_magic(is, kMagic, "dataset artifact");
    const uint32_t m = io::read_u32(is);
    if (m == 0) throw std::runtime_error("dataset artifact corrupt: zero columns");
    std::vector<std::string> names(m);
    std::vector<uint8_t> bits(m);
    std::vector<Dictionary> dicts;
    dicts.reserve(m);
    for (uint32_t a = 0; a < m; ++a) {
      names[a] = io::read_string(is);
      bits[a] = io::read_u8(is);
      dicts.push_back(Dictionary::load(is));
    }
    const uint64_t rows = io::read_u64(is);
    std::vector<uint64_t> codes(rows * m);
    for (auto& c : codes) c = io::read_u64(is);
    const uint64_t stored_hash = io::read_u64(is);
    Table t(AttributeSchema(std::move(bits)), std::move(names), std::move(dicts),
            std::move(codes));
    if (t.hash_ != stored_hash) {
      throw std::runtime_error("dataset artifact corrupt: content hash mismatch");
    }
    return t;
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    save(os);
  }

  static Table load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load(is);
  }

 private:
  static constexpr char kMagic[9] = "ICETBL1\n";

  uint64_t compute_hash() const {
    uint64_t h = 14695981039346656037ULL;
    const auto mix_u64 = [&h](uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    };
    const auto mix_str = [&](const std::string& s) {
      mix_u64(s.size());
      for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
      }
    };
    mix_u64(schema_.attribute_count());
    for (std::size_t a = 0; a < schema_.attribute_count(); ++a) {
      mix_str(names_[a]);
      mix_u64(static_cast<uint64_t>(dicts_[a].kind()));
      mix_u64(schema_.bits(a));
      mix_u64(dicts_[a].size());
      for (uint64_t c = 0; c < dicts_[a].size(); ++c) mix_str(dicts_[a].label(c));
    }
    mix_u64(row_count());
    for (const uint64_t c : codes_) mix_u64(c);
    return h;
  }

  AttributeSchema schema_;
  std::vector<std::string> names_;
  std::vector<Dictionary> dicts_;
  std::vector<uint64_t> codes_;
  uint64_t hash_ = 0;
};

namespace detail {

// One CSV record (RFC 4180 quoting: fields may be double-quoted, "" inside
// quotes is a literal quote, quoted fields may span lines). Returns false
// on clean end of input. `line` is the 1-based line counter and is advanced
// past every newline the record consumes.
inline bool read_csv_record(std::istream& is, std::vector<std::string>& fields,
                            std::size_t& line) {
  fields.clear();
  int c = is.get();
  if (c == std::char_traits<char>::eof()) return false;
  std::string cur;
  bool quoted = false;
  for (;;) {
    if (c == std::char_traits<char>::eof()) {
      if (!cur.empty() && !quoted && cur.back() == '\r') cur.pop_back();
      fields.push_back(std::move(cur));
      return true;
    }
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          cur.push_back('"');
          is.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cur.push_back(static_cast<char>(c));
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      ++line;
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      fields.push_back(std::move(cur));
      return true;
    } else {
      cur.push_back(static_cast<char>(c));
    }
    c = is.get();
  }
}

inline double parse_numeric(const std::string& raw, std::size_t line, std::size_t column) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc{} || p != raw.data() + raw.size() || std::isnan(v)) {
    throw std::runtime_error("line " + std::to_string(line) + ": column " +
                             std::to_string(column) + " value \"" + raw +
                             "\" is not numeric");
  }
  return v;
}

}  // namespace detail

// Bits needed for codes 0 .. distinct-1, at least one.
inline uint8_t bits_for_distinct(uint64_t distinct) {
  if (distinct <= 2) return 1;
  return static_cast<uint8_t>(std::bit_width(distinct - 1));
}

// Two passes over the parsed records: collect distinct values per column,
// then freeze dictionaries (numeric codes in value order, categorical in
// first-seen order) and encode every row. Bit budget per column is
// bits_for_distinct(distinct count); the schema constructor rejects totals
// over 128 bits.
inline Table ingest_csv(std::istream& in, const std::vector<ColumnSpec>& specs,
                        bool has_header) {
  if (specs.empty()) throw std::invalid_argument("need at least one column spec");
  const std::size_t m = specs.size();

  std::vector<std::string> names(m);
  for (std::size_t a = 0; a < m; ++a) {
    names[a] = specs[a].name.empty() ? "col" + std::to_string(a) : specs[a].name;
  }

  std::size_t line = 1;
  std::vector<std::string> fields;
  if (has_header) {
    const std::size_t at = line;
    if (!detail::read_csv_record(in, fields, line)) {
      throw std::runtime_error("line " + std::to_string(at) + ": missing header row");
    }
    if (fields.size() != m) {
      throw std::runtime_error("line " + std::to_string(at) + ": header has " +
                               std::to_string(fields.size()) + " columns, expected " +
                               std::to_string(m));
    }
    for (std::size_t a = 0; a < m; ++a) {
      if (specs[a].name.empty() && !fields[a].empty()) names[a] = fields[a];
    }
  }

  struct RawRow {
    std::vector<double> nums;      // numeric columns, by column position
    std::vector<std::string> cats; // categorical columns, by column position
  };
  std::vector<std::size_t> slot(m);  // column -> position inside its kind
  std::size_t num_cols = 0, cat_cols = 0;
  for (std::size_t a = 0; a < m; ++a) {
    slot[a] = specs[a].kind == ColumnKind::kNumeric ? num_cols++ : cat_cols++;
  }

  std::vector<RawRow> raw;
  std::vector<std::map<double, std::string>> num_seen(num_cols);
  std::vector<std::vector<std::string>> cat_seen(cat_cols);
  std::vector<std::unordered_map<std::string, uint64_t>> cat_index(cat_cols);

  for (;;) {
    const std::size_t at = line;
    if (!detail::read_csv_record(in, fields, line)) break;
    if (fields.size() != m) {
      throw std::runtime_error("line " + std::to_string(at) + ": expected " +
                               std::to_string(m) + " columns, got " +
                               std::to_string(fields.size()));
    }
    RawRow r;
    r.nums.resize(num_cols);
    r.cats.resize(cat_cols);
    for (std::size_t a = 0; a < m; ++a) {
      if (specs[a].kind == ColumnKind::kNumeric) {
        const double v = detail::parse_numeric(fields[a], at, a);
        r.nums[slot[a]] = v;
        num_seen[slot[a]].emplace(v, fields[a]);
      } else {
        auto& idx = cat_index[slot[a]];
        if (idx.emplace(fields[a], cat_seen[slot[a]].size()).second) {
          cat_seen[slot[a]].push_back(fields[a]);
        }
        r.cats[slot[a]] = std::move(fields[a]);
      }
    }
    raw.push_back(std::move(r));
  }

  std::vector<Dictionary> dicts;
  std::vector<uint8_t> bits(m);
  std::vector<std::vector<double>> num_values(num_cols);
  std::vector<std::unordered_map<double, uint64_t>> num_index(num_cols);
  for (std::size_t a = 0; a < m; ++a) {
    if (specs[a].kind == ColumnKind::kNumeric) {
      const auto& seen = num_seen[slot[a]];
      std::vector<double> values;
      std::vector<std::string> labels;
      values.reserve(seen.size());
      labels.reserve(seen.size());
      for (const auto& [v, first_text] : seen) {
        num_index[slot[a]][v] = values.size();
        values.push_back(v);
        labels.push_back(first_text);
      }
      num_values[slot[a]] = values;
      bits[a] = bits_for_distinct(values.size());
      dicts.push_back(Dictionary::numeric(std::move(values), std::move(labels)));
    } else {
      bits[a] = bits_for_distinct(cat_seen[slot[a]].size());
      dicts.push_back(Dictionary::categorical(cat_seen[slot[a]]));
    }
  }

  std::vector<uint64_t> codes;
  codes.reserve(raw.size() * m);
  for (const auto& r : raw) {
    for (std::size_t a = 0; a < m; ++a) {
      if (specs[a].kind == ColumnKind::kNumeric) {
        codes.push_back(num_index[slot[a]].at(r.nums[slot[a]]));
      } else {
        codes.push_back(cat_index[slot[a]].at(r.cats[slot[a]]));
      }
    }
  }

  return Table(AttributeSchema(std::move(bits)), std::move(names), std::move(dicts),
               std::move(codes));
}

inline Table ingest_csv_file(const std::string& path, const std::vector<ColumnSpec>& specs,
                             bool has_header) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return ingest_csv(is, specs, has_header);
}

// Ground truth: a full scan comparing dictionary codes attribute by
// attribute. Deliberately ignorant of the interleaved-key machinery.
inline uint64_t oracle_cardinality(const Table& table, const QueryBox& box) {
  if (box.low().size() != table.column_count()) {
    throw std::invalid_argument("box arity does not match table");
  }
  const std::size_t m = table.column_count();
  const auto& codes = table.codes();
  uint64_t card = 0;
  for (std::size_t i = 0; i < codes.size(); i += m) {
    bool in = true;
    for (std::size_t a = 0; a < m; ++a) {
      const uint64_t v = codes[i + a];
      if (v < box.low(a) || v > box.high(a)) {
        in = false;
        break;
      }
    }
    card += in;
  }
  return card;
}

}  // namespace ice

#endif  // ICE_TABLE_HPP_
