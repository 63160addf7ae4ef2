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

#ifndef ICE_SYNTHETIC_HPP_
#define ICE_SYNTHETIC_HPP_

// Deterministic synthetic datasets for benchmarks: Gaussian cluster
// mixtures, a correlated diagonal band, and per-column zipfian draws.
// All emit identity-coded tables (codes are the values).

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ice/table.hpp"

namespace ice {

namespace detail {

inline uint64_t clamp_code(double v, uint64_t domain) {
  if (v < 0.0) return 0;
  const double hi = static_cast<double>(domain - 1);
  if (v > hi) return domain - 1;
  return static_cast<uint64_t>(std::llround(v));
}

}  // namespace detail

// Mixture of Gaussian blobs. Every other cluster center is snapped near a
// halving boundary of each attribute's domain (dom/2, dom/4, 3*dom/4), so
// the blob straddles a high-order bit flip; those are the regions where a
// shallow curve decomposition covers far more of the key space than the
// box itself.
inline Table make_clustered_table(std::size_t rows, const std::vector<uint8_t>& bits,
                                  std::size_t clusters, double spread_frac,
                                  uint64_t seed) {
  if (clusters == 0) throw std::invalid_argument("need at least one cluster");
  AttributeSchema schema{bits};
  const std::size_t m = schema.attribute_count();
  std::mt19937_64 rng(seed);

  std::vector<std::vector<double>> centers(clusters, std::vector<double>(m));
  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t a = 0; a < m; ++a) {
      const double dom = static_cast<double>(schema.domain_size(a));
      if (c % 2 == 0) {
        const double anchors[3] = {dom / 2.0, dom / 4.0, 3.0 * dom / 4.0};
        const double anchor = anchors[rng() % 3];
        std::uniform_real_distribution<double> jitter(-dom / 64.0, dom / 64.0);
        centers[c][a] = anchor + jitter(rng);
      } else {
        std::uniform_real_distribution<double> u(0.0, dom - 1.0);
        centers[c][a] = u(rng);
      }
    }
  }

  std::vector<uint64_t> codes;
  codes.reserve(rows * m);
  std::uniform_int_distribution<std::size_t> pick(0, clusters - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& center = centers[pick(rng)];
    for (std::size_t a = 0; a < m; ++a) {
      const double dom = static_cast<double>(schema.domain_size(a));
      std::normal_distribution<double> n(center[a], std::max(1.0, spread_frac * dom));
      codes.push_back(detail::clamp_code(n(rng), schema.domain_size(a)));
    }
  }
  return Table::from_codes(bits, std::move(codes));
}

// Diagonal band: one latent uniform draw per row, every attribute tracks it
// up to Gaussian noise. Strong positive correlation across all columns.
inline Table make_correlated_table(std::size_t rows, const std::vector<uint8_t>& bits,
                                   double noise_frac, uint64_t seed) {
  AttributeSchema schema{bits};
  const std::size_t m = schema.attribute_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<uint64_t> codes;
  codes.reserve(rows * m);
  for (std::size_t i = 0; i < rows; ++i) {
    const double t = u(rng);
    for (std::size_t a = 0; a < m; ++a) {
      const double dom = static_cast<double>(schema.domain_size(a));
      std::normal_distribution<double> n(t * (dom - 1.0), noise_frac * dom);
      codes.push_back(detail::clamp_code(n(rng), schema.domain_size(a)));
    }
  }
  return Table::from_codes(bits, std::move(codes));
}

// Independent zipfian columns: code r drawn with weight 1/(r+1)^skew, so
// the mass piles up at the low end of every domain.
inline Table make_zipfian_table(std::size_t rows, const std::vector<uint8_t>& bits,
                                double skew, uint64_t seed) {
  AttributeSchema schema{bits};
  const std::size_t m = schema.attribute_count();
  std::mt19937_64 rng(seed);

  std::vector<std::discrete_distribution<uint64_t>> dists;
  dists.reserve(m);
  for (std::size_t a = 0; a < m; ++a) {
    const uint64_t dom = schema.domain_size(a);
    std::vector<double> w(dom);
    for (uint64_t r = 0; r < dom; ++r) {
      w[r] = 1.0 / std::pow(static_cast<double>(r + 1), skew);
    }
    dists.emplace_back(w.begin(), w.end());
  }

  std::vector<uint64_t> codes;
  codes.reserve(rows * m);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t a = 0; a < m; ++a) codes.push_back(dists[a](rng));
  }
  return Table::from_codes(bits, std::move(codes));
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline void write_csv(const Table& table, std::ostream& os, bool header) {
  const std::size_t m = table.column_count();
  if (header) {
    for (std::size_t a = 0; a < m; ++a) {
      if (a != 0) os << ',';
      os << csv_quote(table.column_name(a));
    }
    os << '\n';
  }
  for (std::size_t i = 0; i < table.row_count(); ++i) {
    const auto row = table.row(i);
    for (std::size_t a = 0; a < m; ++a) {
      if (a != 0) os << ',';
      os << csv_quote(table.dictionary(a).label(row[a]));
    }
    os << '\n';
  }
}

}  // namespace ice

#endif  // ICE_SYNTHETIC_HPP_
