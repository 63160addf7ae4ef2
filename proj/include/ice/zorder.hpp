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

#ifndef ICE_ZORDER_HPP_
#define ICE_ZORDER_HPP_

// Z-order (Morton) codec over per-attribute bit budgets, plus the BIGMIN /
// LITMAX jump primitives used to skip dead stretches of the curve during
// range scans. See https://en.wikipedia.org/wiki/Z-order_curve for the
// classic treatment of both.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ice {

// Interleaved key. 128 bits caps the total per-row bit budget.
using ZKey = unsigned __int128;

constexpr std::size_t kMaxKeyBits = 128;

inline std::string zkey_to_string(ZKey v) {
  if (v == 0) return "0";
  std::string out;
  while (v != 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return out;
}

// Bit layout of the interleaving. Round-robin over attributes, most
// significant bit of every attribute first, attribute 0 first within a
// round; attributes whose bits are exhausted drop out of later rounds.
// Attribute values are dictionary codes in [0, 2^bits).
class AttributeSchema {
 public:
  AttributeSchema() = default;

  explicit AttributeSchema(std::vector<uint8_t> bit_widths)
      : bits_(std::move(bit_widths)) {
    if (bits_.empty()) throw std::invalid_argument("schema needs at least one attribute");
    std::size_t total = 0;
    std::size_t rounds = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] == 0) {
        throw std::invalid_argument("attribute " + std::to_string(i) + " has zero bits");
      }
      total += bits_[i];
      rounds = std::max<std::size_t>(rounds, bits_[i]);
    }
    if (total > kMaxKeyBits) {
      throw std::invalid_argument("total bit budget " + std::to_string(total) +
                                  " exceeds " + std::to_string(kMaxKeyBits));
    }
    total_bits_ = static_cast<uint32_t>(total);

    zpos_.resize(bits_.size());
    masks_.assign(bits_.size(), 0);
    owner_.assign(total_bits_, 0);
    // Walk rounds from the most significant interleave round down; the next
    // unassigned slot is always the highest remaining z bit.
    uint32_t slot = total_bits_;
    for (std::size_t round = 0; round < rounds; ++round) {
      for (std::size_t a = 0; a < bits_.size(); ++a) {
        if (round >= bits_[a]) continue;  // attribute exhausted
        --slot;
        zpos_[a].push_back(static_cast<uint8_t>(slot));
        masks_[a] |= ZKey(1) << slot;
        owner_[slot] = static_cast<uint8_t>(a);
      }
    }
  }

  std::size_t attribute_count() const { return bits_.size(); }
  uint32_t bits(std::size_t attr) const { return bits_[attr]; }
  uint32_t total_bits() const { return total_bits_; }
  // Number of representable codes for one attribute.
  uint64_t domain_size(std::size_t attr) const {
    return bits_[attr] >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits_[attr]);
  }
  // Every z-bit position belonging to `attr`.
  ZKey attribute_mask(std::size_t attr) const { return masks_[attr]; }
  // Which attribute owns z-bit `pos`.
  std::size_t bit_owner(uint32_t pos) const { return owner_[pos]; }
  ZKey max_key() const {
    return total_bits_ == kMaxKeyBits ? ~ZKey(0) : (ZKey(1) << total_bits_) - 1;
  }

  ZKey encode(std::span<const uint64_t> values) const {
    if (values.size() != bits_.size()) {
      throw std::invalid_argument("expected " + std::to_string(bits_.size()) +
                                  " values, got " + std::to_string(values.size()));
    }
    ZKey key = 0;
    for (std::size_t a = 0; a < bits_.size(); ++a) {
      const uint64_t v = values[a];
      if (bits_[a] < 64 && v >= (uint64_t{1} << bits_[a])) {
        throw std::domain_error("attribute " + std::to_string(a) + " value " +
                                std::to_string(v) + " exceeds its " +
                                std::to_string(bits_[a]) + "-bit domain");
      }
      const auto& pos = zpos_[a];
      for (std::size_t j = 0; j < pos.size(); ++j) {
        // j = 0 is the attribute's most significant bit.
        if ((v >> (bits_[a] - 1 - j)) & 1) key |= ZKey(1) << pos[j];
      }
    }
    return key;
  }

  void decode(ZKey key, std::span<uint64_t> out) const {
    if (out.size() != bits_.size()) throw std::invalid_argument("bad output arity");
    for (std::size_t a = 0; a < bits_.size(); ++a) {
      out[a] = extract(key, a);
    }
  }

  std::vector<uint64_t> decode(ZKey key) const {
    std::vector<uint64_t> out(bits_.size());
    decode(key, std::span<uint64_t>(out));
    return out;
  }

  // Attribute value embedded in `key`, without touching the other attributes.
  uint64_t extract(ZKey key, std::size_t attr) const {
    const auto& pos = zpos_[attr];
    uint64_t v = 0;
    for (std::size_t j = 0; j < pos.size(); ++j) {
      v = (v << 1) | static_cast<uint64_t>((key >> pos[j]) & 1);
    }
    return v;
  }

  bool operator==(const AttributeSchema& other) const { return bits_ == other.bits_; }

 private:
  std::vector<uint8_t> bits_;
  uint32_t total_bits_ = 0;
  std::vector<std::vector<uint8_t>> zpos_;  // zpos_[a][j]: z slot of attr a's j-th MSB
  std::vector<ZKey> masks_;
  std::vector<uint8_t> owner_;
};

// Axis-aligned box of dictionary codes, inclusive on both ends. Keeps the
// interleaved corner keys cached; holds a pointer to the schema, which must
// outlive the box.
class QueryBox {
 public:
  QueryBox(const AttributeSchema& schema, std::vector<uint64_t> low,
           std::vector<uint64_t> high)
      : schema_(&schema), low_(std::move(low)), high_(std::move(high)) {
    if (low_.size() != schema.attribute_count() || high_.size() != low_.size()) {
      throw std::invalid_argument("box arity does not match schema");
    }
    for (std::size_t a = 0; a < low_.size(); ++a) {
      if (low_[a] > high_[a]) {
        throw std::invalid_argument("attribute " + std::to_string(a) +
                                    " has low > high");
      }
    }
    z_low_ = schema.encode(low_);
    z_up_ = schema.encode(high_);
  }

  const AttributeSchema& schema() const { return *schema_; }
  const std::vector<uint64_t>& low() const { return low_; }
  const std::vector<uint64_t>& high() const { return high_; }
  uint64_t low(std::size_t a) const { return low_[a]; }
  uint64_t high(std::size_t a) const { return high_[a]; }
  // Interleaved corner keys; z_low() <= z_up() always holds.
  ZKey z_low() const { return z_low_; }
  ZKey z_up() const { return z_up_; }

  bool contains(ZKey key) const {
    for (std::size_t a = 0; a < low_.size(); ++a) {
      const uint64_t v = schema_->extract(key, a);
      if (v < low_[a] || v > high_[a]) return false;
    }
    return true;
  }

 private:
  const AttributeSchema* schema_;
  std::vector<uint64_t> low_, high_;
  ZKey z_low_ = 0, z_up_ = 0;
};

namespace detail {

// "LOAD 1000..." / "LOAD 0111..." on the bits one attribute owns below and
// at position `pos`; the other attributes' bits pass through untouched.
inline ZKey load_one_zeros(ZKey v, uint32_t pos, ZKey attr_mask) {
  const ZKey bit = ZKey(1) << pos;
  const ZKey below = attr_mask & (bit - 1);
  return (v | bit) & ~below;
}

inline ZKey load_zero_ones(ZKey v, uint32_t pos, ZKey attr_mask) {
  const ZKey bit = ZKey(1) << pos;
  const ZKey below = attr_mask & (bit - 1);
  return (v & ~bit) | below;
}

}  // namespace detail

// Smallest key strictly greater than `p` that lies inside `box`, walking the
// interleaved bits from the top (Tropf/Herzog). Empty optional when no box
// point lies above p.
inline std::optional<ZKey> get_bigmin(ZKey p, const QueryBox& box) {
  const AttributeSchema& schema = box.schema();
  ZKey zmin = box.z_low();
  ZKey zmax = box.z_up();
  std::optional<ZKey> bigmin;
  for (uint32_t i = schema.total_bits(); i-- > 0;) {
    const unsigned bits = (static_cast<unsigned>((p >> i) & 1) << 2) |
                          (static_cast<unsigned>((zmin >> i) & 1) << 1) |
                          static_cast<unsigned>((zmax >> i) & 1);
    const ZKey mask = schema.attribute_mask(schema.bit_owner(i));
    switch (bits) {
      case 0b000:
        break;
      case 0b001:
        bigmin = detail::load_one_zeros(zmin, i, mask);
        zmax = detail::load_zero_ones(zmax, i, mask);
        break;
      case 0b011:
        return zmin;  // p below the whole remaining box
      case 0b100:
        return bigmin;  // p above the whole remaining box
      case 0b101:
        zmin = detail::load_one_zeros(zmin, i, mask);
        break;
      case 0b111:
        break;
      default:
        // 010 / 110 would need zmin > zmax in this subspace.
        throw std::logic_error("corner keys out of order");
    }
  }
  // p itself lies inside the box: the successor within the box, if any, was
  // recorded on the way down.
  return bigmin;
}

// Mirror image: largest key strictly smaller than `p` inside `box`.
inline std::optional<ZKey> get_litmax(ZKey p, const QueryBox& box) {
  const AttributeSchema& schema = box.schema();
  ZKey zmin = box.z_low();
  ZKey zmax = box.z_up();
  std::optional<ZKey> litmax;
  for (uint32_t i = schema.total_bits(); i-- > 0;) {
    const unsigned bits = (static_cast<unsigned>((p >> i) & 1) << 2) |
                          (static_cast<unsigned>((zmin >> i) & 1) << 1) |
                          static_cast<unsigned>((zmax >> i) & 1);
    const ZKey mask = schema.attribute_mask(schema.bit_owner(i));
    switch (bits) {
      case 0b000:
        break;
      case 0b001:
        zmax = detail::load_zero_ones(zmax, i, mask);
        break;
      case 0b011:
        return litmax;  // p below the whole remaining box
      case 0b100:
        return zmax;  // p above the whole remaining box
      case 0b101:
        litmax = detail::load_zero_ones(zmax, i, mask);
        zmin = detail::load_one_zeros(zmin, i, mask);
        break;
      case 0b111:
        break;
      default:
        throw std::logic_error("corner keys out of order");
    }
  }
  return litmax;
}

}  // namespace ice

#endif  // ICE_ZORDER_HPP_
