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

#ifndef ICE_BINIO_HPP_
#define ICE_BINIO_HPP_

// Little-endian scalar serialization for the on-disk artifacts.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ice::io {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw std::runtime_error("write failed");
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    throw std::runtime_error("unexpected end of stream");
  }
}

template <typename T>
void write_uint(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(os, buf, sizeof(T));
}

template <typename T>
T read_uint(std::istream& is) {
  unsigned char buf[sizeof(T)];
  read_bytes(is, buf, sizeof(T));
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

inline void write_u8(std::ostream& os, uint8_t v) { write_uint<uint8_t>(os, v); }
inline void write_u32(std::ostream& os, uint32_t v) { write_uint<uint32_t>(os, v); }
inline void write_u64(std::ostream& os, uint64_t v) { write_uint<uint64_t>(os, v); }
inline uint8_t read_u8(std::istream& is) { return read_uint<uint8_t>(is); }
inline uint32_t read_u32(std::istream& is) { return read_uint<uint32_t>(is); }
inline uint64_t read_u64(std::istream& is) { return read_uint<uint64_t>(is); }

inline void write_u128(std::ostream& os, unsigned __int128 v) {
  write_u64(os, static_cast<uint64_t>(v));
  write_u64(os, static_cast<uint64_t>(v >> 64));
}

inline unsigned __int128 read_u128(std::istream& is) {
  const uint64_t lo = read_u64(is);
  const uint64_t hi = read_u64(is);
  return (static_cast<unsigned __int128>(hi) << 64) | lo;
}

inline void write_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  write_u64(os, bits);
}

inline double read_f64(std::istream& is) {
  const uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}

inline std::string read_string(std::istream& is) {
  const uint32_t n = read_u32(is);
  std::string s(n, '\0');
  if (n != 0) read_bytes(is, s.data(), n);
  return s;
}

inline void write_magic(std::ostream& os, const char (&tag)[9]) {
  write_bytes(os, tag, 8);
}

inline void expect_magic(std::istream& is, const char (&tag)[9], const char* what) {
  char buf[8];
  read_bytes(is, buf, 8);
  if (std::memcmp(buf, tag, 8) != 0) {
    throw std::runtime_error(std::string(what) + ": bad magic");
  }
}

}  // namespace ice::io

#endif  // ICE_BINIO_HPP_
