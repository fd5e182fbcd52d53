// Copyright 2026 The imsk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian binary record helpers shared by the on-disk formats.

#ifndef IMSK_BINARY_IO_H_
#define IMSK_BINARY_IO_H_

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "imsk/error.h"

namespace imsk::io {

template <typename T>
void WriteLe(std::ostream& os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(bytes.data(), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& is) {
  static_assert(std::is_arithmetic_v<T>);
  std::array<char, sizeof(T)> bytes;
  is.read(bytes.data(), sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    Fail(Errc::kTruncated, "unexpected end of binary stream");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline void WriteMagic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

// Returns false on clean EOF before the first byte; throws on a partial or
// wrong magic.
inline bool ReadMagic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(magic.size()));
  if (is.gcount() == 0 && is.eof()) return false;
  if (got != magic) {
    Fail(Errc::kFormat, "bad magic: expected '" + std::string(magic) + "'");
  }
  return true;
}

inline void WriteString(std::ostream& os, std::string_view s) {
  WriteLe<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream& is) {
  const auto n = ReadLe<uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (is.gcount() != static_cast<std::streamsize>(n)) {
    Fail(Errc::kTruncated, "unexpected end of binary stream in string");
  }
  return s;
}

// 64-bit FNV-1a, used for vocabulary fingerprints.
inline uint64_t Fnv1a64(std::string_view data,
                        uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace imsk::io

#endif  // IMSK_BINARY_IO_H_
