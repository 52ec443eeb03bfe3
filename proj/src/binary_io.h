// Copyright (c) 2026 The resunet-sv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SV_SRC_BINARY_IO_H_
#define SV_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

#include "sv/error.h"

namespace sv::internal {

// Little-endian encoding of integral and IEEE-754 values independent of the
// host byte order.
template <typename T>
void PutLe(std::ostream& os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  os.write(buf, sizeof(T));
}

// Returns false on a short read.
template <typename T>
bool GetLe(std::istream& is, T* value) {
  static_assert(std::is_arithmetic_v<T>);
  using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<U>(buf[i]) << (8 * i));
  }
  std::memcpy(value, &bits, sizeof(T));
  return true;
}

inline std::ofstream OpenForWrite(const std::string& path,
                                  bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc
                                : std::ios::out | std::ios::trunc);
  if (!os) throw Error(ErrorKind::kIo, "cannot open for writing: " + path);
  return os;
}

inline std::ifstream OpenForRead(const std::string& path,
                                 bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw Error(ErrorKind::kIo, "cannot open: " + path);
  return is;
}

inline void FinishWrite(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + path);
}

}  // namespace sv::internal

#endif  // SV_SRC_BINARY_IO_H_
