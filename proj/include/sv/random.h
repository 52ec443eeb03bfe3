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

#ifndef SV_RANDOM_H_
#define SV_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace sv {

using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit.
inline std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key) {
  return SplitMix64(seed ^ SplitMix64(HashString(key)));
}

// Per-utterance seed: hash(global_seed, utterance_id, kind).
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view id,
                                std::string_view kind) {
  return DeriveSeed(DeriveSeed(seed, id), kind);
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(seed ^ SplitMix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace sv

#endif  // SV_RANDOM_H_
