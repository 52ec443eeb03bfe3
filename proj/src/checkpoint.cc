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

#include <cstring>
#include <fstream>
#include <string>

#include "binary_io.h"
#include "sv/error.h"
#include "sv/resunet.h"

namespace sv {

using internal::GetLe;
using internal::PutLe;

namespace {
constexpr char kMagic[4] = {'R', 'U', 'N', '1'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

void SaveCheckpoint(const ResUnet& network, const std::string& path) {
  auto os = internal::OpenForWrite(path, true);
  const ResUnetConfig& c = network.config();
  os.write(kMagic, 4);
  PutLe<std::uint16_t>(os, kVersion);
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(c.residual_blocks));
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(c.base_channels));
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(c.embed_dim));
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(c.se_reduction));
  for (const Param* p : network.Parameters()) {
    PutLe<std::uint16_t>(os, static_cast<std::uint16_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    PutLe<std::uint8_t>(os, static_cast<std::uint8_t>(p->shape.size()));
    for (int d : p->shape) PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (float v : p->values) PutLe<float>(os, v);
  }
  internal::FinishWrite(os, path);
}

ResUnet LoadCheckpoint(const std::string& path, const ResUnetConfig& config) {
  auto is = internal::OpenForRead(path, true);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorKind::kFormat, "bad checkpoint magic in " + path);
  }
  std::uint16_t version = 0;
  std::uint32_t depth = 0, channels = 0, embed_dim = 0, reduction = 0;
  if (!GetLe(is, &version) || version != kVersion || !GetLe(is, &depth) ||
      !GetLe(is, &channels) || !GetLe(is, &embed_dim) ||
      !GetLe(is, &reduction)) {
    throw Error(ErrorKind::kFormat, "bad checkpoint header in " + path);
  }
  if (static_cast<int>(depth) != config.residual_blocks ||
      static_cast<int>(channels) != config.base_channels ||
      static_cast<int>(embed_dim) != config.embed_dim ||
      static_cast<int>(reduction) != config.se_reduction) {
    throw Error(ErrorKind::kCheckpointMismatch,
                path + " stores depth " + std::to_string(depth) + ", channels " +
                    std::to_string(channels) + ", embed_dim " +
                    std::to_string(embed_dim) + ", se_reduction " +
                    std::to_string(reduction) + "; config asks for depth " +
                    std::to_string(config.residual_blocks));
  }
  ResUnet net = ResUnet::Build(config, 0);
  for (Param* p : net.Parameters()) {
    std::uint16_t len = 0;
    if (!GetLe(is, &len)) {
      throw Error(ErrorKind::kCheckpointMismatch,
                  path + ": missing tensor " + p->name);
    }
    std::string name(len, '\0');
    std::uint8_t rank = 0;
    if (!is.read(name.data(), len) || !GetLe(is, &rank)) {
      throw Error(ErrorKind::kCorruptFile, path + ": truncated tensor header");
    }
    std::vector<int> shape(rank);
    for (int& d : shape) {
      std::uint32_t v = 0;
      if (!GetLe(is, &v)) {
        throw Error(ErrorKind::kCorruptFile, path + ": truncated tensor shape");
      }
      d = static_cast<int>(v);
    }
    if (name != p->name || shape != p->shape) {
      throw Error(ErrorKind::kCheckpointMismatch,
                  path + ": tensor " + name + " does not match " + p->name);
    }
    for (float& v : p->values) {
      if (!GetLe(is, &v)) {
        throw Error(ErrorKind::kCorruptFile, path + ": truncated tensor " + name);
      }
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::kCheckpointMismatch,
                path + ": extra tensors beyond the configured network");
  }
  return net;
}

}  // namespace sv
