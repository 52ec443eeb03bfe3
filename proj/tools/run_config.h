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

#ifndef SV_TOOLS_RUN_CONFIG_H_
#define SV_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <string>

#include "sv/backend.h"
#include "sv/dsp.h"
#include "sv/pipeline.h"
#include "sv/resunet.h"
#include "sv/synthetic.h"

namespace sv::cli {

// Environment variable naming the default config file.
inline constexpr char kConfigEnvVar[] = "RESUNET_SV_CONFIG";

struct Paths {
  std::string manifest;
  std::string features;
  std::string embeddings;
  std::string trials;
  std::string validation_trials;
  std::string checkpoint;
  std::string output_dir;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  Paths paths;
  FbankConfig fbank;
  ResUnetConfig resunet;
  PipelineConfig pipeline;  // also holds the phase configs and DcfParams
  CalibrationOptions calibration;
  SyntheticOptions synthetic;

  // Copies seed and workers into the pipeline and synthetic sections and
  // validates every section. Throws ConfigError.
  void Finalize();
};

// Built-in scenario behind `adapt --synthetic-demo`.
RunConfig SyntheticDemoDefaults();

// Applies a TOML-style file on top of `config`. Top-level keys: seed,
// workers, track (resets both phase sections to that track's published
// values before other keys apply). Sections: [paths], [fbank], [resunet],
// [stage1], [adaptation], [pipeline], [dcf], [calibration], [synthetic],
// with keys named after the struct fields. Unknown keys and malformed values
// throw ConfigError; an unreadable file throws IoError.
void ApplyConfigFile(const std::string& path, RunConfig* config);

}  // namespace sv::cli

#endif  // SV_TOOLS_RUN_CONFIG_H_
