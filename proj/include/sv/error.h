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

#ifndef SV_ERROR_H_
#define SV_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace sv {

enum class ErrorKind {
  kIo,
  kParse,
  kDuplicateId,
  kUnsupportedFormat,
  kFormat,
  kCorruptFile,
  kTooShort,
  kDegenerateNoise,
  kDegenerateRir,
  kInvalidFactor,
  kIncompletePlan,
  kConfig,
  kShape,
  kDegenerateTime,
  kCheckpointMismatch,
  kLabel,
  kNorm,
  kEmptyBatch,
  kTooFewPoints,
  kEmptyResult,
  kUnknownUtterance,
  kNotEnoughData,
  kDegenerateLabels,
  kAlignment,
  kEmptyData,
};

std::string_view ErrorKindName(ErrorKind kind);

// Process exit code for the command-line tool: 2 I/O, 3 format/config,
// 4 data/precondition.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sv

#endif  // SV_ERROR_H_
