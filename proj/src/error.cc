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

#include "sv/error.h"

namespace sv {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kCorruptFile: return "CorruptFile";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kDegenerateNoise: return "DegenerateNoise";
    case ErrorKind::kDegenerateRir: return "DegenerateRir";
    case ErrorKind::kInvalidFactor: return "InvalidFactor";
    case ErrorKind::kIncompletePlan: return "IncompletePlan";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kShape: return "ShapeError";
    case ErrorKind::kDegenerateTime: return "DegenerateTime";
    case ErrorKind::kCheckpointMismatch: return "CheckpointMismatch";
    case ErrorKind::kLabel: return "LabelError";
    case ErrorKind::kNorm: return "NormError";
    case ErrorKind::kEmptyBatch: return "EmptyBatch";
    case ErrorKind::kTooFewPoints: return "TooFewPoints";
    case ErrorKind::kEmptyResult: return "EmptyResult";
    case ErrorKind::kUnknownUtterance: return "UnknownUtterance";
    case ErrorKind::kNotEnoughData: return "NotEnoughData";
    case ErrorKind::kDegenerateLabels: return "DegenerateLabels";
    case ErrorKind::kAlignment: return "AlignmentError";
    case ErrorKind::kEmptyData: return "EmptyData";
  }
  return "Error";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return 2;
    case ErrorKind::kParse:
    case ErrorKind::kDuplicateId:
    case ErrorKind::kUnsupportedFormat:
    case ErrorKind::kFormat:
    case ErrorKind::kCorruptFile:
    case ErrorKind::kConfig:
    case ErrorKind::kCheckpointMismatch:
      return 3;
    default:
      return 4;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace sv
