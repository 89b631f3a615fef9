// Copyright 2026 The neuroprune Authors.
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

#include "neuroprune/error.hpp"

namespace neuroprune {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kMissingArtifact: return "missing_artifact";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kCorruptHeader: return "corrupt_header";
    case ErrorKind::kTruncatedBlob: return "truncated_blob";
    case ErrorKind::kSizeMismatch: return "size_mismatch";
    case ErrorKind::kDtypeMismatch: return "dtype_mismatch";
    case ErrorKind::kEndiannessMismatch: return "endianness_mismatch";
    case ErrorKind::kEmptyClass: return "empty_class";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kState: return "state";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace neuroprune
