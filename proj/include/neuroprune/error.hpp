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

#ifndef NEUROPRUNE_ERROR_HPP_
#define NEUROPRUNE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace neuroprune {

// Every failure the library reports carries one of these kinds. The values
// are stable: the C API returns them verbatim as status codes.
enum class ErrorKind : int {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kMissingArtifact = 3,
  kIo = 4,
  kCorruptHeader = 5,
  kTruncatedBlob = 6,
  kSizeMismatch = 7,
  kDtypeMismatch = 8,
  kEndiannessMismatch = 9,
  kEmptyClass = 10,
  kNumerical = 11,
  kState = 12,
  kInternal = 13,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace neuroprune

#endif  // NEUROPRUNE_ERROR_HPP_
