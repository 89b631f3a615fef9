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

#ifndef NEUROPRUNE_CHECKPOINT_HPP_
#define NEUROPRUNE_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "neuroprune/network.hpp"

namespace neuroprune {

// Checkpoint layout:
//   "NPRN1\n" | JSON header | "\n\0" | little-endian f32 blob
// The header records the architecture, seed, dtype, endianness, blob length
// and training metadata. The blob holds weights then bias for every
// parameterized layer, in layer order.
inline constexpr std::string_view kCheckpointMagic = "NPRN1\n";

std::string serialize_checkpoint(const Network& net);

// Distinct error kinds: kCorruptHeader, kTruncatedBlob, kSizeMismatch,
// kDtypeMismatch, kEndiannessMismatch.
Network deserialize_checkpoint(std::string_view bytes);

void save(const Network& net, const std::filesystem::path& path);
Network load(const std::filesystem::path& path);

}  // namespace neuroprune

#endif  // NEUROPRUNE_CHECKPOINT_HPP_
