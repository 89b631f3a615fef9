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

#ifndef NEUROPRUNE_IO_HPP_
#define NEUROPRUNE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace neuroprune {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target, so a
// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Fixed-point text with `decimals` digits; locale independent.
std::string format_fixed(double value, int decimals);

// Binary container shared by checkpoints and dataset files:
//   magic | compact JSON header | "\n\0" | payload
std::string pack_container(std::string_view magic, const nlohmann::json& header,
                           std::string_view payload);

struct Container {
  nlohmann::json header;
  std::string_view payload;  // view into the bytes passed to unpack_container
};

// Throws kCorruptHeader when the magic or header is malformed.
Container unpack_container(std::string_view bytes, std::string_view magic);

// Little-endian float32/uint32/float64 (de)serialization.
void append_f32(std::string& out, std::span<const float> values);
void append_f64(std::string& out, std::span<const double> values);
void append_u32(std::string& out, std::span<const std::uint32_t> values);
void read_f32(std::string_view bytes, std::span<float> values);
void read_f64(std::string_view bytes, std::span<double> values);
void read_u32(std::string_view bytes, std::span<std::uint32_t> values);

}  // namespace neuroprune

#endif  // NEUROPRUNE_IO_HPP_
