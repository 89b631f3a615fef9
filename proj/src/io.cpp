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

#include "neuroprune/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "neuroprune/error.hpp"

namespace neuroprune {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <class U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      r = static_cast<U>((r << 8) | ((v >> (8 * i)) & 0xff));
    }
    return r;
  } else {
    return v;
  }
}

template <class V, class U>
void append_le(std::string& out, std::span<const V> values) {
  static_assert(sizeof(V) == sizeof(U));
  const std::size_t start = out.size();
  out.resize(start + values.size() * sizeof(V));
  char* dst = out.data() + start;
  for (const V& v : values) {
    U bits = byteswap_if_big(std::bit_cast<U>(v));
    std::memcpy(dst, &bits, sizeof(U));
    dst += sizeof(U);
  }
}

template <class V, class U>
void read_le(std::string_view bytes, std::span<V> values) {
  require(bytes.size() >= values.size() * sizeof(V), ErrorKind::kTruncatedBlob,
          "truncated blob: need " + std::to_string(values.size() * sizeof(V)) +
              " bytes, have " + std::to_string(bytes.size()));
  const char* src = bytes.data();
  for (V& v : values) {
    U bits;
    std::memcpy(&bits, src, sizeof(U));
    v = std::bit_cast<V>(byteswap_if_big(bits));
    src += sizeof(U);
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kMissingArtifact, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrorKind::kIo, "error reading '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::kIo, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    require(out.good(), ErrorKind::kIo, "error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::kIo, "cannot rename '" + tmp.string() + "': " + ec.message());
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(),
                     nullptr) == 1,
          ErrorKind::kInternal, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string format_double(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) return format_double(value);
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, decimals);
  std::string s(buf.data(), end);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string pack_container(std::string_view magic, const nlohmann::json& header,
                           std::string_view payload) {
  std::string out(magic);
  out += header.dump();
  out.push_back('\n');
  out.push_back('\0');
  out.append(payload);
  return out;
}

Container unpack_container(std::string_view bytes, std::string_view magic) {
  require(bytes.substr(0, magic.size()) == magic, ErrorKind::kCorruptHeader,
          "corrupt header: bad magic bytes");
  const std::string_view rest = bytes.substr(magic.size());
  const std::size_t sep = rest.find(std::string_view("\n\0", 2));
  require(sep != std::string_view::npos, ErrorKind::kCorruptHeader,
          "corrupt header: missing header terminator");
  Container c;
  try {
    c.header = nlohmann::json::parse(rest.substr(0, sep));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kCorruptHeader, std::string("corrupt header: ") + e.what());
  }
  require(c.header.is_object(), ErrorKind::kCorruptHeader,
          "corrupt header: header is not a JSON object");
  c.payload = rest.substr(sep + 2);
  return c;
}

void append_f32(std::string& out, std::span<const float> values) {
  append_le<float, std::uint32_t>(out, values);
}
void append_f64(std::string& out, std::span<const double> values) {
  append_le<double, std::uint64_t>(out, values);
}
void append_u32(std::string& out, std::span<const std::uint32_t> values) {
  append_le<std::uint32_t, std::uint32_t>(out, values);
}
void read_f32(std::string_view bytes, std::span<float> values) {
  read_le<float, std::uint32_t>(bytes, values);
}
void read_f64(std::string_view bytes, std::span<double> values) {
  read_le<double, std::uint64_t>(bytes, values);
}
void read_u32(std::string_view bytes, std::span<std::uint32_t> values) {
  read_le<std::uint32_t, std::uint32_t>(bytes, values);
}

}  // namespace neuroprune
