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

#include "neuroprune/checkpoint.hpp"

#include "neuroprune/io.hpp"

namespace neuroprune {

std::string serialize_checkpoint(const Network& net) {
  require(!net.is_fragment(), ErrorKind::kInvalidArgument,
          "cannot checkpoint a network fragment");
  std::string blob;
  blob.reserve(param_count(net) * sizeof(float));
  for (const auto& p : net.all_params()) {
    append_f32(blob, p.weights);
    append_f32(blob, p.bias);
  }
  nlohmann::json header = {
      {"format", "neuroprune-checkpoint"},
      {"dtype", "f32"},
      {"endianness", "little"},
      {"seed", net.seed()},
      {"architecture", to_json(net.architecture())},
      {"blob_bytes", blob.size()},
      {"metadata", net.metadata()},
  };
  return pack_container(kCheckpointMagic, header, blob);
}

Network deserialize_checkpoint(std::string_view bytes) {
  const Container c = unpack_container(bytes, kCheckpointMagic);
  const nlohmann::json& h = c.header;

  Architecture arch;
  std::uint64_t seed = 0;
  std::size_t blob_bytes = 0;
  try {
    require(h.at("format") == "neuroprune-checkpoint", ErrorKind::kCorruptHeader,
            "corrupt header: not a neuroprune checkpoint");
    const auto dtype = h.at("dtype").get<std::string>();
    require(dtype == "f32", ErrorKind::kDtypeMismatch,
            "dtype mismatch: checkpoint stores '" + dtype + "', expected 'f32'");
    const auto endianness = h.at("endianness").get<std::string>();
    require(endianness == "little", ErrorKind::kEndiannessMismatch,
            "endianness mismatch: checkpoint is '" + endianness + "', expected 'little'");
    seed = h.at("seed").get<std::uint64_t>();
    blob_bytes = h.at("blob_bytes").get<std::size_t>();
    arch = architecture_from_json(h.at("architecture"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kCorruptHeader, std::string("corrupt header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) {
      fail(ErrorKind::kCorruptHeader, std::string("corrupt header: ") + e.what());
    }
    throw;
  }

  require(c.payload.size() >= blob_bytes, ErrorKind::kTruncatedBlob,
          "truncated blob: header declares " + std::to_string(blob_bytes) + " bytes, file has " +
              std::to_string(c.payload.size()));
  require(c.payload.size() == blob_bytes, ErrorKind::kSizeMismatch,
          "size mismatch: " + std::to_string(c.payload.size() - blob_bytes) +
              " trailing bytes after blob");
  const std::size_t expected = param_count(arch) * sizeof(float);
  require(expected == blob_bytes, ErrorKind::kSizeMismatch,
          "size mismatch: architecture needs " + std::to_string(expected) +
              " blob bytes, header declares " + std::to_string(blob_bytes));
  try {
    arch.validate(/*require_softmax_terminal=*/true);
  } catch (const Error& e) {
    fail(ErrorKind::kCorruptHeader, std::string("corrupt header: ") + e.what());
  }

  std::vector<LayerParams<float>> params(arch.layers.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& spec = arch.layers[i];
    params[i].weights.resize(spec.weight_count());
    params[i].bias.resize(spec.bias_count());
    read_f32(c.payload.substr(offset), params[i].weights);
    offset += params[i].weights.size() * sizeof(float);
    read_f32(c.payload.substr(offset), params[i].bias);
    offset += params[i].bias.size() * sizeof(float);
  }

  Network net(std::move(arch), seed, std::move(params));
  if (h.contains("metadata")) net.metadata() = h.at("metadata");
  return net;
}

void save(const Network& net, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(net));
}

Network load(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace neuroprune
