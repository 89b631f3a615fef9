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

#ifndef NEUROPRUNE_ARCHITECTURE_HPP_
#define NEUROPRUNE_ARCHITECTURE_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/tensor.hpp"

namespace neuroprune {

enum class LayerKind { kDense, kConv2D, kMaxPool, kFlatten, kRelu, kSoftmax, kDropout };

std::string_view layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  // dense
  std::size_t in = 0;
  std::size_t out = 0;
  // conv2d; maxpool reuses kernel as the window size
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  // dropout
  double rate = 0.0;

  static LayerSpec dense(std::size_t in, std::size_t out);
  static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels,
                          std::size_t kernel, std::size_t stride = 1);
  static LayerSpec maxpool(std::size_t size, std::size_t stride);
  static LayerSpec flatten();
  static LayerSpec relu();
  static LayerSpec softmax();
  static LayerSpec dropout(double rate);

  bool has_params() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv2D;
  }
  std::size_t weight_count() const;
  std::size_t bias_count() const;

  bool operator==(const LayerSpec&) const = default;
};

// Layer list plus the input shape it consumes. Shape inference validates
// adjacency; the terminal-softmax rule is only enforced for full networks.
struct Architecture {
  Shape input_shape;
  std::vector<LayerSpec> layers;

  // shapes()[i] is the input of layer i; shapes().back() is the output.
  std::vector<Shape> shapes() const;

  void validate(bool require_softmax_terminal) const;

  // Flatten and dense layers whose (post-activation) output feeds another
  // dense layer. These are the layers that can be ranked, masked and split.
  std::vector<std::size_t> rankable_layers() const;
  bool is_rankable(std::size_t layer_index) const;

  // Last index of the block that starts at a rankable layer: the layer plus
  // any directly following relu and dropout. Masks apply to its output.
  std::size_t block_end(std::size_t layer_index) const;

  // Number of neurons in a rankable layer.
  std::size_t width(std::size_t layer_index) const;

  bool operator==(const Architecture&) const = default;
};

nlohmann::json to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

}  // namespace neuroprune

#endif  // NEUROPRUNE_ARCHITECTURE_HPP_
