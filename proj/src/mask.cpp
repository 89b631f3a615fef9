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

#include "neuroprune/mask.hpp"

#include <algorithm>
#include <string>

namespace neuroprune {

PruneMask PruneMask::all_active(const Architecture& arch) {
  PruneMask mask;
  const auto shapes = arch.shapes();
  for (std::size_t layer : arch.rankable_layers()) {
    mask.add_layer(layer, shape_size(shapes[layer + 1]));
  }
  return mask;
}

void PruneMask::add_layer(std::size_t layer_index, std::size_t width) {
  masks_[layer_index].assign(width, 1.0f);
}

std::span<const float> PruneMask::layer(std::size_t layer_index) const {
  auto it = masks_.find(layer_index);
  require(it != masks_.end(), ErrorKind::kInvalidArgument,
          "mask has no entry for layer " + std::to_string(layer_index));
  return it->second;
}

std::vector<float>& PruneMask::mutable_layer(std::size_t layer_index) {
  auto it = masks_.find(layer_index);
  require(it != masks_.end(), ErrorKind::kInvalidArgument,
          "mask has no entry for layer " + std::to_string(layer_index));
  return it->second;
}

void PruneMask::set_active(std::size_t layer_index, std::size_t neuron, bool active) {
  auto& values = mutable_layer(layer_index);
  require(neuron < values.size(), ErrorKind::kInvalidArgument,
          "neuron " + std::to_string(neuron) + " out of range for layer " +
              std::to_string(layer_index) + " of width " + std::to_string(values.size()));
  values[neuron] = active ? 1.0f : 0.0f;
}

bool PruneMask::active(std::size_t layer_index, std::size_t neuron) const {
  const auto values = layer(layer_index);
  require(neuron < values.size(), ErrorKind::kInvalidArgument,
          "neuron " + std::to_string(neuron) + " out of range");
  return values[neuron] != 0.0f;
}

std::size_t PruneMask::active_count(std::size_t layer_index) const {
  const auto values = layer(layer_index);
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](float v) { return v != 0.0f; }));
}

std::size_t PruneMask::pruned_count(std::size_t layer_index) const {
  return width(layer_index) - active_count(layer_index);
}

void PruneMask::validate(const Architecture& arch) const {
  const auto shapes = arch.shapes();
  for (const auto& [layer, values] : masks_) {
    require(arch.is_rankable(layer), ErrorKind::kShapeMismatch,
            "mask layer " + std::to_string(layer) +
                " is not a rankable (flatten or hidden dense) layer");
    const std::size_t width = shape_size(shapes[layer + 1]);
    require(values.size() == width, ErrorKind::kShapeMismatch,
            "mask for layer " + std::to_string(layer) + " has length " +
                std::to_string(values.size()) + ", layer width is " + std::to_string(width));
  }
}

nlohmann::json to_json(const PruneMask& mask) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& [layer, values] : mask.layers()) {
    std::vector<int> bits(values.size());
    std::transform(values.begin(), values.end(), bits.begin(),
                   [](float v) { return v != 0.0f ? 1 : 0; });
    layers.push_back({{"layer", layer}, {"mask", bits}});
  }
  return {{"layers", layers}};
}

PruneMask prune_mask_from_json(const nlohmann::json& j) {
  PruneMask mask;
  try {
    for (const auto& entry : j.at("layers")) {
      const auto layer = entry.at("layer").get<std::size_t>();
      const auto bits = entry.at("mask").get<std::vector<int>>();
      mask.add_layer(layer, bits.size());
      for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == 0) mask.set_active(layer, i, false);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid mask document: ") + e.what());
  }
  return mask;
}

}  // namespace neuroprune
