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

#ifndef NEUROPRUNE_MASK_HPP_
#define NEUROPRUNE_MASK_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/architecture.hpp"

namespace neuroprune {

// Binary neuron masks keyed by rankable layer index (1 = active, 0 = pruned).
// Stored as floats so the forward pass can multiply activations directly.
class PruneMask {
 public:
  PruneMask() = default;

  // All-ones masks for every rankable layer of the architecture.
  static PruneMask all_active(const Architecture& arch);

  void add_layer(std::size_t layer_index, std::size_t width);
  bool has_layer(std::size_t layer_index) const { return masks_.count(layer_index) > 0; }
  std::span<const float> layer(std::size_t layer_index) const;
  std::size_t width(std::size_t layer_index) const { return layer(layer_index).size(); }

  void set_active(std::size_t layer_index, std::size_t neuron, bool active);
  bool active(std::size_t layer_index, std::size_t neuron) const;
  std::size_t active_count(std::size_t layer_index) const;
  std::size_t pruned_count(std::size_t layer_index) const;

  // Errors on layers that are not rankable or widths that do not match.
  void validate(const Architecture& arch) const;

  const std::map<std::size_t, std::vector<float>>& layers() const { return masks_; }

  bool operator==(const PruneMask&) const = default;

 private:
  std::vector<float>& mutable_layer(std::size_t layer_index);

  std::map<std::size_t, std::vector<float>> masks_;
};

nlohmann::json to_json(const PruneMask& mask);
PruneMask prune_mask_from_json(const nlohmann::json& j);

}  // namespace neuroprune

#endif  // NEUROPRUNE_MASK_HPP_
