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

#ifndef NEUROPRUNE_NETWORK_HPP_
#define NEUROPRUNE_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/architecture.hpp"
#include "neuroprune/mask.hpp"
#include "neuroprune/tensor.hpp"

namespace neuroprune {

template <class T>
struct LayerParams {
  std::vector<T> weights;  // dense: [out x in]; conv2d: [out_ch x in_ch x k x k]
  std::vector<T> bias;

  bool operator==(const LayerParams&) const = default;
};

// Sequential feed-forward network. The float instantiation is the trained
// model; the double instantiation is a widened copy used where quadrature
// sums need the extra precision.
//
// A network built from an Architecture must end in its only softmax layer.
// Fragments produced by split_at/slice keep the layer indices of the network
// they were cut from, so masks keyed by global layer index still apply.
template <class T>
class BasicNetwork {
 public:
  static constexpr std::size_t kNoMaskSlot = std::numeric_limits<std::size_t>::max();

  BasicNetwork() = default;

  // Seeded scaled-uniform initialization: weights ~ U(-sqrt(6/fan_in),
  // sqrt(6/fan_in)) for dense and conv2d layers, biases zero. Each layer
  // draws from its own stream derived from (seed, layer index).
  BasicNetwork(Architecture arch, std::uint64_t seed);

  // Full network with externally supplied parameters (checkpoint loading).
  BasicNetwork(Architecture arch, std::uint64_t seed, std::vector<LayerParams<T>> params);

  const Architecture& architecture() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_layers() const { return arch_.layers.size(); }
  const LayerSpec& layer(std::size_t local) const { return arch_.layers[local]; }

  // Shape entering local layer i; shape(num_layers()) is the output shape.
  const Shape& shape(std::size_t local) const { return shapes_[local]; }
  std::size_t input_size() const { return shape_size(shapes_.front()); }
  std::size_t output_size() const { return shape_size(shapes_.back()); }

  LayerParams<T>& params(std::size_t local) { return params_[local]; }
  const LayerParams<T>& params(std::size_t local) const { return params_[local]; }
  const std::vector<LayerParams<T>>& all_params() const { return params_; }

  // Global index (in the originating full network) of local layer i.
  std::size_t global_index(std::size_t local) const { return offset_ + local; }
  bool is_fragment() const { return fragment_; }

  // Global rankable-layer index whose mask is applied to the output of local
  // layer i, or kNoMaskSlot.
  std::size_t mask_slot(std::size_t local) const { return mask_slots_[local]; }

  // Layers [begin, end) as a fragment sharing copies of the weights.
  BasicNetwork slice(std::size_t begin, std::size_t end) const;

  template <class U>
  BasicNetwork<U> cast() const;

  // Free-form training metadata persisted with checkpoints.
  nlohmann::json& metadata() { return metadata_; }
  const nlohmann::json& metadata() const { return metadata_; }

  bool same_weights(const BasicNetwork& other) const {
    return arch_ == other.arch_ && params_ == other.params_;
  }

 private:
  template <class>
  friend class BasicNetwork;

  void finish_construction();

  Architecture arch_;
  std::vector<Shape> shapes_;
  std::vector<LayerParams<T>> params_;
  std::vector<std::size_t> mask_slots_;
  std::uint64_t seed_ = 0;
  std::size_t offset_ = 0;
  bool fragment_ = false;
  nlohmann::json metadata_ = nlohmann::json::object();
};

using Network = BasicNetwork<float>;

struct ForwardOptions {
  // Dropout is inverted dropout when training and identity otherwise.
  bool training = false;
  std::uint64_t dropout_seed = 0;
  const PruneMask* masks = nullptr;
};

// Activations retained by a forward pass for the matching backward pass.
template <class T>
struct ForwardCache {
  std::size_t begin = 0;
  std::size_t end = 0;
  // acts[i - begin] is the input of local layer i; acts.back() the output.
  std::vector<std::vector<T>> acts;
  std::vector<std::vector<std::uint32_t>> pool_argmax;
  std::vector<std::vector<T>> dropout_scale;
  std::vector<std::span<const float>> masks;

  bool valid() const { return !acts.empty(); }
  void clear() { acts.clear(); }
};

template <class T>
struct Gradients {
  std::vector<LayerParams<T>> layers;  // same layout as the network params
  std::vector<T> input;

  // Zeroed gradient storage matching the network.
  static Gradients zeros_like(const BasicNetwork<T>& net);
};

// Runs local layers [begin, end). Throws kShapeMismatch naming the layer when
// the input length is wrong.
template <class T>
std::vector<T> forward_range(const BasicNetwork<T>& net, std::size_t begin, std::size_t end,
                             std::span<const T> x, const ForwardOptions& options = {},
                             ForwardCache<T>* cache = nullptr);

template <class T>
std::vector<T> forward(const BasicNetwork<T>& net, std::span<const T> x,
                       const ForwardOptions& options = {}, ForwardCache<T>* cache = nullptr) {
  return forward_range(net, 0, net.num_layers(), x, options, cache);
}

// Backpropagates grad_out (gradient of a scalar with respect to the cached
// range's output) down to the input of local layer `stop`. Parameter
// gradients are accumulated into `param_grads` when it is non-null. Returns
// the gradient with respect to the input of layer `stop`. Throws kState when
// the cache holds no forward pass.
template <class T>
std::vector<T> backward_to(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                           std::span<const T> grad_out, std::size_t stop,
                           std::type_identity_t<Gradients<T>>* param_grads = nullptr);

// Gradient of sum_k grad_out[k] * output[k] with respect to every weight and
// the network input.
template <class T>
Gradients<T> backward(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                      std::span<const T> grad_out);

// Training variant of backward: accumulates parameter gradients only.
template <class T>
void accumulate_param_gradients(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                                std::span<const T> grad_out, Gradients<T>& grads);

// Halves H (input -> rankable layer block output) and G (rest -> softmax).
struct SplitNetwork {
  Network head;
  Network tail;
  std::size_t split_index = 0;
};

// Splits after the block (layer plus following relu/dropout) that starts at
// a rankable flatten or dense layer. Other indices raise kInvalidArgument
// listing the splittable ones.
SplitNetwork split_at(const Network& net, std::size_t layer_index);

std::vector<float> compose(const SplitNetwork& split, std::span<const float> x,
                           const ForwardOptions& options = {});

std::size_t param_count(const Architecture& arch);
std::size_t param_count(const Network& net);

// Parameters left after physically removing every masked neuron: its
// incoming weights and bias and its outgoing weights. Layers without a mask
// entry count as fully active.
std::size_t masked_param_count(const Architecture& arch, const PruneMask& masks);
std::size_t masked_param_count(const Network& net, const PruneMask& masks);

// Numerically stable softmax; entries are clamped to the smallest positive
// normal so the output stays strictly positive.
template <class T>
void softmax_inplace(std::span<T> values);

extern template class BasicNetwork<float>;
extern template class BasicNetwork<double>;

}  // namespace neuroprune

#endif  // NEUROPRUNE_NETWORK_HPP_
