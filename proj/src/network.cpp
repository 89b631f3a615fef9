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

#include "neuroprune/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neuroprune/rng.hpp"

namespace neuroprune {

namespace {

// Eight independent partial sums in a fixed order: deterministic, and lets
// the compiler vectorize without reassociation flags.
template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) s[l] += a[i + l] * b[i + l];
  }
  T total = ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::string describe(std::size_t global, const LayerSpec& spec) {
  return "layer " + std::to_string(global) + " (" + std::string(layer_kind_name(spec.kind)) +
         ")";
}

template <class T>
void dense_forward(const LayerSpec& spec, const LayerParams<T>& p, const std::vector<T>& in,
                   std::vector<T>& out) {
  out.resize(spec.out);
  const T* w = p.weights.data();
  for (std::size_t k = 0; k < spec.out; ++k) {
    out[k] = p.bias[k] + dot(w + k * spec.in, in.data(), spec.in);
  }
}

template <class T>
void conv_forward(const LayerSpec& spec, const Shape& in_shape, const Shape& out_shape,
                  const LayerParams<T>& p, const std::vector<T>& in, std::vector<T>& out) {
  const std::size_t ic_n = in_shape[0], ih = in_shape[1], iw = in_shape[2];
  const std::size_t oc_n = out_shape[0], oh = out_shape[1], ow = out_shape[2];
  const std::size_t k = spec.kernel, s = spec.stride;
  out.assign(oc_n * oh * ow, T(0));
  for (std::size_t oc = 0; oc < oc_n; ++oc) {
    T* o = out.data() + oc * oh * ow;
    std::fill(o, o + oh * ow, p.bias[oc]);
    for (std::size_t ic = 0; ic < ic_n; ++ic) {
      const T* plane = in.data() + ic * ih * iw;
      const T* wk = p.weights.data() + (oc * ic_n + ic) * k * k;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const T wv = wk[ky * k + kx];
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const T* row = plane + (oy * s + ky) * iw + kx;
            T* orow = o + oy * ow;
            if (s == 1) {
              for (std::size_t ox = 0; ox < ow; ++ox) orow[ox] += wv * row[ox];
            } else {
              for (std::size_t ox = 0; ox < ow; ++ox) orow[ox] += wv * row[ox * s];
            }
          }
        }
      }
    }
  }
}

template <class T>
void conv_backward(const LayerSpec& spec, const Shape& in_shape, const Shape& out_shape,
                   const LayerParams<T>& p, const std::vector<T>& in, const std::vector<T>& g,
                   std::vector<T>* gin, LayerParams<T>* gp) {
  const std::size_t ic_n = in_shape[0], ih = in_shape[1], iw = in_shape[2];
  const std::size_t oc_n = out_shape[0], oh = out_shape[1], ow = out_shape[2];
  const std::size_t k = spec.kernel, s = spec.stride;
  if (gin) gin->assign(ic_n * ih * iw, T(0));
  for (std::size_t oc = 0; oc < oc_n; ++oc) {
    const T* go = g.data() + oc * oh * ow;
    if (gp) {
      T sum = 0;
      for (std::size_t i = 0; i < oh * ow; ++i) sum += go[i];
      gp->bias[oc] += sum;
    }
    for (std::size_t ic = 0; ic < ic_n; ++ic) {
      const T* plane = in.data() + ic * ih * iw;
      const T* wk = p.weights.data() + (oc * ic_n + ic) * k * k;
      T* gwk = gp ? gp->weights.data() + (oc * ic_n + ic) * k * k : nullptr;
      T* gplane = gin ? gin->data() + ic * ih * iw : nullptr;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const T wv = wk[ky * k + kx];
          T acc = 0;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::size_t base = (oy * s + ky) * iw + kx;
            const T* grow = go + oy * ow;
            if (gwk) {
              const T* row = plane + base;
              for (std::size_t ox = 0; ox < ow; ++ox) acc += grow[ox] * row[ox * s];
            }
            if (gplane) {
              T* gprow = gplane + base;
              for (std::size_t ox = 0; ox < ow; ++ox) gprow[ox * s] += wv * grow[ox];
            }
          }
          if (gwk) gwk[ky * k + kx] += acc;
        }
      }
    }
  }
}

template <class T>
void maxpool_forward(const LayerSpec& spec, const Shape& in_shape, const Shape& out_shape,
                     const std::vector<T>& in, std::vector<T>& out,
                     std::vector<std::uint32_t>& argmax) {
  const std::size_t c_n = in_shape[0], ih = in_shape[1], iw = in_shape[2];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  const std::size_t k = spec.kernel, s = spec.stride;
  out.resize(c_n * oh * ow);
  argmax.resize(out.size());
  for (std::size_t c = 0; c < c_n; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = c * ih * iw + (oy * s) * iw + ox * s;
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::size_t idx = c * ih * iw + (oy * s + ky) * iw + (ox * s + kx);
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (c * oh + oy) * ow + ox;
        out[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <class T>
std::vector<T> backward_impl(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                             std::span<const T> grad_out, std::size_t stop,
                             Gradients<T>* param_grads, bool need_input_grad) {
  require(cache.valid(), ErrorKind::kState,
          "backward called without a cached forward pass");
  require(cache.end <= net.num_layers() && cache.acts.size() == cache.end - cache.begin + 1,
          ErrorKind::kState, "forward cache does not belong to this network");
  require(stop >= cache.begin && stop <= cache.end, ErrorKind::kInvalidArgument,
          "backward stop layer " + std::to_string(stop) + " outside cached range");
  require(grad_out.size() == cache.acts.back().size(), ErrorKind::kShapeMismatch,
          "grad_out has " + std::to_string(grad_out.size()) + " entries, output has " +
              std::to_string(cache.acts.back().size()));

  std::vector<T> g(grad_out.begin(), grad_out.end());
  std::vector<T> gin;
  for (std::size_t i = cache.end; i-- > stop;) {
    const std::size_t local = i - cache.begin;
    const LayerSpec& spec = net.layer(i);
    const std::vector<T>& in = cache.acts[local];
    const std::vector<T>& out = cache.acts[local + 1];
    const bool want_input = need_input_grad || i > stop;
    LayerParams<T>* gp = param_grads ? &param_grads->layers[i] : nullptr;

    const auto& mask = cache.masks[local];
    for (std::size_t k = 0; k < mask.size(); ++k) g[k] *= static_cast<T>(mask[k]);

    switch (spec.kind) {
      case LayerKind::kDense: {
        const T* w = net.params(i).weights.data();
        if (gp) {
          for (std::size_t k = 0; k < spec.out; ++k) {
            if (g[k] != T(0)) axpy(g[k], in.data(), gp->weights.data() + k * spec.in, spec.in);
            gp->bias[k] += g[k];
          }
        }
        if (want_input) {
          gin.assign(spec.in, T(0));
          for (std::size_t k = 0; k < spec.out; ++k) {
            if (g[k] != T(0)) axpy(g[k], w + k * spec.in, gin.data(), spec.in);
          }
        }
        break;
      }
      case LayerKind::kConv2D:
        conv_backward(spec, net.shape(i), net.shape(i + 1), net.params(i), in, g,
                      want_input ? &gin : nullptr, gp);
        break;
      case LayerKind::kMaxPool: {
        gin.assign(in.size(), T(0));
        const auto& argmax = cache.pool_argmax[local];
        for (std::size_t k = 0; k < g.size(); ++k) gin[argmax[k]] += g[k];
        break;
      }
      case LayerKind::kFlatten:
        gin = g;
        break;
      case LayerKind::kRelu:
        gin.resize(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) gin[k] = in[k] > T(0) ? g[k] : T(0);
        break;
      case LayerKind::kSoftmax: {
        double s = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          s += static_cast<double>(g[k]) * static_cast<double>(out[k]);
        }
        gin.resize(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) gin[k] = out[k] * (g[k] - static_cast<T>(s));
        break;
      }
      case LayerKind::kDropout: {
        const auto& scale = cache.dropout_scale[local];
        gin = g;
        for (std::size_t k = 0; k < scale.size(); ++k) gin[k] *= scale[k];
        break;
      }
    }
    if (!want_input) {
      g.clear();
      break;
    }
    g.swap(gin);
  }
  return g;
}

}  // namespace

template <class T>
void softmax_inplace(std::span<T> values) {
  if (values.empty()) return;
  const T max_value = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (T& v : values) {
    v = std::exp(v - max_value);
    sum += static_cast<double>(v);
  }
  const T floor = std::numeric_limits<T>::min();
  for (T& v : values) v = std::max(static_cast<T>(static_cast<double>(v) / sum), floor);
}

template <class T>
BasicNetwork<T>::BasicNetwork(Architecture arch, std::uint64_t seed)
    : arch_(std::move(arch)), seed_(seed) {
  arch_.validate(/*require_softmax_terminal=*/false);
  params_.resize(arch_.layers.size());
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const LayerSpec& spec = arch_.layers[i];
    if (!spec.has_params()) continue;
    const std::size_t fan_in = spec.kind == LayerKind::kDense
                                   ? spec.in
                                   : spec.in_channels * spec.kernel * spec.kernel;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng rng(mix_seed(seed, i));
    auto& p = params_[i];
    p.weights.resize(spec.weight_count());
    for (T& w : p.weights) w = static_cast<T>(rng.uniform(-limit, limit));
    p.bias.assign(spec.bias_count(), T(0));
  }
  finish_construction();
}

template <class T>
BasicNetwork<T>::BasicNetwork(Architecture arch, std::uint64_t seed,
                              std::vector<LayerParams<T>> params)
    : arch_(std::move(arch)), params_(std::move(params)), seed_(seed) {
  arch_.validate(/*require_softmax_terminal=*/false);
  require(params_.size() == arch_.layers.size(), ErrorKind::kSizeMismatch,
          "parameter list length does not match layer count");
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const LayerSpec& spec = arch_.layers[i];
    require(params_[i].weights.size() == spec.weight_count() &&
                params_[i].bias.size() == spec.bias_count(),
            ErrorKind::kSizeMismatch, describe(i, spec) + ": parameter sizes do not match spec");
  }
  finish_construction();
}

template <class T>
void BasicNetwork<T>::finish_construction() {
  shapes_ = arch_.shapes();
  mask_slots_.assign(arch_.layers.size(), kNoMaskSlot);
  for (std::size_t r : arch_.rankable_layers()) mask_slots_[arch_.block_end(r)] = r;
}

template <class T>
BasicNetwork<T> BasicNetwork<T>::slice(std::size_t begin, std::size_t end) const {
  require(begin < end && end <= num_layers(), ErrorKind::kInvalidArgument,
          "invalid layer slice [" + std::to_string(begin) + "," + std::to_string(end) + ")");
  BasicNetwork result;
  result.arch_.input_shape = shapes_[begin];
  result.arch_.layers.assign(arch_.layers.begin() + begin, arch_.layers.begin() + end);
  result.shapes_.assign(shapes_.begin() + begin, shapes_.begin() + end + 1);
  result.params_.assign(params_.begin() + begin, params_.begin() + end);
  result.mask_slots_.assign(mask_slots_.begin() + begin, mask_slots_.begin() + end);
  result.seed_ = seed_;
  result.offset_ = offset_ + begin;
  result.fragment_ = true;
  return result;
}

template <class T>
template <class U>
BasicNetwork<U> BasicNetwork<T>::cast() const {
  BasicNetwork<U> result;
  result.arch_ = arch_;
  result.shapes_ = shapes_;
  result.mask_slots_ = mask_slots_;
  result.seed_ = seed_;
  result.offset_ = offset_;
  result.fragment_ = fragment_;
  result.metadata_ = metadata_;
  result.params_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    result.params_[i].weights.assign(params_[i].weights.begin(), params_[i].weights.end());
    result.params_[i].bias.assign(params_[i].bias.begin(), params_[i].bias.end());
  }
  return result;
}

template <class T>
Gradients<T> Gradients<T>::zeros_like(const BasicNetwork<T>& net) {
  Gradients<T> g;
  g.layers.resize(net.num_layers());
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    g.layers[i].weights.assign(net.params(i).weights.size(), T(0));
    g.layers[i].bias.assign(net.params(i).bias.size(), T(0));
  }
  return g;
}

template <class T>
std::vector<T> forward_range(const BasicNetwork<T>& net, std::size_t begin, std::size_t end,
                             std::span<const T> x, const ForwardOptions& options,
                             ForwardCache<T>* cache) {
  require(begin <= end && end <= net.num_layers(), ErrorKind::kInvalidArgument,
          "invalid forward range [" + std::to_string(begin) + "," + std::to_string(end) + ")");
  const std::size_t expected = shape_size(net.shape(begin));
  if (x.size() != expected) {
    const std::string where = begin < net.num_layers()
                                  ? describe(net.global_index(begin), net.layer(begin))
                                  : "network output";
    fail(ErrorKind::kShapeMismatch, where + ": expected input shape " +
                                        shape_string(net.shape(begin)) + " (" +
                                        std::to_string(expected) + " values), got " +
                                        std::to_string(x.size()) + " values");
  }

  std::vector<T> cur(x.begin(), x.end());
  if (cache) {
    cache->begin = begin;
    cache->end = end;
    cache->acts.clear();
    cache->acts.reserve(end - begin + 1);
    cache->acts.push_back(cur);
    cache->pool_argmax.assign(end - begin, {});
    cache->dropout_scale.assign(end - begin, {});
    cache->masks.assign(end - begin, {});
  }

  std::vector<T> next;
  std::vector<std::uint32_t> argmax;
  for (std::size_t i = begin; i < end; ++i) {
    const LayerSpec& spec = net.layer(i);
    const std::size_t local = i - begin;
    switch (spec.kind) {
      case LayerKind::kDense:
        dense_forward(spec, net.params(i), cur, next);
        break;
      case LayerKind::kConv2D:
        conv_forward(spec, net.shape(i), net.shape(i + 1), net.params(i), cur, next);
        break;
      case LayerKind::kMaxPool:
        maxpool_forward(spec, net.shape(i), net.shape(i + 1), cur, next, argmax);
        if (cache) cache->pool_argmax[local] = argmax;
        break;
      case LayerKind::kFlatten:
        next = cur;
        break;
      case LayerKind::kRelu:
        next.resize(cur.size());
        for (std::size_t k = 0; k < cur.size(); ++k) next[k] = cur[k] > T(0) ? cur[k] : T(0);
        break;
      case LayerKind::kSoftmax:
        next = cur;
        softmax_inplace(std::span<T>(next));
        break;
      case LayerKind::kDropout:
        next = cur;
        if (options.training && spec.rate > 0.0) {
          Rng rng(mix_seed(options.dropout_seed, net.global_index(i)));
          const T keep_scale = static_cast<T>(1.0 / (1.0 - spec.rate));
          std::vector<T> scale(cur.size());
          for (std::size_t k = 0; k < cur.size(); ++k) {
            scale[k] = rng.uniform() < spec.rate ? T(0) : keep_scale;
            next[k] *= scale[k];
          }
          if (cache) cache->dropout_scale[local] = std::move(scale);
        }
        break;
    }

    const std::size_t slot = net.mask_slot(i);
    if (options.masks && slot != BasicNetwork<T>::kNoMaskSlot && options.masks->has_layer(slot)) {
      const auto mask = options.masks->layer(slot);
      require(mask.size() == next.size(), ErrorKind::kShapeMismatch,
              "mask for layer " + std::to_string(slot) + " has length " +
                  std::to_string(mask.size()) + ", activation has " +
                  std::to_string(next.size()));
      for (std::size_t k = 0; k < next.size(); ++k) next[k] *= static_cast<T>(mask[k]);
      if (cache) cache->masks[local] = mask;
    }

    if (cache) cache->acts.push_back(next);
    cur.swap(next);
  }
  return cur;
}

template <class T>
std::vector<T> backward_to(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                           std::span<const T> grad_out, std::size_t stop,
                           std::type_identity_t<Gradients<T>>* param_grads) {
  return backward_impl(net, cache, grad_out, stop, param_grads, /*need_input_grad=*/true);
}

template <class T>
Gradients<T> backward(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                      std::span<const T> grad_out) {
  Gradients<T> grads = Gradients<T>::zeros_like(net);
  grads.input = backward_impl(net, cache, grad_out, cache.begin, &grads, true);
  return grads;
}

// Parameter-gradient-only pass used by training; skips the input gradient of
// the first layer.
template <class T>
void accumulate_param_gradients(const BasicNetwork<T>& net, const ForwardCache<T>& cache,
                                std::span<const T> grad_out, Gradients<T>& grads) {
  backward_impl(net, cache, grad_out, cache.begin, &grads, false);
}

SplitNetwork split_at(const Network& net, std::size_t layer_index) {
  require(!net.is_fragment(), ErrorKind::kInvalidArgument, "cannot split a network fragment");
  const Architecture& arch = net.architecture();
  if (!arch.is_rankable(layer_index)) {
    std::string options;
    for (std::size_t r : arch.rankable_layers()) {
      if (!options.empty()) options += ", ";
      options += std::to_string(r);
    }
    const std::string what =
        layer_index < arch.layers.size()
            ? describe(layer_index, arch.layers[layer_index]) + " is not splittable"
            : "layer index " + std::to_string(layer_index) + " out of range";
    fail(ErrorKind::kInvalidArgument, what + "; splittable layer indices: [" + options + "]");
  }
  const std::size_t cut = arch.block_end(layer_index) + 1;
  return SplitNetwork{net.slice(0, cut), net.slice(cut, net.num_layers()), layer_index};
}

std::vector<float> compose(const SplitNetwork& split, std::span<const float> x,
                           const ForwardOptions& options) {
  const std::vector<float> h = forward(split.head, x, options);
  return forward(split.tail, std::span<const float>(h), options);
}

std::size_t param_count(const Architecture& arch) {
  std::size_t total = 0;
  for (const LayerSpec& spec : arch.layers) total += spec.weight_count() + spec.bias_count();
  return total;
}

std::size_t param_count(const Network& net) { return param_count(net.architecture()); }

std::size_t masked_param_count(const Architecture& arch, const PruneMask& masks) {
  masks.validate(arch);
  // Which rankable layer's mask governs the output of each layer index.
  std::vector<std::size_t> slot_at(arch.layers.size(), BasicNetwork<float>::kNoMaskSlot);
  for (std::size_t r : arch.rankable_layers()) slot_at[arch.block_end(r)] = r;

  std::size_t total = 0;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& spec = arch.layers[i];
    if (spec.kind != LayerKind::kDense) {
      total += spec.weight_count() + spec.bias_count();
      continue;
    }
    std::size_t in = spec.in;
    if (i > 0) {
      const std::size_t producer = slot_at[i - 1];
      if (producer != BasicNetwork<float>::kNoMaskSlot && masks.has_layer(producer)) {
        in = masks.active_count(producer);
      }
    }
    std::size_t out = spec.out;
    if (masks.has_layer(i)) out = masks.active_count(i);
    total += in * out + out;
  }
  return total;
}

std::size_t masked_param_count(const Network& net, const PruneMask& masks) {
  return masked_param_count(net.architecture(), masks);
}

#define NEUROPRUNE_INSTANTIATE(T)                                                           \
  template class BasicNetwork<T>;                                                           \
  template struct Gradients<T>;                                                             \
  template void softmax_inplace<T>(std::span<T>);                                           \
  template std::vector<T> forward_range<T>(const BasicNetwork<T>&, std::size_t,             \
                                           std::size_t, std::span<const T>,                 \
                                           const ForwardOptions&, ForwardCache<T>*);        \
  template std::vector<T> backward_to<T>(const BasicNetwork<T>&, const ForwardCache<T>&,    \
                                         std::span<const T>, std::size_t, Gradients<T>*);   \
  template Gradients<T> backward<T>(const BasicNetwork<T>&, const ForwardCache<T>&,         \
                                    std::span<const T>);                                    \
  template void accumulate_param_gradients<T>(const BasicNetwork<T>&,                       \
                                              const ForwardCache<T>&, std::span<const T>,   \
                                              Gradients<T>&);

NEUROPRUNE_INSTANTIATE(float)
NEUROPRUNE_INSTANTIATE(double)
#undef NEUROPRUNE_INSTANTIATE

template BasicNetwork<double> BasicNetwork<float>::cast<double>() const;
template BasicNetwork<float> BasicNetwork<double>::cast<float>() const;
template BasicNetwork<float> BasicNetwork<float>::cast<float>() const;
template BasicNetwork<double> BasicNetwork<double>::cast<double>() const;

}  // namespace neuroprune
