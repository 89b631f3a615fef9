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

#include "neuroprune/architecture.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace neuroprune {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 7> kKindNames = {{
    {LayerKind::kDense, "dense"},
    {LayerKind::kConv2D, "conv2d"},
    {LayerKind::kMaxPool, "maxpool"},
    {LayerKind::kFlatten, "flatten"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kSoftmax, "softmax"},
    {LayerKind::kDropout, "dropout"},
}};

std::string layer_label(std::size_t index, const LayerSpec& spec) {
  return "layer " + std::to_string(index) + " (" +
         std::string(layer_kind_name(spec.kind)) + ")";
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::string_view layer_kind_name(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  fail(ErrorKind::kInvalidArgument, "unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in = in;
  s.out = out;
  return s;
}

LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t out_channels,
                            std::size_t kernel, std::size_t stride) {
  LayerSpec s;
  s.kind = LayerKind::kConv2D;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel = kernel;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::maxpool(std::size_t size, std::size_t stride) {
  LayerSpec s;
  s.kind = LayerKind::kMaxPool;
  s.kernel = size;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::kRelu;
  return s;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec s;
  s.kind = LayerKind::kSoftmax;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::kDropout;
  s.rate = rate;
  return s;
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::kDense:
      return in * out;
    case LayerKind::kConv2D:
      return out_channels * in_channels * kernel * kernel;
    default:
      return 0;
  }
}

std::size_t LayerSpec::bias_count() const {
  switch (kind) {
    case LayerKind::kDense:
      return out;
    case LayerKind::kConv2D:
      return out_channels;
    default:
      return 0;
  }
}

std::vector<Shape> Architecture::shapes() const {
  require(!input_shape.empty(), ErrorKind::kShapeMismatch,
          "architecture has an empty input shape");
  for (std::size_t d : input_shape) {
    require(d > 0, ErrorKind::kShapeMismatch,
            "input shape " + shape_string(input_shape) + " has a zero dimension");
  }
  std::vector<Shape> result;
  result.reserve(layers.size() + 1);
  result.push_back(input_shape);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& spec = layers[i];
    const Shape& in = result.back();
    const std::string where = layer_label(i, spec);
    Shape out;
    switch (spec.kind) {
      case LayerKind::kDense: {
        require(spec.in > 0 && spec.out > 0, ErrorKind::kShapeMismatch,
                where + ": dense widths must be positive");
        require(in.size() == 1 && in[0] == spec.in, ErrorKind::kShapeMismatch,
                where + ": expected input shape [" + std::to_string(spec.in) +
                    "], got " + shape_string(in));
        out = {spec.out};
        break;
      }
      case LayerKind::kConv2D: {
        require(spec.in_channels > 0 && spec.out_channels > 0 && spec.kernel > 0 &&
                    spec.stride > 0,
                ErrorKind::kShapeMismatch, where + ": conv2d parameters must be positive");
        require(in.size() == 3 && in[0] == spec.in_channels, ErrorKind::kShapeMismatch,
                where + ": expected input shape [" + std::to_string(spec.in_channels) +
                    ",H,W], got " + shape_string(in));
        require(in[1] >= spec.kernel && in[2] >= spec.kernel, ErrorKind::kShapeMismatch,
                where + ": kernel " + std::to_string(spec.kernel) +
                    " larger than input " + shape_string(in));
        out = {spec.out_channels, (in[1] - spec.kernel) / spec.stride + 1,
               (in[2] - spec.kernel) / spec.stride + 1};
        break;
      }
      case LayerKind::kMaxPool: {
        require(spec.kernel > 0 && spec.stride > 0, ErrorKind::kShapeMismatch,
                where + ": pool size and stride must be positive");
        require(in.size() == 3 && in[1] >= spec.kernel && in[2] >= spec.kernel,
                ErrorKind::kShapeMismatch,
                where + ": expected [C,H,W] input of at least the pool size, got " +
                    shape_string(in));
        out = {in[0], (in[1] - spec.kernel) / spec.stride + 1,
               (in[2] - spec.kernel) / spec.stride + 1};
        break;
      }
      case LayerKind::kFlatten:
        out = {shape_size(in)};
        break;
      case LayerKind::kDropout:
        require(spec.rate >= 0.0 && spec.rate < 1.0, ErrorKind::kInvalidArgument,
                where + ": dropout rate must be in [0,1), got " +
                    std::to_string(spec.rate));
        out = in;
        break;
      case LayerKind::kSoftmax:
        require(in.size() == 1, ErrorKind::kShapeMismatch,
                where + ": softmax expects a vector, got " + shape_string(in));
        out = in;
        break;
      case LayerKind::kRelu:
        out = in;
        break;
    }
    result.push_back(std::move(out));
  }
  return result;
}

void Architecture::validate(bool require_softmax_terminal) const {
  (void)shapes();
  if (!require_softmax_terminal) return;
  require(!layers.empty() && layers.back().kind == LayerKind::kSoftmax,
          ErrorKind::kInvalidArgument, "network must end with a softmax layer");
  const auto softmax_count =
      std::count_if(layers.begin(), layers.end(),
                    [](const LayerSpec& s) { return s.kind == LayerKind::kSoftmax; });
  require(softmax_count == 1, ErrorKind::kInvalidArgument,
          "network must contain exactly one softmax layer, found " +
              std::to_string(softmax_count));
}

std::size_t Architecture::block_end(std::size_t layer_index) const {
  std::size_t end = layer_index;
  while (end + 1 < layers.size() && (layers[end + 1].kind == LayerKind::kRelu ||
                                     layers[end + 1].kind == LayerKind::kDropout)) {
    ++end;
  }
  return end;
}

bool Architecture::is_rankable(std::size_t layer_index) const {
  if (layer_index >= layers.size()) return false;
  const LayerKind kind = layers[layer_index].kind;
  if (kind != LayerKind::kDense && kind != LayerKind::kFlatten) return false;
  const std::size_t next = block_end(layer_index) + 1;
  return next < layers.size() && layers[next].kind == LayerKind::kDense;
}

std::vector<std::size_t> Architecture::rankable_layers() const {
  std::vector<std::size_t> result;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (is_rankable(i)) result.push_back(i);
  }
  return result;
}

std::size_t Architecture::width(std::size_t layer_index) const {
  require(layer_index < layers.size(), ErrorKind::kInvalidArgument,
          "layer index " + std::to_string(layer_index) + " out of range");
  return shape_size(shapes()[layer_index + 1]);
}

nlohmann::json to_json(const LayerSpec& spec) {
  nlohmann::json j;
  j["kind"] = layer_kind_name(spec.kind);
  switch (spec.kind) {
    case LayerKind::kDense:
      j["in"] = spec.in;
      j["out"] = spec.out;
      break;
    case LayerKind::kConv2D:
      j["in_channels"] = spec.in_channels;
      j["out_channels"] = spec.out_channels;
      j["kernel"] = spec.kernel;
      j["stride"] = spec.stride;
      break;
    case LayerKind::kMaxPool:
      j["size"] = spec.kernel;
      j["stride"] = spec.stride;
      break;
    case LayerKind::kDropout:
      j["rate"] = spec.rate;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec layer_spec_from_json(const nlohmann::json& j) {
  try {
    const LayerKind kind = parse_layer_kind(j.at("kind").get<std::string>());
    switch (kind) {
      case LayerKind::kDense:
        return LayerSpec::dense(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>());
      case LayerKind::kConv2D:
        return LayerSpec::conv2d(j.at("in_channels").get<std::size_t>(),
                                 j.at("out_channels").get<std::size_t>(),
                                 j.at("kernel").get<std::size_t>(),
                                 j.value("stride", std::size_t{1}));
      case LayerKind::kMaxPool:
        return LayerSpec::maxpool(j.at("size").get<std::size_t>(),
                                  j.value("stride", j.at("size").get<std::size_t>()));
      case LayerKind::kFlatten:
        return LayerSpec::flatten();
      case LayerKind::kRelu:
        return LayerSpec::relu();
      case LayerKind::kSoftmax:
        return LayerSpec::softmax();
      case LayerKind::kDropout:
        return LayerSpec::dropout(j.at("rate").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid layer spec: ") + e.what());
  }
  fail(ErrorKind::kInternal, "unreachable layer kind");
}

nlohmann::json to_json(const Architecture& arch) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& spec : arch.layers) layers.push_back(to_json(spec));
  return {{"input_shape", arch.input_shape}, {"layers", layers}};
}

Architecture architecture_from_json(const nlohmann::json& j) {
  Architecture arch;
  try {
    arch.input_shape = j.at("input_shape").get<Shape>();
    for (const auto& layer : j.at("layers")) {
      arch.layers.push_back(layer_spec_from_json(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid architecture: ") + e.what());
  }
  return arch;
}

}  // namespace neuroprune
