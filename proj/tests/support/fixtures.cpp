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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "neuroprune/checkpoint.hpp"
#include "neuroprune/io.hpp"
#include "neuroprune/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using namespace neuroprune;

fs::path cache_dir() {
  fs::path dir = NEUROPRUNE_TEST_CACHE_DIR;
  fs::create_directories(dir);
  return dir;
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = cache_dir() / "scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path source_dir() { return NEUROPRUNE_SOURCE_DIR; }

RunConfig toy_config() { return load_run_config(source_dir() / "configs" / "toy.json"); }
RunConfig tiny_config() { return load_run_config(source_dir() / "configs" / "tiny.json"); }

Splits toy_data(const RunConfig& config) {
  Dataset all = generate_tagged(config.dataset, config.splits);
  return {all.with_tag(SplitTag::kTrain), all.with_tag(SplitTag::kValidation),
          all.with_tag(SplitTag::kTest)};
}

namespace {

nlohmann::json toy_key(const RunConfig& config, std::uint64_t seed) {
  return {{"dataset", to_json(config.dataset)},
          {"splits", to_json(config.splits)},
          {"architecture", to_json(config.architecture)},
          {"train", to_json(config.train)},
          {"seed", seed}};
}

}  // namespace

Network trained_toy(std::uint64_t seed) {
  RunConfig config = toy_config();
  nlohmann::json key = toy_key(config, seed);
  fs::path path = cache_dir() / ("toy_" + sha256_hex(key.dump()).substr(0, 16) + ".nprn");
  if (fs::exists(path)) return load(path);

  Splits data = toy_data(config);
  Network net(config.architecture, seed);
  TrainConfig train = config.train;
  train.seed = seed;
  train_sgd(net, data.train, &data.validation, train);
  save(net, path);
  return net;
}

AttributionSet toy_attributions(std::uint64_t seed, std::size_t layer) {
  RunConfig config = toy_config();
  nlohmann::json key = toy_key(config, seed);
  key["layer"] = layer;
  key["ig"] = to_json(config.ig);
  fs::path path = cache_dir() / ("attr_" + sha256_hex(key.dump()).substr(0, 16) + ".npat");
  if (fs::exists(path)) return deserialize_attributions(read_file(path));

  Network net = trained_toy(seed);
  AttributionSet set = attribute_dataset(net, layer, toy_data(config).train, config.ig);
  write_file_atomic(path, serialize_attributions(set));
  return set;
}

std::size_t toy_dense2(const Architecture& arch) {
  std::vector<std::size_t> rankable = arch.rankable_layers();
  return rankable.back();
}

Network identity_2x2() {
  Architecture arch;
  arch.input_shape = {2};
  arch.layers = {LayerSpec::dense(2, 2), LayerSpec::softmax()};
  Network net(arch, 0);
  net.params(0).weights = {1, 0, 0, 1};
  net.params(0).bias = {0, 0};
  return net;
}

Network mlp(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed) {
  Architecture arch;
  arch.input_shape = {in};
  arch.layers = {LayerSpec::dense(in, hidden), LayerSpec::relu(), LayerSpec::dense(hidden, out),
                 LayerSpec::softmax()};
  return Network(arch, seed);
}

std::vector<float> random_input(std::size_t n, std::uint64_t seed, float lo, float hi) {
  Rng rng(seed);
  std::vector<float> x(n);
  for (float& v : x) v = static_cast<float>(rng.uniform(lo, hi));
  return x;
}

Dataset blobs(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.image_shape = {2};
  d.class_names = {"left", "right"};
  for (std::size_t i = 0; i < count; ++i) {
    std::uint8_t label = static_cast<std::uint8_t>(i % 2);
    double cx = label == 0 ? -1.5 : 1.5;
    d.images.push_back(static_cast<float>(cx + rng.uniform(-1.0, 1.0)));
    d.images.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
    d.labels.push_back(label);
    d.ids.push_back(static_cast<std::uint32_t>(i));
    d.tags.push_back(SplitTag::kTrain);
  }
  return d;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double up = f(x);
    x[i] = keep - h;
    double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double relative_error(double a, double b) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-4});
  return std::abs(a - b) / scale;
}

GradientCheck gradient_check(const BasicNetwork<double>& net, const std::vector<double>& x,
                             const std::vector<double>& c, double h) {
  ForwardOptions options;
  options.training = true;
  options.dropout_seed = 17;

  auto objective = [&](const BasicNetwork<double>& n, const std::vector<double>& in) {
    std::vector<double> y = forward(n, std::span<const double>(in), options);
    double f = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) f += c[j] * y[j];
    return f;
  };

  ForwardCache<double> cache;
  forward(net, std::span<const double>(x), options, &cache);
  Gradients<double> g = backward(net, cache, std::span<const double>(c));

  GradientCheck out;
  auto compare = [&](double analytic, double numeric) {
    out.max_relative_error = std::max(out.max_relative_error, relative_error(analytic, numeric));
    ++out.entries;
  };

  std::vector<double> gx = numeric_gradient(
      [&](const std::vector<double>& in) { return objective(net, in); }, x, h);
  for (std::size_t i = 0; i < x.size(); ++i) compare(g.input[i], gx[i]);

  BasicNetwork<double> probe = net;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    for (int part = 0; part < 2; ++part) {
      std::vector<double>& values = part == 0 ? probe.params(l).weights : probe.params(l).bias;
      const std::vector<double>& analytic = part == 0 ? g.layers[l].weights : g.layers[l].bias;
      for (std::size_t k = 0; k < values.size(); ++k) {
        double keep = values[k];
        values[k] = keep + h;
        double up = objective(probe, x);
        values[k] = keep - h;
        double down = objective(probe, x);
        values[k] = keep;
        compare(analytic[k], (up - down) / (2 * h));
      }
    }
  }
  return out;
}

Network every_kind_net(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 99));
  const std::size_t channels = 1 + rng.below(2);
  const std::size_t filters = 2 + rng.below(2);
  const std::size_t side = 7 + rng.below(3);
  const std::size_t conv_out = side - 2;
  const std::size_t pooled = (conv_out - 2) / 2 + 1;
  const std::size_t flat = filters * pooled * pooled;
  const std::size_t hidden = 3 + rng.below(4);
  const std::size_t classes = 2 + rng.below(3);

  Architecture arch;
  arch.input_shape = {channels, side, side};
  arch.layers = {LayerSpec::conv2d(channels, filters, 3),
                 LayerSpec::relu(),
                 LayerSpec::maxpool(2, 2),
                 LayerSpec::flatten(),
                 LayerSpec::dense(flat, hidden),
                 LayerSpec::relu(),
                 LayerSpec::dropout(0.25),
                 LayerSpec::dense(hidden, classes),
                 LayerSpec::softmax()};
  Network net(arch, seed);
  // Non-zero biases so that the bias gradients are exercised away from 0.
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    for (float& b : net.params(l).bias) b = static_cast<float>(rng.uniform(-0.1, 0.1));
  }
  return net;
}

}  // namespace fixtures
