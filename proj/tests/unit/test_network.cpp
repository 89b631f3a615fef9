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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "neuroprune/error.hpp"
#include "neuroprune/mask.hpp"
#include "neuroprune/network.hpp"
#include "neuroprune/pruning.hpp"
#include "neuroprune/training.hpp"

using namespace neuroprune;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInternal;
}

// 4 -> 3 -> 2 with relu between the dense layers.
Architecture arch_432() {
  Architecture a;
  a.input_shape = {4};
  a.layers = {LayerSpec::dense(4, 3), LayerSpec::relu(), LayerSpec::dense(3, 2),
              LayerSpec::softmax()};
  return a;
}

}  // namespace

TEST_CASE("identity dense layer gives uniform softmax on equal logits") {
  Network net = fixtures::identity_2x2();
  for (std::vector<float> x : {std::vector<float>{0, 0}, std::vector<float>{1, 1}}) {
    std::vector<float> y = forward(net, std::span<const float>(x));
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-7));
  }
}

TEST_CASE("forward matches a hand-traced 2x3x2 computation") {
  Network net = fixtures::mlp(2, 3, 2, 42);
  const std::vector<float> x = {0.3f, -0.7f};
  const auto& w1 = net.params(0).weights;
  const auto& b1 = net.params(0).bias;
  const auto& w2 = net.params(2).weights;
  const auto& b2 = net.params(2).bias;

  double h[3];
  for (int i = 0; i < 3; ++i) {
    double z = b1[i] + w1[i * 2 + 0] * x[0] + w1[i * 2 + 1] * x[1];
    h[i] = z > 0 ? z : 0;
  }
  double logits[2];
  for (int j = 0; j < 2; ++j) {
    logits[j] = b2[j];
    for (int i = 0; i < 3; ++i) logits[j] += w2[j * 3 + i] * h[i];
  }
  double m = std::max(logits[0], logits[1]);
  double e0 = std::exp(logits[0] - m), e1 = std::exp(logits[1] - m);

  std::vector<float> y = forward(net, std::span<const float>(x));
  CHECK(y[0] == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-6));
  CHECK(y[1] == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-6));
}

TEST_CASE("forward rejects a wrongly sized input") {
  Network net = fixtures::mlp(2, 3, 2, 1);
  std::vector<float> x = {1, 2, 3};
  CHECK(kind_of([&] { forward(net, std::span<const float>(x)); }) ==
        ErrorKind::kShapeMismatch);
}

TEST_CASE("linear layer gradient equals its weights") {
  Architecture a;
  a.input_shape = {2};
  a.layers = {LayerSpec::dense(2, 1)};
  BasicNetwork<double> net(a, 3);
  std::vector<double> x = {0.5, -1.25};
  ForwardCache<double> cache;
  forward(net, std::span<const double>(x), {}, &cache);
  std::vector<double> one = {1.0};
  Gradients<double> g = backward(net, cache, std::span<const double>(one));
  CHECK(g.input[0] == net.params(0).weights[0]);
  CHECK(g.input[1] == net.params(0).weights[1]);
}

TEST_CASE("backward without a cached forward pass is an error") {
  BasicNetwork<double> net = fixtures::mlp(2, 3, 2, 1).cast<double>();
  ForwardCache<double> empty;
  std::vector<double> g = {1.0, 0.0};
  CHECK(kind_of([&] { backward(net, empty, std::span<const double>(g)); }) == ErrorKind::kState);
}

TEST_CASE("gradients match central differences on a seeded 2x4x3 net") {
  BasicNetwork<double> net = fixtures::mlp(2, 4, 3, 5).cast<double>();
  net.params(0).bias = {0.1, -0.2, 0.05, 0.3};
  net.params(2).bias = {-0.1, 0.2, 0.0};
  std::vector<double> x = {0.4, -0.9};
  std::vector<double> c = {0.7, -1.3, 0.2};
  fixtures::GradientCheck check = fixtures::gradient_check(net, x, c, 1e-3);
  CHECK(check.entries == 2 + (2 * 4 + 4) + (4 * 3 + 3));
  CHECK(check.max_relative_error < 1e-3);
}

TEST_CASE("relu at exactly zero passes no gradient") {
  Architecture a;
  a.input_shape = {1};
  a.layers = {LayerSpec::dense(1, 1), LayerSpec::relu(), LayerSpec::dense(1, 1)};
  BasicNetwork<double> net(a, 2);
  net.params(0).weights = {1.0};
  net.params(0).bias = {0.0};
  std::vector<double> x = {0.0};
  ForwardCache<double> cache;
  forward(net, std::span<const double>(x), {}, &cache);
  std::vector<double> one = {1.0};
  Gradients<double> g = backward(net, cache, std::span<const double>(one));
  CHECK(g.input[0] == 0.0);
  CHECK(g.layers[0].weights[0] == 0.0);
}

TEST_CASE("training separates two blobs") {
  Architecture a;
  a.input_shape = {2};
  a.layers = {LayerSpec::dense(2, 2), LayerSpec::softmax()};
  Network net(a, 11);
  Dataset data = fixtures::blobs(200, 4);
  TrainConfig config;
  config.epochs = 50;
  config.learning_rate = 0.1;
  config.batch_size = 16;
  config.seed = 3;
  TrainingLog log = train_sgd(net, data, nullptr, config);
  CHECK(log.epochs.size() == 50);
  CHECK(evaluate(net, data).accuracy >= 0.95);
}

TEST_CASE("zero learning rate and zero epochs leave the weights alone") {
  Network net = fixtures::mlp(2, 4, 2, 8);
  const Network before = net;
  Dataset data = fixtures::blobs(64, 2);
  TrainConfig config;
  config.epochs = 3;
  config.learning_rate = 0.0;
  train_sgd(net, data, nullptr, config);
  CHECK(net.same_weights(before));

  config.epochs = 0;
  config.learning_rate = 0.1;
  TrainingLog log = train_sgd(net, data, nullptr, config);
  CHECK(log.epochs.empty());
  CHECK(net.same_weights(before));
}

TEST_CASE("split then compose reproduces the full forward pass exactly") {
  Network net = fixtures::every_kind_net(21);
  for (std::size_t layer : net.architecture().rankable_layers()) {
    SplitNetwork s = split_at(net, layer);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      std::vector<float> x = fixtures::random_input(net.input_size(), 1000 + i);
      std::vector<float> a = forward(net, std::span<const float>(x));
      std::vector<float> b = compose(s, std::span<const float>(x));
      for (std::size_t j = 0; j < a.size(); ++j) {
        worst = std::max(worst, static_cast<double>(std::abs(a[j] - b[j])));
      }
    }
    CHECK(worst == 0.0);
  }
}

TEST_CASE("split widths follow the toy architecture") {
  Architecture arch = fixtures::toy_config().architecture;
  Network net(arch, 1);
  std::vector<std::size_t> rankable = arch.rankable_layers();
  REQUIRE(rankable.size() == 3);

  // Flatten of 12 channels of 6x6 after two conv/pool stages on 32x32.
  SplitNetwork flat = split_at(net, rankable[0]);
  CHECK(flat.head.output_size() == 12 * 6 * 6);
  SplitNetwork dense2 = split_at(net, fixtures::toy_dense2(arch));
  CHECK(dense2.head.output_size() == 256);
  CHECK(dense2.tail.output_size() == 5);
}

TEST_CASE("splitting at a non-rankable layer lists the valid indices") {
  Network net = fixtures::mlp(4, 3, 2, 1);
  try {
    split_at(net, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidArgument);
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
}

TEST_CASE("parameter counts of small dense nets") {
  Architecture single;
  single.input_shape = {4};
  single.layers = {LayerSpec::dense(4, 3)};
  CHECK(param_count(single) == 15);

  Architecture a = arch_432();
  CHECK(param_count(a) == 15 + 8);
  PruneMask mask = PruneMask::all_active(a);
  CHECK(masked_param_count(a, mask) == 23);
  mask.set_active(0, 1, false);
  CHECK(param_count(a) - masked_param_count(a, mask) == 7);
  mask.set_active(0, 2, false);
  CHECK(param_count(a) - masked_param_count(a, mask) == 14);
}

TEST_CASE("a mask of the wrong width is rejected") {
  Architecture a = arch_432();
  PruneMask mask;
  mask.add_layer(0, 4);
  CHECK(kind_of([&] { masked_param_count(a, mask); }) == ErrorKind::kShapeMismatch);
}

TEST_CASE("masking every rankable neuron of the toy net leaves only the conv stack") {
  Architecture arch = fixtures::toy_config().architecture;
  // conv 1->6 k5, conv 6->12 k3, dense 432->256, 256->256, 256->5.
  const std::size_t conv = (1 * 6 * 25 + 6) + (6 * 12 * 9 + 12);
  const std::size_t dense = (432 * 256 + 256) + (256 * 256 + 256) + (256 * 5 + 5);
  CHECK(param_count(arch) == conv + dense);

  PruneMask mask = PruneMask::all_active(arch);
  for (std::size_t layer : arch.rankable_layers()) {
    for (std::size_t n = 0; n < arch.width(layer); ++n) mask.set_active(layer, n, false);
  }
  // Every dense layer loses all inputs or outputs; the last keeps its bias.
  CHECK(masked_param_count(arch, mask) == conv + 5);
  ParameterRow row = parameter_row(arch, mask, 100.0);
  CHECK(row.parameters_cut == dense - 5);
}
