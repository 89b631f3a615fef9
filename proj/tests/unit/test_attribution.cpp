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
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "neuroprune/attribution.hpp"
#include "neuroprune/error.hpp"
#include "neuroprune/training.hpp"

using namespace neuroprune;

namespace {

// in -> hidden -> hidden -> out; the tail after layer 0 has a relu kink.
Network deep_mlp(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed) {
  Architecture a;
  a.input_shape = {in};
  a.layers = {LayerSpec::dense(in, hidden),     LayerSpec::relu(),
              LayerSpec::dense(hidden, hidden), LayerSpec::relu(),
              LayerSpec::dense(hidden, out),    LayerSpec::softmax()};
  return Network(a, seed);
}

IgSettings steps(std::size_t n, TargetMode target = TargetMode::kSoftmax) {
  IgSettings s;
  s.steps = n;
  s.target = target;
  return s;
}

double softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

}  // namespace

TEST_CASE("input attributions of a linear map are exact") {
  Architecture a;
  a.input_shape = {3};
  a.layers = {LayerSpec::dense(3, 2)};
  BasicNetwork<double> net(a, 6);
  std::vector<double> x = {0.5, -1.0, 2.0};
  BaselineSpec base = BaselineSpec::custom({0.1, 0.2, -0.3});
  for (std::size_t n : {1, 7, 64}) {
    std::vector<double> attr = ig_input(net, x, base, 1, steps(n));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(attr[i] ==
            doctest::Approx((x[i] - base.values[i]) * net.params(0).weights[3 + i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("input equal to the baseline gets zero attribution") {
  BasicNetwork<double> net = deep_mlp(3, 5, 2, 2).cast<double>();
  std::vector<double> x = {0.3, 0.3, -0.4};
  std::vector<double> attr = ig_input(net, x, BaselineSpec::custom(x), 0, steps(16));
  for (double v : attr) CHECK(v == 0.0);
}

TEST_CASE("64-step input attributions agree with a fine quadrature") {
  BasicNetwork<double> net = fixtures::mlp(4, 6, 3, 12).cast<double>();
  std::vector<double> x = {0.9, -0.4, 0.3, 1.1};
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> coarse = ig_input(net, x, BaselineSpec::zero(), j, steps(64));
    std::vector<double> fine = ig_input(net, x, BaselineSpec::zero(), j, steps(65536));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(coarse[i] - fine[i]) < 1e-4);
  }
}

TEST_CASE("internal attributions through a linear tail are exact") {
  Network net = fixtures::mlp(3, 4, 2, 31);
  std::vector<float> x = {0.8f, -0.2f, 0.5f};
  InternalAttributor attributor(net, 0, steps(1, TargetMode::kLogit));
  std::vector<double> h = attributor.head(x);
  const auto& w = net.params(2).weights;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> a = ig_internal(net, 0, x, j, steps(1, TargetMode::kLogit));
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(a[i] - h[i] * static_cast<double>(w[j * 4 + i])) < 1e-12);
    }
  }
  AttributionMatrix m = attributor.attribute(x);
  for (double g : attributor.completeness_gap(m)) CHECK(g < 1e-12);
}

TEST_CASE("dead neurons get zero output and loss attribution") {
  Network net = deep_mlp(3, 5, 3, 4);
  // Neuron 2 of the first hidden layer can never fire on these inputs.
  for (std::size_t k = 0; k < 3; ++k) net.params(0).weights[2 * 3 + k] = 0.0f;
  net.params(0).bias[2] = -1.0f;
  std::vector<float> x = {0.2f, 0.9f, -0.6f};
  InternalAttributor attributor(net, 0, steps(64));
  AttributionMatrix m = attributor.attribute(x);
  CHECK(m.activations[2] == 0.0);
  for (std::size_t j = 0; j < 3; ++j) CHECK(m.at(2, j) == 0.0);
  LossAttributionVector l = attributor.attribute_loss(x, 1);
  CHECK(l.values[2] == 0.0);
}

TEST_CASE("internal completeness holds at 512 steps") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Network net = deep_mlp(6, 8, 4, seed);
    std::vector<float> x = fixtures::random_input(6, seed + 50);
    InternalAttributor attributor(net, 0, steps(512));
    AttributionMatrix m = attributor.attribute(x);
    std::vector<double> at_x = attributor.tail(m.activations);
    std::vector<double> at_0 = attributor.tail(std::vector<double>(m.neurons, 0.0));
    for (std::size_t j = 0; j < m.outputs; ++j) {
      std::vector<double> col = m.column(j);
      double sum = std::accumulate(col.begin(), col.end(), 0.0);
      CHECK(std::abs(sum - (at_x[j] - at_0[j])) < 1e-4);
    }

    LossAttributionVector l = attributor.attribute_loss(x, seed % 4);
    double lsum = std::accumulate(l.values.begin(), l.values.end(), 0.0);
    std::vector<double> px = attributor.tail_probabilities(m.activations);
    std::vector<double> p0 = attributor.tail_probabilities(std::vector<double>(m.neurons, 0.0));
    double expected = cross_entropy(px[seed % 4]) - cross_entropy(p0[seed % 4]);
    CHECK(std::abs(lsum - expected) < 1e-4);
  }
}

TEST_CASE("loss attribution of a single neuron matches the closed form") {
  Architecture a;
  a.input_shape = {1};
  a.layers = {LayerSpec::dense(1, 1), LayerSpec::relu(), LayerSpec::dense(1, 2),
              LayerSpec::softmax()};
  Network net(a, 0);
  net.params(0).weights = {1.5f};
  net.params(0).bias = {0.25f};
  net.params(2).weights = {2.0f, -1.0f};
  net.params(2).bias = {0.1f, -0.3f};
  std::vector<float> x = {0.6f};
  const double h = 1.5 * 0.6f + 0.25;
  // L(h) = log(1 + exp(z_other - z_true)) with z linear in h.
  auto loss = [](double v) { return softplus((-1.0 * v - 0.3) - (2.0 * v + 0.1)); };
  LossAttributionVector l = ig_loss(net, 0, x, 0, steps(512));
  CHECK(l.values[0] == doctest::Approx(loss(h) - loss(0.0)).epsilon(1e-6));
}

TEST_CASE("a neuron feeding only class j boosts j and suppresses the rest") {
  Architecture a;
  a.input_shape = {2};
  a.layers = {LayerSpec::dense(2, 2), LayerSpec::relu(), LayerSpec::dense(2, 3),
              LayerSpec::softmax()};
  Network net(a, 0);
  net.params(0).weights = {1, 0, 0, 1};
  net.params(0).bias = {0, 0};
  // Rows are classes: neuron 0 reaches only class 1, neuron 1 every class.
  net.params(2).weights = {0.0f, 0.4f, 2.0f, 0.4f, 0.0f, 0.4f};
  net.params(2).bias = {0, 0, 0};
  std::vector<float> x = {1.0f, 1.0f};
  InternalAttributor attributor(net, 0, steps(64));
  AttributionMatrix m = attributor.attribute(x);
  CHECK(m.at(0, 1) > 0.0);
  CHECK(m.at(0, 0) <= 0.0);
  CHECK(m.at(0, 2) <= 0.0);
}

TEST_CASE("completeness gap shrinks as the step count doubles") {
  std::vector<double> mean(6, 0.0);
  const std::size_t nets = 50;
  for (std::uint64_t seed = 0; seed < nets; ++seed) {
    Network net = deep_mlp(5, 10, 3, 100 + seed);
    std::vector<float> x = fixtures::random_input(5, 200 + seed, -2.0f, 2.0f);
    for (std::size_t p = 0; p < mean.size(); ++p) {
      InternalAttributor attributor(net, 0, steps(std::size_t{1} << p));
      std::vector<double> g = attributor.completeness_gap(attributor.attribute(x));
      mean[p] += *std::max_element(g.begin(), g.end()) / nets;
    }
  }
  for (std::size_t p = 1; p < mean.size(); ++p) CHECK(mean[p] <= mean[p - 1]);
}

TEST_CASE("a single step on a kinked tail reports its gap") {
  Network net = deep_mlp(4, 12, 3, 77);
  std::vector<float> x = {1.5f, -2.0f, 0.7f, 1.9f};
  InternalAttributor attributor(net, 0, steps(1));
  AttributionMatrix m = attributor.attribute(x);
  std::vector<double> g = attributor.completeness_gap(m);
  CHECK(m.gaps == g);
  CHECK(*std::max_element(g.begin(), g.end()) > 1e-6);
}

TEST_CASE("attribute_dataset enforces the gap threshold and round-trips") {
  Network net = deep_mlp(4, 12, 3, 77);
  Dataset data;
  data.image_shape = {4};
  data.class_names = {"a", "b", "c"};
  for (std::uint32_t i = 0; i < 6; ++i) {
    std::vector<float> x = fixtures::random_input(4, 300 + i, -2.0f, 2.0f);
    data.images.insert(data.images.end(), x.begin(), x.end());
    data.labels.push_back(static_cast<std::uint8_t>(i % 3));
    data.ids.push_back(i);
    data.tags.push_back(SplitTag::kTrain);
  }

  IgSettings strict = steps(1);
  strict.gap_threshold = 1e-9;
  try {
    attribute_dataset(net, 0, data, strict);
    FAIL("expected the gap check to fire");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumerical);
  }

  AttributionSet set = attribute_dataset(net, 0, data, steps(128));
  CHECK(set.size() == 6);
  CHECK(set.values.size() == 6 * 12 * 3);
  CHECK(deserialize_attributions(serialize_attributions(set)) == set);
}
