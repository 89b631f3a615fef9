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

// Shared fixtures for the unit and acceptance tests.

#ifndef NEUROPRUNE_TESTS_FIXTURES_HPP_
#define NEUROPRUNE_TESTS_FIXTURES_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "neuroprune/architecture.hpp"
#include "neuroprune/attribution.hpp"
#include "neuroprune/dataset.hpp"
#include "neuroprune/network.hpp"
#include "neuroprune/training.hpp"
#include "neuroprune/workflow.hpp"

namespace fixtures {

using neuroprune::Architecture;
using neuroprune::Dataset;
using neuroprune::Network;

// Directory for cached trained networks; created on demand.
std::filesystem::path cache_dir();

// A fresh scratch directory under the cache directory.
std::filesystem::path scratch_dir(const std::string& name);

std::filesystem::path source_dir();

// Reference configuration shipped in configs/.
neuroprune::RunConfig toy_config();
neuroprune::RunConfig tiny_config();

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

Splits toy_data(const neuroprune::RunConfig& config);

// Toy network trained with init and shuffle seed `seed`. Cached on disk so
// repeated test runs reuse the weights.
Network trained_toy(std::uint64_t seed);

// Attributions of the training split for a trained toy network, using the
// attribution settings of the toy config. Cached like trained_toy.
neuroprune::AttributionSet toy_attributions(std::uint64_t seed, std::size_t layer);

// Layer index of the second dense hidden layer of the toy network.
std::size_t toy_dense2(const Architecture& arch);

// 2 -> 2 identity dense layer followed by softmax.
Network identity_2x2();

// in -> hidden -> out with relu and softmax, seeded.
Network mlp(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed);

// Sample from a standard normal-ish distribution, seeded.
std::vector<float> random_input(std::size_t n, std::uint64_t seed, float lo = -1.0f,
                                float hi = 1.0f);

// Two linearly separable Gaussian-like blobs in 2-D, labels 0 and 1.
Dataset blobs(std::size_t count, std::uint64_t seed);

// Central finite difference of f at x along every coordinate.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h);

double relative_error(double a, double b);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
};

// Compares analytic input and parameter gradients of sum_j c_j y_j(x) with
// central differences of step h. Dropout, if any, runs in training mode with
// a fixed seed so that the objective is deterministic.
GradientCheck gradient_check(const neuroprune::BasicNetwork<double>& net,
                             const std::vector<double>& x, const std::vector<double>& c,
                             double h);

// Small seeded network containing every layer kind.
Network every_kind_net(std::uint64_t seed);

}  // namespace fixtures

#endif  // NEUROPRUNE_TESTS_FIXTURES_HPP_
