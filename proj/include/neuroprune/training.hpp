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

#ifndef NEUROPRUNE_TRAINING_HPP_
#define NEUROPRUNE_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/dataset.hpp"
#include "neuroprune/mask.hpp"
#include "neuroprune/network.hpp"

namespace neuroprune {

inline constexpr double kProbabilityClamp = 1e-12;

// -log(max(p, 1e-12)).
double cross_entropy(double p);

struct TrainConfig {
  std::size_t epochs = 10;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;  // shuffling and dropout

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EvalMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
  std::vector<double> class_loss;
  std::vector<double> class_accuracy;
  std::vector<std::size_t> class_count;
};

nlohmann::json to_json(const EvalMetrics& m);

// Accumulates per-sample outcomes into EvalMetrics in a fixed order.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::size_t num_classes);
  void add(std::span<const float> probabilities, std::size_t label);
  EvalMetrics finish() const;

 private:
  std::vector<double> loss_;
  std::vector<std::size_t> correct_;
  std::vector<std::size_t> count_;
};

// Inference-mode evaluation (dropout off), optionally under masks.
EvalMetrics evaluate(const Network& net, const Dataset& data, const PruneMask* masks = nullptr);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;      // running mean over the epoch (dropout active)
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;

  bool operator==(const TrainingLog& other) const;
};

nlohmann::json to_json(const TrainingLog& log);

// Mini-batch SGD with a constant learning rate on the cross-entropy loss.
// With masks, masked activations are zero in the forward and backward pass,
// so weights feeding masked neurons receive no gradient. Throws kNumerical
// naming the epoch and batch when the loss becomes non-finite.
TrainingLog train_sgd(Network& net, const Dataset& train, const Dataset* validation,
                      const TrainConfig& config, const PruneMask* masks = nullptr);

}  // namespace neuroprune

#endif  // NEUROPRUNE_TRAINING_HPP_
