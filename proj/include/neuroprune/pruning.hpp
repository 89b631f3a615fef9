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

#ifndef NEUROPRUNE_PRUNING_HPP_
#define NEUROPRUNE_PRUNING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/dataset.hpp"
#include "neuroprune/mask.hpp"
#include "neuroprune/network.hpp"
#include "neuroprune/ranking.hpp"
#include "neuroprune/training.hpp"

namespace neuroprune {

// Read-only network plus toggleable output masks. No weight is modified.
class MaskedNetwork {
 public:
  MaskedNetwork(const Network& net, PruneMask mask);

  const Network& network() const { return *net_; }
  const PruneMask& mask() const { return mask_; }
  void set_active(std::size_t layer_index, std::size_t neuron, bool active) {
    mask_.set_active(layer_index, neuron, active);
  }
  std::vector<float> forward(std::span<const float> x) const;

 private:
  const Network* net_;
  PruneMask mask_;
};

MaskedNetwork apply_mask(const Network& net, const PruneMask& mask);

enum class SweepStrategy { kBottomFirst, kTopFirst, kRandom, kCategory };

std::string_view sweep_strategy_name(SweepStrategy s);
SweepStrategy parse_sweep_strategy(std::string_view name);

struct SweepOptions {
  SweepStrategy strategy = SweepStrategy::kBottomFirst;
  std::size_t stride = 1;
  std::optional<std::uint64_t> random_seed;  // required for kRandom
  std::size_t category = 0;                  // label of the category ranking
};

// Pruning order: never-activating neurons first (ascending index), then live
// neurons in strategy order. kCategory expects a category ranking and prunes
// its highest-ranked neurons first.
std::vector<std::size_t> pruning_order(const RankVector& rank, const SweepOptions& options);

struct SweepPoint {
  std::size_t n_pruned = 0;
  EvalMetrics metrics;
};

struct SweepResult {
  SweepStrategy strategy = SweepStrategy::kBottomFirst;
  std::size_t layer_index = 0;
  std::size_t width = 0;
  std::size_t category = 0;
  std::string eval_name;
  std::vector<std::size_t> order;
  std::vector<SweepPoint> points;

  // Trapezoidal area under the accuracy curve over the pruned fraction.
  double accuracy_auc() const;
  // First point at or after n_pruned (clamped to the final point).
  const SweepPoint& at_or_after(std::size_t n_pruned) const;
};

// Evaluates a masked network from cached activations of one rankable
// layer's block output. Mask entries for later layers apply in the tail.
class LayerEvaluator {
 public:
  LayerEvaluator(const Network& net, std::size_t layer_index, const Dataset& eval);

  std::size_t width() const { return width_; }
  EvalMetrics evaluate(const PruneMask& mask) const;

 private:
  std::size_t layer_index_;
  std::size_t width_;
  SplitNetwork split_;
  std::vector<std::vector<float>> acts_;
  std::vector<std::uint8_t> labels_;
  std::size_t num_classes_;
};

// Zeroes mask entries one at a time in strategy order, evaluating every
// `stride` prunes and always at the final one. Never touches weights.
SweepResult prune_sweep(const Network& net, std::size_t layer_index, const RankVector& rank,
                        const Dataset& eval, const SweepOptions& options,
                        std::string eval_name = "eval");

// Category sweep: prunes the top of rank_category(k) first; per-class
// metrics live in each point's EvalMetrics.
SweepResult category_sweep(const Network& net, std::size_t layer_index,
                           const RankVector& category_rank, const Dataset& eval,
                           std::size_t stride, std::string eval_name = "eval");

// Masks the first `count` neurons of `order` in one layer, on top of `base`
// (all-active when empty).
PruneMask mask_from_order(const Architecture& arch, std::size_t layer_index,
                          std::span<const std::size_t> order, std::size_t count,
                          PruneMask base = {});

// Prunes round(fraction * width) neurons of every listed layer, following
// each layer's bottom-first order.
PruneMask joint_mask(const Network& net, std::span<const std::size_t> layers,
                     std::span<const RankVector> ranks, double fraction);

struct RetrainResult {
  Network network;
  TrainingLog log;
};

// Continues training with the mask held fixed.
RetrainResult retrain_masked(const Network& net, const PruneMask& mask, const Dataset& train,
                             const Dataset* validation, const TrainConfig& config);

struct JointPoint {
  double fraction = 0.0;
  std::size_t n_pruned = 0;
  EvalMetrics metrics;
  std::optional<EvalMetrics> retrained;
};

// Joint sweep over fractions. When `retrain` is set, every point is also
// retrained from the pruned network and re-evaluated.
std::vector<JointPoint> joint_sweep(const Network& net, std::span<const std::size_t> layers,
                                    std::span<const RankVector> ranks,
                                    std::span<const double> fractions, const Dataset& eval,
                                    const Dataset* train = nullptr,
                                    const TrainConfig* retrain = nullptr);

struct ParameterRow {
  double mask_percent = 0.0;
  std::size_t total_parameters = 0;
  std::size_t parameters_cut = 0;
  double cut_percent = 0.0;
};

ParameterRow parameter_row(const Architecture& arch, const PruneMask& masks,
                           double mask_percent);

// Rows masking the same percentage of every rankable layer (count rounded
// to nearest, lowest indices first; the count is all that matters).
std::vector<ParameterRow> prune_report(const Architecture& arch,
                                       std::span<const double> percentages);

// Physically removes masked dense neurons (rows, biases and the matching
// input columns of the next dense layer). Masked flatten entries cannot be
// removed without changing the convolution output, so the matching input
// columns of the next dense layer are zeroed instead. A layer whose every
// neuron is masked keeps one neuron with zero weights.
Network compact(const Network& net, const PruneMask& masks);

std::string sweep_csv(std::span<const SweepResult> sweeps,
                      std::span<const std::string> class_names);
nlohmann::json to_json(const SweepResult& s);
SweepResult sweep_result_from_json(const nlohmann::json& j);
std::string joint_csv(std::span<const JointPoint> points, std::string_view eval_name);
nlohmann::json to_json(const JointPoint& p);
std::string parameter_csv(std::span<const ParameterRow> rows);

}  // namespace neuroprune

#endif  // NEUROPRUNE_PRUNING_HPP_
