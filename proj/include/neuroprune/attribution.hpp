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

#ifndef NEUROPRUNE_ATTRIBUTION_HPP_
#define NEUROPRUNE_ATTRIBUTION_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/dataset.hpp"
#include "neuroprune/network.hpp"

namespace neuroprune {

enum class QuadratureRule { kMidpoint, kLeft };
enum class TargetMode { kSoftmax, kLogit };

std::string_view quadrature_rule_name(QuadratureRule rule);
QuadratureRule parse_quadrature_rule(std::string_view name);
std::string_view target_mode_name(TargetMode mode);
TargetMode parse_target_mode(std::string_view name);

struct IgSettings {
  std::size_t steps = 64;
  QuadratureRule rule = QuadratureRule::kMidpoint;
  TargetMode target = TargetMode::kSoftmax;
  // Largest tolerated completeness gap before attribute_dataset fails.
  double gap_threshold = 1e-2;

  void validate() const;
  // Path positions alpha_s in [0, 1) for s = 0..steps-1, each weighted
  // 1/steps.
  std::vector<double> alphas() const;

  bool operator==(const IgSettings&) const = default;
};

nlohmann::json to_json(const IgSettings& s);
IgSettings ig_settings_from_json(const nlohmann::json& j);

struct BaselineSpec {
  enum class Kind { kZero, kCustom };
  Kind kind = Kind::kZero;
  std::vector<double> values;  // only for kCustom

  static BaselineSpec zero() { return {}; }
  static BaselineSpec custom(std::vector<double> v) { return {Kind::kCustom, std::move(v)}; }
};

// A[i][j]: contribution of neuron i of the split layer to output j.
struct AttributionMatrix {
  std::size_t neurons = 0;
  std::size_t outputs = 0;
  std::vector<double> values;       // row-major [neurons x outputs]
  std::vector<double> activations;  // H(x)
  std::vector<double> gaps;         // completeness gap per output
  std::uint32_t sample_id = 0;
  std::size_t split_index = 0;
  std::size_t steps = 0;

  double at(std::size_t i, std::size_t j) const { return values[i * outputs + j]; }
  std::vector<double> column(std::size_t j) const;
};

struct LossAttributionVector {
  std::vector<double> values;
  double gap = 0.0;
  std::uint32_t sample_id = 0;
  std::size_t true_label = 0;
};

// Integrated gradients of output j with respect to the network input,
// straight path from the baseline. Logit mode drops the final softmax.
std::vector<double> ig_input(const BasicNetwork<double>& net, std::span<const double> x,
                             const BaselineSpec& baseline, std::size_t j,
                             const IgSettings& settings);

// Attributions of the neurons at a split layer, zero baseline. The tail's
// first layer is dense, so its pre-activation along the path is
// alpha * (W1 h) + b1; the tail Jacobian is accumulated at that point and
// projected back through W1 once per sample.
class InternalAttributor {
 public:
  InternalAttributor(const Network& net, std::size_t layer_index, IgSettings settings);

  const SplitNetwork& split() const { return split_; }
  const IgSettings& settings() const { return settings_; }
  std::size_t neurons() const { return neurons_; }
  std::size_t outputs() const { return outputs_; }

  // H(x) widened to 64-bit.
  std::vector<double> head(std::span<const float> x) const;

  // G(h) in the configured target mode (probabilities or logits).
  std::vector<double> tail(std::span<const double> h) const;
  // Softmax output of G regardless of target mode.
  std::vector<double> tail_probabilities(std::span<const double> h) const;

  AttributionMatrix attribute(std::span<const float> x, std::uint32_t sample_id = 0) const;

  // Both the output attributions and the loss attribution from one set of
  // path evaluations.
  void attribute_with_loss(std::span<const float> x, std::size_t label, std::uint32_t sample_id,
                           AttributionMatrix& matrix, LossAttributionVector& loss) const;

  LossAttributionVector attribute_loss(std::span<const float> x, std::size_t label,
                                       std::uint32_t sample_id = 0) const;

  // |sum_i A_ij - (G_j(h) - G_j(0))| from stored activations.
  std::vector<double> completeness_gap(const AttributionMatrix& matrix) const;

 private:
  void integrate(std::span<const double> h, std::size_t label, bool with_loss,
                 AttributionMatrix* matrix, LossAttributionVector* loss) const;

  SplitNetwork split_;
  BasicNetwork<double> tail64_;
  IgSettings settings_;
  std::size_t neurons_ = 0;
  std::size_t outputs_ = 0;
  std::vector<double> tail_at_zero_;
  std::vector<double> probs_at_zero_;
};

// Convenience wrappers over InternalAttributor.
std::vector<double> ig_internal(const Network& net, std::size_t layer_index,
                                std::span<const float> x, std::size_t j,
                                const IgSettings& settings);
LossAttributionVector ig_loss(const Network& net, std::size_t layer_index,
                              std::span<const float> x, std::size_t true_label,
                              const IgSettings& settings);

// Attributions for every sample of a dataset at one layer.
struct AttributionSet {
  std::size_t split_index = 0;
  std::size_t neurons = 0;
  std::size_t outputs = 0;
  std::size_t num_classes = 0;
  IgSettings settings;
  std::vector<std::uint32_t> sample_ids;
  std::vector<std::uint8_t> labels;
  std::vector<double> activations;  // [N x neurons]
  std::vector<double> values;       // [N x neurons x outputs]
  std::vector<double> loss;         // [N x neurons]
  std::vector<double> gaps;         // [N x outputs]
  std::vector<double> loss_gaps;    // [N]

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample_values(std::size_t s) const {
    return std::span<const double>(values).subspan(s * neurons * outputs, neurons * outputs);
  }
  std::span<const double> sample_activations(std::size_t s) const {
    return std::span<const double>(activations).subspan(s * neurons, neurons);
  }
  std::span<const double> sample_loss(std::size_t s) const {
    return std::span<const double>(loss).subspan(s * neurons, neurons);
  }
  AttributionMatrix matrix(std::size_t s) const;
  double max_gap() const;
  double max_loss_gap() const;

  bool operator==(const AttributionSet&) const = default;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Throws kNumerical when a completeness gap exceeds settings.gap_threshold
// or any attribution is non-finite.
AttributionSet attribute_dataset(const Network& net, std::size_t layer_index,
                                 const Dataset& data, const IgSettings& settings,
                                 const ProgressFn& progress = {});

// "NPAT1\n" | JSON header | "\n\0" | f64 activations, values, loss, gaps,
// loss gaps | u32 sample ids | u8 labels
inline constexpr std::string_view kAttributionMagic = "NPAT1\n";

std::string serialize_attributions(const AttributionSet& set);
AttributionSet deserialize_attributions(std::string_view bytes);

// CSV rows (sample_id, true_label, neuron, output_class, attribution) for the
// first max_samples samples.
std::string attribution_csv(const AttributionSet& set, std::size_t max_samples);
// split_index, steps, target mode and completeness gaps.
nlohmann::json attribution_sidecar(const AttributionSet& set);

}  // namespace neuroprune

#endif  // NEUROPRUNE_ATTRIBUTION_HPP_
