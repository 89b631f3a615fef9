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

#ifndef NEUROPRUNE_RANKING_HPP_
#define NEUROPRUNE_RANKING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/attribution.hpp"
#include "neuroprune/network.hpp"

namespace neuroprune {

// Conditional expected attributions E_ij^k: mean of A_ij over samples whose
// true label is k.
struct EATable {
  std::size_t neurons = 0;
  std::size_t outputs = 0;
  std::size_t classes = 0;
  std::size_t split_index = 0;
  std::vector<double> cond;                 // [neurons x outputs x classes]
  std::vector<double> priors;               // empirical p(y = k)
  std::vector<std::size_t> counts;          // samples per class
  std::vector<std::size_t> active_counts;   // samples where neuron i fired

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return cond[(i * outputs + j) * classes + k];
  }
  bool live(std::size_t i) const { return active_counts[i] > 0; }

  // E_ij = sum_k E_ij^k p(y = k), [neurons x outputs].
  std::vector<double> total() const;
};

enum class EmptyClassPolicy {
  kError,  // a class without samples is an error naming the class
  kZero,   // its conditional EAs are zero and its prior is zero
};

EATable conditional_ea(const AttributionSet& set,
                       EmptyClassPolicy policy = EmptyClassPolicy::kError,
                       std::span<const std::string> class_names = {});

// Direct whole-dataset mean of A_ij, [neurons x outputs].
std::vector<double> direct_mean_ea(const AttributionSet& set);

enum class RankMethod { kClassWeighted, kLossBased, kL1Baseline, kCategory };

std::string_view rank_method_name(RankMethod m);
RankMethod parse_rank_method(std::string_view name);

struct RankVector {
  std::vector<double> values;
  std::vector<std::uint8_t> live;  // 0 for never-activating neurons
  RankMethod method = RankMethod::kClassWeighted;
  std::size_t category = 0;        // only for kCategory
  std::size_t split_index = 0;

  std::size_t size() const { return values.size(); }
  std::size_t live_count() const;
  // Neuron indices from highest to lowest rank; ties by ascending index.
  std::vector<std::size_t> descending() const;
  // Neuron indices from lowest to highest rank; ties by ascending index.
  std::vector<std::size_t> ascending() const;
};

// Rank(i) = sum_j E_ij^j p(j) - sum_j sum_{k != j} E_ij^k p(k). The second
// term runs over all ordered pairs (j, k) with k != j.
RankVector rank_class_weighted(const EATable& table);

// rank_i = -mean_x(loss attribution of neuron i).
RankVector rank_loss_based(const AttributionSet& set);

// Class-weighted rank restricted to samples with true label k.
RankVector rank_category(const AttributionSet& set, std::size_t category);

// Sum of absolute incoming weights of each neuron of a dense rankable layer,
// optionally plus |bias|. Live flags are all set.
RankVector rank_l1_baseline(const Network& net, std::size_t layer_index,
                            bool include_bias = false);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

// Histogram of live-neuron ranks. bins == 0 selects Freedman-Diaconis.
Histogram rank_histogram(const RankVector& rv, std::size_t bins = 0);

struct OverlapResult {
  std::size_t list_size = 0;                // top entries per category
  std::vector<std::size_t> membership;      // lists each neuron appears in
  std::vector<std::size_t> histogram;       // [c] = neurons in exactly c lists
  std::vector<std::vector<std::size_t>> lists;

  // Fraction of listed neurons that appear in exactly one list.
  double single_fraction() const;
};

// Each category's top ceil(q * live) live neurons.
OverlapResult top_overlap(std::span<const RankVector> per_category, double q);

std::string ea_table_csv(const EATable& table);
std::string rank_csv(const RankVector& rv);
nlohmann::json to_json(const RankVector& rv);
RankVector rank_vector_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const OverlapResult& o);

}  // namespace neuroprune

#endif  // NEUROPRUNE_RANKING_HPP_
