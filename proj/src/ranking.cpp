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

#include "neuroprune/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"

namespace neuroprune {

namespace {

std::vector<std::uint8_t> live_flags(const AttributionSet& set) {
  std::vector<std::uint8_t> live(set.neurons, 0);
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto h = set.sample_activations(s);
    for (std::size_t i = 0; i < set.neurons; ++i) {
      if (h[i] != 0.0) live[i] = 1;
    }
  }
  return live;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> EATable::total() const {
  std::vector<double> e(neurons * outputs, 0.0);
  for (std::size_t i = 0; i < neurons; ++i) {
    for (std::size_t j = 0; j < outputs; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < classes; ++k) acc += at(i, j, k) * priors[k];
      e[i * outputs + j] = acc;
    }
  }
  return e;
}

EATable conditional_ea(const AttributionSet& set, EmptyClassPolicy policy,
                       std::span<const std::string> class_names) {
  require(set.size() > 0, ErrorKind::kInvalidArgument, "no attributions to aggregate");
  EATable t;
  t.neurons = set.neurons;
  t.outputs = set.outputs;
  t.classes = set.num_classes;
  t.split_index = set.split_index;
  t.counts.assign(t.classes, 0);
  t.active_counts.assign(t.neurons, 0);
  std::vector<double> sums(t.neurons * t.outputs * t.classes, 0.0);

  for (std::size_t s = 0; s < set.size(); ++s) {
    const std::size_t k = set.labels[s];
    require(k < t.classes, ErrorKind::kInvalidArgument,
            "label " + std::to_string(k) + " out of range for " + std::to_string(t.classes) +
                " classes");
    ++t.counts[k];
    const auto a = set.sample_values(s);
    const auto h = set.sample_activations(s);
    for (std::size_t i = 0; i < t.neurons; ++i) {
      if (h[i] != 0.0) ++t.active_counts[i];
      for (std::size_t j = 0; j < t.outputs; ++j) {
        sums[(i * t.outputs + j) * t.classes + k] += a[i * t.outputs + j];
      }
    }
  }

  for (std::size_t k = 0; k < t.classes; ++k) {
    if (t.counts[k] == 0 && policy == EmptyClassPolicy::kError) {
      const std::string name =
          k < class_names.size() ? "'" + class_names[k] + "'" : std::to_string(k);
      fail(ErrorKind::kEmptyClass, "class " + name + " has no samples");
    }
  }
  t.cond.assign(sums.size(), 0.0);
  for (std::size_t idx = 0; idx < sums.size(); ++idx) {
    const std::size_t n = t.counts[idx % t.classes];
    if (n > 0) t.cond[idx] = sums[idx] / static_cast<double>(n);
  }
  t.priors.resize(t.classes);
  for (std::size_t k = 0; k < t.classes; ++k) {
    t.priors[k] = static_cast<double>(t.counts[k]) / static_cast<double>(set.size());
  }
  return t;
}

std::vector<double> direct_mean_ea(const AttributionSet& set) {
  require(set.size() > 0, ErrorKind::kInvalidArgument, "no attributions to aggregate");
  std::vector<double> e(set.neurons * set.outputs, 0.0);
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto a = set.sample_values(s);
    for (std::size_t idx = 0; idx < e.size(); ++idx) e[idx] += a[idx];
  }
  for (double& v : e) v /= static_cast<double>(set.size());
  return e;
}

std::string_view rank_method_name(RankMethod m) {
  switch (m) {
    case RankMethod::kClassWeighted: return "class_weighted";
    case RankMethod::kLossBased: return "loss_based";
    case RankMethod::kL1Baseline: return "l1_baseline";
    case RankMethod::kCategory: return "category";
  }
  return "unknown";
}

RankMethod parse_rank_method(std::string_view name) {
  if (name == "class_weighted") return RankMethod::kClassWeighted;
  if (name == "loss_based") return RankMethod::kLossBased;
  if (name == "l1_baseline") return RankMethod::kL1Baseline;
  if (name == "category") return RankMethod::kCategory;
  fail(ErrorKind::kInvalidArgument,
       "unknown ranking method '" + std::string(name) +
           "' (expected class_weighted, loss_based, l1_baseline or category)");
}

std::size_t RankVector::live_count() const {
  return static_cast<std::size_t>(std::count(live.begin(), live.end(), std::uint8_t{1}));
}

std::vector<std::size_t> RankVector::descending() const {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

std::vector<std::size_t> RankVector::ascending() const {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

RankVector rank_class_weighted(const EATable& t) {
  require(t.outputs == t.classes, ErrorKind::kShapeMismatch,
          "class-weighted rank needs as many outputs as label classes (" +
              std::to_string(t.outputs) + " vs " + std::to_string(t.classes) + ")");
  RankVector rv;
  rv.method = RankMethod::kClassWeighted;
  rv.split_index = t.split_index;
  rv.values.assign(t.neurons, 0.0);
  rv.live.resize(t.neurons);
  for (std::size_t i = 0; i < t.neurons; ++i) {
    double reward = 0.0, penalty = 0.0;
    for (std::size_t j = 0; j < t.outputs; ++j) {
      reward += t.at(i, j, j) * t.priors[j];
      for (std::size_t k = 0; k < t.classes; ++k) {
        if (k != j) penalty += t.at(i, j, k) * t.priors[k];
      }
    }
    rv.values[i] = reward - penalty;
    rv.live[i] = t.live(i) ? 1 : 0;
  }
  return rv;
}

RankVector rank_loss_based(const AttributionSet& set) {
  require(set.size() > 0, ErrorKind::kInvalidArgument,
          "loss-based rank needs at least one loss attribution");
  RankVector rv;
  rv.method = RankMethod::kLossBased;
  rv.split_index = set.split_index;
  rv.live = live_flags(set);
  std::vector<double> sum(set.neurons, 0.0);
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto l = set.sample_loss(s);
    for (std::size_t i = 0; i < set.neurons; ++i) sum[i] += l[i];
  }
  rv.values.resize(set.neurons);
  for (std::size_t i = 0; i < set.neurons; ++i) {
    rv.values[i] = 0.0 - sum[i] / static_cast<double>(set.size());
  }
  return rv;
}

RankVector rank_category(const AttributionSet& set, std::size_t category) {
  require(category < set.num_classes, ErrorKind::kInvalidArgument,
          "category " + std::to_string(category) + " out of range");
  AttributionSet subset;
  subset.split_index = set.split_index;
  subset.neurons = set.neurons;
  subset.outputs = set.outputs;
  subset.num_classes = set.num_classes;
  subset.settings = set.settings;
  for (std::size_t s = 0; s < set.size(); ++s) {
    if (set.labels[s] != category) continue;
    subset.labels.push_back(set.labels[s]);
    subset.sample_ids.push_back(set.sample_ids[s]);
    const auto a = set.sample_values(s);
    subset.values.insert(subset.values.end(), a.begin(), a.end());
    const auto h = set.sample_activations(s);
    subset.activations.insert(subset.activations.end(), h.begin(), h.end());
  }
  require(!subset.labels.empty(), ErrorKind::kEmptyClass,
          "category " + std::to_string(category) + " has no samples");
  RankVector rv = rank_class_weighted(conditional_ea(subset, EmptyClassPolicy::kZero));
  rv.method = RankMethod::kCategory;
  rv.category = category;
  return rv;
}

RankVector rank_l1_baseline(const Network& net, std::size_t layer_index, bool include_bias) {
  const Architecture& arch = net.architecture();
  require(arch.is_rankable(layer_index), ErrorKind::kInvalidArgument,
          "layer " + std::to_string(layer_index) + " is not a rankable layer");
  const LayerSpec& spec = arch.layers[layer_index];
  require(spec.kind == LayerKind::kDense, ErrorKind::kInvalidArgument,
          "layer " + std::to_string(layer_index) + " (" +
              std::string(layer_kind_name(spec.kind)) + ") has no incoming weights");
  const auto& p = net.params(layer_index);
  RankVector rv;
  rv.method = RankMethod::kL1Baseline;
  rv.split_index = layer_index;
  rv.values.assign(spec.out, 0.0);
  rv.live.assign(spec.out, 1);
  for (std::size_t o = 0; o < spec.out; ++o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.in; ++i) acc += std::abs(static_cast<double>(p.weights[o * spec.in + i]));
    if (include_bias) acc += std::abs(static_cast<double>(p.bias[o]));
    rv.values[o] = acc;
  }
  return rv;
}

Histogram rank_histogram(const RankVector& rv, std::size_t bins) {
  std::vector<double> v;
  for (std::size_t i = 0; i < rv.size(); ++i) {
    if (rv.live[i]) v.push_back(rv.values[i]);
  }
  require(!v.empty(), ErrorKind::kInvalidArgument, "no live neurons to histogram");
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  if (bins == 0) {
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
    bins = (width > 0.0 && hi > lo) ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 1;
    bins = std::clamp<std::size_t>(bins, 1, 1000);
  }
  Histogram h;
  h.counts.assign(bins, 0);
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(lo + span * static_cast<double>(b) / static_cast<double>(bins));
  }
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / span * static_cast<double>(bins));
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

double OverlapResult::single_fraction() const {
  std::size_t listed = 0;
  for (std::size_t c = 1; c < histogram.size(); ++c) listed += histogram[c];
  return listed == 0 ? 0.0 : static_cast<double>(histogram.size() > 1 ? histogram[1] : 0) /
                                 static_cast<double>(listed);
}

OverlapResult top_overlap(std::span<const RankVector> per_category, double q) {
  require(q > 0.0 && q < 1.0, ErrorKind::kInvalidArgument, "quantile must be in (0,1)");
  require(!per_category.empty(), ErrorKind::kInvalidArgument, "no rankings to compare");
  const std::size_t m = per_category.front().size();
  OverlapResult r;
  r.membership.assign(m, 0);
  r.histogram.assign(per_category.size() + 1, 0);
  for (const RankVector& rv : per_category) {
    require(rv.size() == m, ErrorKind::kShapeMismatch, "rankings have different lengths");
    const auto live = rv.live_count();
    const std::size_t take = static_cast<std::size_t>(std::ceil(q * static_cast<double>(live)));
    r.list_size = std::max(r.list_size, take);
    std::vector<std::size_t> list;
    for (std::size_t i : rv.descending()) {
      if (list.size() == take) break;
      if (rv.live[i]) list.push_back(i);
    }
    for (std::size_t i : list) ++r.membership[i];
    r.lists.push_back(std::move(list));
  }
  for (std::size_t c : r.membership) ++r.histogram[c];
  return r;
}

std::string ea_table_csv(const EATable& t) {
  std::string out = "neuron,output_class,label_class,expected_attribution\n";
  for (std::size_t i = 0; i < t.neurons; ++i) {
    for (std::size_t j = 0; j < t.outputs; ++j) {
      for (std::size_t k = 0; k < t.classes; ++k) {
        out += std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + "," +
               format_double(t.at(i, j, k)) + "\n";
      }
    }
  }
  return out;
}

std::string rank_csv(const RankVector& rv) {
  std::string out = "neuron,rank,live\n";
  for (std::size_t i = 0; i < rv.size(); ++i) {
    out += std::to_string(i) + "," + format_double(rv.values[i]) + "," +
           std::to_string(static_cast<int>(rv.live[i])) + "\n";
  }
  return out;
}

nlohmann::json to_json(const RankVector& rv) {
  nlohmann::json j = {{"method", rank_method_name(rv.method)},
                      {"split_index", rv.split_index},
                      {"values", rv.values},
                      {"live", rv.live}};
  if (rv.method == RankMethod::kCategory) j["category"] = rv.category;
  return j;
}

RankVector rank_vector_from_json(const nlohmann::json& j) {
  RankVector rv;
  try {
    rv.method = parse_rank_method(j.at("method").get<std::string>());
    rv.split_index = j.at("split_index").get<std::size_t>();
    rv.values = j.at("values").get<std::vector<double>>();
    rv.live = j.at("live").get<std::vector<std::uint8_t>>();
    rv.category = j.value("category", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid rank file: ") + e.what());
  }
  require(rv.values.size() == rv.live.size(), ErrorKind::kShapeMismatch,
          "rank values and live flags differ in length");
  return rv;
}

nlohmann::json to_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}};
}

nlohmann::json to_json(const OverlapResult& o) {
  return {{"list_size", o.list_size},
          {"membership_histogram", o.histogram},
          {"single_fraction", o.single_fraction()},
          {"lists", o.lists}};
}

}  // namespace neuroprune
