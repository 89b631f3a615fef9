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

#include "neuroprune/pruning.hpp"

#include <algorithm>
#include <cmath>

#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"
#include "neuroprune/rng.hpp"

namespace neuroprune {

MaskedNetwork::MaskedNetwork(const Network& net, PruneMask mask)
    : net_(&net), mask_(std::move(mask)) {
  mask_.validate(net.architecture());
}

std::vector<float> MaskedNetwork::forward(std::span<const float> x) const {
  ForwardOptions opts;
  opts.masks = &mask_;
  return neuroprune::forward(*net_, x, opts);
}

MaskedNetwork apply_mask(const Network& net, const PruneMask& mask) {
  return MaskedNetwork(net, mask);
}

std::string_view sweep_strategy_name(SweepStrategy s) {
  switch (s) {
    case SweepStrategy::kBottomFirst: return "bottom_first";
    case SweepStrategy::kTopFirst: return "top_first";
    case SweepStrategy::kRandom: return "random";
    case SweepStrategy::kCategory: return "category";
  }
  return "unknown";
}

SweepStrategy parse_sweep_strategy(std::string_view name) {
  if (name == "bottom_first") return SweepStrategy::kBottomFirst;
  if (name == "top_first") return SweepStrategy::kTopFirst;
  if (name == "random") return SweepStrategy::kRandom;
  if (name == "category") return SweepStrategy::kCategory;
  fail(ErrorKind::kInvalidArgument,
       "unknown sweep strategy '" + std::string(name) +
           "' (expected bottom_first, top_first, random or category)");
}

std::vector<std::size_t> pruning_order(const RankVector& rank, const SweepOptions& options) {
  require(rank.live.size() == rank.values.size(), ErrorKind::kShapeMismatch,
          "rank vector live flags do not match its length");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < rank.size(); ++i) {
    if (!rank.live[i]) order.push_back(i);
  }
  std::vector<std::size_t> live;
  switch (options.strategy) {
    case SweepStrategy::kBottomFirst:
      live = rank.ascending();
      break;
    case SweepStrategy::kTopFirst:
    case SweepStrategy::kCategory:
      live = rank.descending();
      break;
    case SweepStrategy::kRandom:
      require(options.random_seed.has_value(), ErrorKind::kInvalidArgument,
              "random sweep strategy requires a seed");
      for (std::size_t i = 0; i < rank.size(); ++i) live.push_back(i);
      Rng(*options.random_seed).shuffle(std::span<std::size_t>(live));
      break;
  }
  for (std::size_t i : live) {
    if (rank.live[i]) order.push_back(i);
  }
  return order;
}

double SweepResult::accuracy_auc() const {
  require(!points.empty() && width > 0, ErrorKind::kState, "empty sweep");
  double area = 0.0;
  for (std::size_t p = 1; p < points.size(); ++p) {
    const double dx = static_cast<double>(points[p].n_pruned - points[p - 1].n_pruned) /
                      static_cast<double>(width);
    area += 0.5 * dx * (points[p].metrics.accuracy + points[p - 1].metrics.accuracy);
  }
  return area;
}

const SweepPoint& SweepResult::at_or_after(std::size_t n_pruned) const {
  require(!points.empty(), ErrorKind::kState, "empty sweep");
  for (const SweepPoint& p : points) {
    if (p.n_pruned >= n_pruned) return p;
  }
  return points.back();
}

LayerEvaluator::LayerEvaluator(const Network& net, std::size_t layer_index, const Dataset& eval)
    : layer_index_(layer_index),
      width_(net.architecture().width(layer_index)),
      split_(split_at(net, layer_index)),
      labels_(eval.labels),
      num_classes_(std::max(eval.num_classes(), net.output_size())) {
  require(eval.size() > 0, ErrorKind::kInvalidArgument, "evaluation set is empty");
  acts_.reserve(eval.size());
  for (std::size_t s = 0; s < eval.size(); ++s) acts_.push_back(forward(split_.head, eval.image(s)));
}

EvalMetrics LayerEvaluator::evaluate(const PruneMask& mask) const {
  const std::span<const float> m = mask.has_layer(layer_index_)
                                       ? mask.layer(layer_index_)
                                       : std::span<const float>();
  require(m.empty() || m.size() == width_, ErrorKind::kShapeMismatch,
          "mask width does not match layer " + std::to_string(layer_index_));
  ForwardOptions opts;
  opts.masks = &mask;
  MetricsAccumulator acc(num_classes_);
  std::vector<float> h;
  for (std::size_t s = 0; s < acts_.size(); ++s) {
    h = acts_[s];
    for (std::size_t k = 0; k < m.size(); ++k) h[k] *= m[k];
    acc.add(forward(split_.tail, std::span<const float>(h), opts), labels_[s]);
  }
  return acc.finish();
}

SweepResult prune_sweep(const Network& net, std::size_t layer_index, const RankVector& rank,
                        const Dataset& eval, const SweepOptions& options,
                        std::string eval_name) {
  require(options.stride >= 1, ErrorKind::kInvalidArgument, "sweep stride must be at least 1");
  const std::size_t width = net.architecture().width(layer_index);
  require(rank.size() == width, ErrorKind::kShapeMismatch,
          "rank vector has " + std::to_string(rank.size()) + " entries, layer " +
              std::to_string(layer_index) + " has " + std::to_string(width) + " neurons");
  SweepResult result;
  result.strategy = options.strategy;
  result.layer_index = layer_index;
  result.width = width;
  result.category = options.category;
  result.eval_name = std::move(eval_name);
  result.order = pruning_order(rank, options);

  const LayerEvaluator evaluator(net, layer_index, eval);
  PruneMask mask = PruneMask::all_active(net.architecture());
  result.points.push_back({0, evaluator.evaluate(mask)});
  for (std::size_t n = 1; n <= result.order.size(); ++n) {
    mask.set_active(layer_index, result.order[n - 1], false);
    if (n % options.stride == 0 || n == result.order.size()) {
      result.points.push_back({n, evaluator.evaluate(mask)});
    }
  }
  const std::size_t nc = result.points.front().metrics.class_count.size();
  for (SweepPoint& p : result.points) {
    p.metrics.class_accuracy.resize(std::min(nc, eval.num_classes()));
    p.metrics.class_loss.resize(std::min(nc, eval.num_classes()));
    p.metrics.class_count.resize(std::min(nc, eval.num_classes()));
  }
  return result;
}

SweepResult category_sweep(const Network& net, std::size_t layer_index,
                           const RankVector& category_rank, const Dataset& eval,
                           std::size_t stride, std::string eval_name) {
  SweepOptions opts;
  opts.strategy = SweepStrategy::kCategory;
  opts.stride = stride;
  opts.category = category_rank.category;
  return prune_sweep(net, layer_index, category_rank, eval, opts, std::move(eval_name));
}

PruneMask mask_from_order(const Architecture& arch, std::size_t layer_index,
                          std::span<const std::size_t> order, std::size_t count,
                          PruneMask base) {
  if (base.layers().empty()) base = PruneMask::all_active(arch);
  require(count <= order.size(), ErrorKind::kInvalidArgument,
          "cannot prune " + std::to_string(count) + " neurons from an order of " +
              std::to_string(order.size()));
  for (std::size_t n = 0; n < count; ++n) base.set_active(layer_index, order[n], false);
  return base;
}

PruneMask joint_mask(const Network& net, std::span<const std::size_t> layers,
                     std::span<const RankVector> ranks, double fraction) {
  require(layers.size() == ranks.size(), ErrorKind::kInvalidArgument,
          "need one ranking per pruned layer");
  require(fraction >= 0.0 && fraction <= 1.0, ErrorKind::kInvalidArgument,
          "pruning fraction must be in [0,1]");
  PruneMask mask = PruneMask::all_active(net.architecture());
  SweepOptions opts;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::size_t width = net.architecture().width(layers[l]);
    require(ranks[l].size() == width, ErrorKind::kShapeMismatch,
            "rank vector length does not match layer " + std::to_string(layers[l]));
    const auto order = pruning_order(ranks[l], opts);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(width)));
    mask = mask_from_order(net.architecture(), layers[l], order, count, std::move(mask));
  }
  return mask;
}

RetrainResult retrain_masked(const Network& net, const PruneMask& mask, const Dataset& train,
                             const Dataset* validation, const TrainConfig& config) {
  RetrainResult r{net, {}};
  r.log = train_sgd(r.network, train, validation, config, &mask);
  return r;
}

std::vector<JointPoint> joint_sweep(const Network& net, std::span<const std::size_t> layers,
                                    std::span<const RankVector> ranks,
                                    std::span<const double> fractions, const Dataset& eval,
                                    const Dataset* train, const TrainConfig* retrain) {
  require(!layers.empty(), ErrorKind::kInvalidArgument, "joint sweep needs at least one layer");
  const std::size_t first = *std::min_element(layers.begin(), layers.end());
  const LayerEvaluator evaluator(net, first, eval);
  std::vector<JointPoint> points;
  for (double f : fractions) {
    const PruneMask mask = joint_mask(net, layers, ranks, f);
    JointPoint p;
    p.fraction = f;
    for (std::size_t l : layers) p.n_pruned += mask.pruned_count(l);
    p.metrics = evaluator.evaluate(mask);
    if (train && retrain) {
      const RetrainResult r = retrain_masked(net, mask, *train, nullptr, *retrain);
      p.retrained = evaluate(r.network, eval, &mask);
    }
    points.push_back(std::move(p));
  }
  return points;
}

ParameterRow parameter_row(const Architecture& arch, const PruneMask& masks,
                           double mask_percent) {
  ParameterRow row;
  row.mask_percent = mask_percent;
  row.total_parameters = param_count(arch);
  row.parameters_cut = row.total_parameters - masked_param_count(arch, masks);
  row.cut_percent = 100.0 * static_cast<double>(row.parameters_cut) /
                    static_cast<double>(row.total_parameters);
  return row;
}

std::vector<ParameterRow> prune_report(const Architecture& arch,
                                       std::span<const double> percentages) {
  std::vector<ParameterRow> rows;
  for (double pct : percentages) {
    require(pct >= 0.0 && pct <= 100.0, ErrorKind::kInvalidArgument,
            "mask percentage must be in [0,100]");
    PruneMask mask = PruneMask::all_active(arch);
    for (std::size_t layer : arch.rankable_layers()) {
      const std::size_t width = arch.width(layer);
      const auto count = static_cast<std::size_t>(std::llround(pct / 100.0 * static_cast<double>(width)));
      for (std::size_t n = 0; n < count; ++n) mask.set_active(layer, n, false);
    }
    rows.push_back(parameter_row(arch, mask, pct));
  }
  return rows;
}

Network compact(const Network& net, const PruneMask& masks) {
  require(!net.is_fragment(), ErrorKind::kInvalidArgument, "cannot compact a fragment");
  const Architecture& arch = net.architecture();
  masks.validate(arch);
  Architecture out_arch = arch;
  std::vector<LayerParams<float>> params = net.all_params();

  // kept_in[l]: input indices kept for dense layer l; empty means all.
  std::vector<std::vector<std::size_t>> kept_in(arch.layers.size());
  std::vector<std::vector<std::size_t>> zero_in(arch.layers.size());
  auto next_dense = [&](std::size_t from) {
    for (std::size_t l = from + 1; l < arch.layers.size(); ++l) {
      if (arch.layers[l].kind == LayerKind::kDense) return l;
    }
    fail(ErrorKind::kInternal, "rankable layer without a following dense layer");
  };

  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const LayerSpec& spec = arch.layers[l];
    if (spec.kind != LayerKind::kDense) {
      if (spec.kind == LayerKind::kFlatten && masks.has_layer(l)) {
        const auto m = masks.layer(l);
        const std::size_t nd = next_dense(l);
        for (std::size_t i = 0; i < m.size(); ++i) {
          if (m[i] == 0.0f) zero_in[nd].push_back(i);
        }
      }
      continue;
    }
    const LayerParams<float>& src = net.params(l);
    std::vector<std::size_t> in_idx = kept_in[l];
    if (in_idx.empty()) {
      for (std::size_t i = 0; i < spec.in; ++i) in_idx.push_back(i);
    }
    std::vector<std::size_t> out_idx;
    bool all_masked = false;
    if (masks.has_layer(l)) {
      const auto m = masks.layer(l);
      for (std::size_t o = 0; o < m.size(); ++o) {
        if (m[o] != 0.0f) out_idx.push_back(o);
      }
      if (out_idx.empty()) {
        out_idx.push_back(0);
        all_masked = true;
      }
      kept_in[next_dense(l)] = out_idx;
    } else {
      for (std::size_t o = 0; o < spec.out; ++o) out_idx.push_back(o);
    }

    LayerParams<float> dst;
    dst.weights.reserve(out_idx.size() * in_idx.size());
    for (std::size_t o : out_idx) {
      for (std::size_t i : in_idx) {
        const bool zeroed =
            all_masked || std::binary_search(zero_in[l].begin(), zero_in[l].end(), i);
        dst.weights.push_back(zeroed ? 0.0f : src.weights[o * spec.in + i]);
      }
      dst.bias.push_back(all_masked ? 0.0f : src.bias[o]);
    }
    params[l] = std::move(dst);
    out_arch.layers[l].in = in_idx.size();
    out_arch.layers[l].out = out_idx.size();
  }
  Network out(std::move(out_arch), net.seed(), std::move(params));
  out.metadata() = net.metadata();
  out.metadata()["compacted"] = true;
  return out;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string sweep_csv(std::span<const SweepResult> sweeps,
                      std::span<const std::string> class_names) {
  require(!sweeps.empty(), ErrorKind::kInvalidArgument, "no sweeps to write");
  const std::string& ev = sweeps.front().eval_name;
  std::string out = "strategy,layer,category,n_pruned,fraction_pruned," + ev + "_loss," + ev +
                    "_accuracy";
  for (const std::string& name : class_names) out += "," + csv_field(ev + "_accuracy_" + name);
  for (const std::string& name : class_names) out += "," + csv_field(ev + "_loss_" + name);
  out += "\n";
  for (const SweepResult& s : sweeps) {
    for (const SweepPoint& p : s.points) {
      out += std::string(sweep_strategy_name(s.strategy)) + "," + std::to_string(s.layer_index) +
             "," + std::to_string(s.category) + "," + std::to_string(p.n_pruned) + "," +
             format_double(static_cast<double>(p.n_pruned) / static_cast<double>(s.width)) +
             "," + format_double(p.metrics.loss) + "," + format_double(p.metrics.accuracy);
      for (std::size_t k = 0; k < class_names.size(); ++k) {
        out += "," + format_double(k < p.metrics.class_accuracy.size() ? p.metrics.class_accuracy[k] : 0.0);
      }
      for (std::size_t k = 0; k < class_names.size(); ++k) {
        out += "," + format_double(k < p.metrics.class_loss.size() ? p.metrics.class_loss[k] : 0.0);
      }
      out += "\n";
    }
  }
  return out;
}

nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const SweepPoint& p : s.points) {
    points.push_back({{"n_pruned", p.n_pruned}, {"metrics", to_json(p.metrics)}});
  }
  return {{"strategy", sweep_strategy_name(s.strategy)},
          {"layer_index", s.layer_index},
          {"width", s.width},
          {"category", s.category},
          {"eval", s.eval_name},
          {"order", s.order},
          {"accuracy_auc", s.accuracy_auc()},
          {"points", points}};
}

SweepResult sweep_result_from_json(const nlohmann::json& j) {
  SweepResult s;
  try {
    s.strategy = parse_sweep_strategy(j.at("strategy").get<std::string>());
    s.layer_index = j.at("layer_index").get<std::size_t>();
    s.width = j.at("width").get<std::size_t>();
    s.category = j.at("category").get<std::size_t>();
    s.eval_name = j.at("eval").get<std::string>();
    s.order = j.at("order").get<std::vector<std::size_t>>();
    for (const auto& p : j.at("points")) {
      SweepPoint pt;
      pt.n_pruned = p.at("n_pruned").get<std::size_t>();
      const auto& m = p.at("metrics");
      pt.metrics.loss = m.at("loss").get<double>();
      pt.metrics.accuracy = m.at("accuracy").get<double>();
      pt.metrics.count = m.at("count").get<std::size_t>();
      pt.metrics.class_loss = m.at("class_loss").get<std::vector<double>>();
      pt.metrics.class_accuracy = m.at("class_accuracy").get<std::vector<double>>();
      pt.metrics.class_count = m.at("class_count").get<std::vector<std::size_t>>();
      s.points.push_back(std::move(pt));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kCorruptHeader, std::string("invalid sweep file: ") + e.what());
  }
  return s;
}

std::string joint_csv(std::span<const JointPoint> points, std::string_view eval_name) {
  const std::string ev(eval_name);
  std::string out = "fraction_pruned,n_pruned," + ev + "_loss," + ev + "_accuracy," + ev +
                    "_loss_retrained," + ev + "_accuracy_retrained\n";
  for (const JointPoint& p : points) {
    out += format_double(p.fraction) + "," + std::to_string(p.n_pruned) + "," +
           format_double(p.metrics.loss) + "," + format_double(p.metrics.accuracy) + "," +
           (p.retrained ? format_double(p.retrained->loss) : "") + "," +
           (p.retrained ? format_double(p.retrained->accuracy) : "") + "\n";
  }
  return out;
}

nlohmann::json to_json(const JointPoint& p) {
  nlohmann::json j = {{"fraction", p.fraction},
                      {"n_pruned", p.n_pruned},
                      {"metrics", to_json(p.metrics)}};
  if (p.retrained) j["retrained"] = to_json(*p.retrained);
  return j;
}

std::string parameter_csv(std::span<const ParameterRow> rows) {
  std::string out = "mask_percent,total_parameters,parameters_cut,cut_percent\n";
  for (const ParameterRow& r : rows) {
    out += format_double(r.mask_percent) + "," + std::to_string(r.total_parameters) + "," +
           std::to_string(r.parameters_cut) + "," + format_fixed(r.cut_percent, 2) + "\n";
  }
  return out;
}

}  // namespace neuroprune
