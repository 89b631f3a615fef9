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

#include "neuroprune/workflow.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <utility>

#include "neuroprune/checkpoint.hpp"
#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"
#include "neuroprune/report.hpp"

#ifndef NEUROPRUNE_VERSION
#define NEUROPRUNE_VERSION "0.0.0"
#endif

namespace neuroprune {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view tool_version() { return NEUROPRUNE_VERSION; }

namespace artifacts {

std::string attribution(std::size_t layer) {
  return "attribution/layer_" + std::to_string(layer) + ".npat";
}
std::string rank(std::size_t layer, RankMethod method) {
  return "rank/layer_" + std::to_string(layer) + "_" + std::string(rank_method_name(method)) +
         ".json";
}
std::string category_rank(std::size_t layer, std::size_t category) {
  return "rank/layer_" + std::to_string(layer) + "_category_" + std::to_string(category) +
         ".json";
}
std::string sweep(std::size_t layer, SweepStrategy strategy) {
  return "sweep/layer_" + std::to_string(layer) + "_" +
         std::string(sweep_strategy_name(strategy)) + ".json";
}
std::string category_sweep(std::size_t layer, std::size_t category) {
  return "category/layer_" + std::to_string(layer) + "_category_" + std::to_string(category) +
         ".json";
}

}  // namespace artifacts

namespace {

std::string replace_ext(std::string_view rel, std::string_view ext) {
  std::string s(rel);
  return s.substr(0, s.rfind('.')) + std::string(ext);
}

template <class T>
std::vector<T> numbers(const json& j, const std::string& key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).template get<std::vector<T>>();
}

json load_json_ref(const json& j, const fs::path& base_dir) {
  if (!j.is_string()) return j;
  fs::path p = j.get<std::string>();
  if (p.is_relative()) p = base_dir / p;
  require(fs::exists(p), ErrorKind::kMissingArtifact,
          "missing referenced config file '" + p.string() + "'");
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, "cannot parse '" + p.string() + "': " + e.what());
  }
}

void check_subset(std::span<const std::size_t> layers, std::span<const std::size_t> of,
                  std::string_view what) {
  for (std::size_t l : layers) {
    require(std::find(of.begin(), of.end(), l) != of.end(), ErrorKind::kInvalidArgument,
            std::string(what) + " layer " + std::to_string(l) + " is not an attribution layer");
  }
}

// One stage invocation: resolves paths, checks inputs, records hashes and
// writes outputs atomically.
class StageRun {
 public:
  StageRun(const RunConfig& config, Stage stage, const LogFn& log)
      : config_(config), stage_(stage), log_(log) {}

  fs::path path(std::string_view rel) const { return config_.workspace / fs::path(rel); }
  bool exists(std::string_view rel) const { return fs::exists(path(rel)); }

  // Marks rel as an input, failing fast when it is absent.
  void need(std::string_view rel, std::string_view what, Stage producer) {
    require(exists(rel), ErrorKind::kMissingArtifact,
            "missing " + std::string(what) + " '" + path(rel).string() + "' (run '" +
                std::string(stage_name(producer)) + "' first)");
    if (!inputs_.contains(std::string(rel))) inputs_[std::string(rel)] = sha256_file(path(rel));
  }

  void write(std::string_view rel, std::string_view contents) {
    write_file_atomic(path(rel), contents);
    outputs_[std::string(rel)] = sha256_hex(contents);
  }
  void write_json(std::string_view rel, const json& j) { write(rel, j.dump(2) + "\n"); }

  void log(const std::string& line) const {
    if (log_) log_(std::string(stage_name(stage_)) + ": " + line);
  }

  Dataset dataset() {
    need(artifacts::kDataset, "dataset", Stage::kGenData);
    return load_dataset(path(artifacts::kDataset));
  }
  Network model() {
    need(artifacts::kModel, "model checkpoint", Stage::kTrain);
    return load(path(artifacts::kModel));
  }
  json read_json(std::string_view rel, std::string_view what, Stage producer) {
    need(rel, what, producer);
    try {
      return json::parse(read_file(path(rel)));
    } catch (const json::parse_error& e) {
      fail(ErrorKind::kCorruptHeader, "cannot parse '" + path(rel).string() + "': " + e.what());
    }
  }

  void commit() const {
    fs::path mpath = path(artifacts::kManifest);
    json manifest = json::object();
    if (fs::exists(mpath)) {
      try {
        manifest = json::parse(read_file(mpath));
      } catch (const json::parse_error&) {
        manifest = json::object();
      }
    }
    manifest["tool"] = "neuroprune";
    manifest["version"] = tool_version();
    manifest["config"] = to_json(config_);
    json entry = {{"inputs", json(inputs_)}, {"outputs", json(outputs_)}};
    manifest["stages"][std::string(stage_name(stage_))] = entry;
    write_file_atomic(mpath, manifest.dump(2) + "\n");
  }

 private:
  const RunConfig& config_;
  Stage stage_;
  const LogFn& log_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset eval;
};

Splits make_splits(const Dataset& ds, SplitTag eval_tag) {
  return {ds.with_tag(SplitTag::kTrain), ds.with_tag(SplitTag::kValidation),
          ds.with_tag(eval_tag)};
}

json split_counts(const Dataset& ds) {
  json j = json::object();
  for (SplitTag t : {SplitTag::kTrain, SplitTag::kValidation, SplitTag::kTest}) {
    j[std::string(split_tag_name(t))] = ds.with_tag(t).class_counts();
  }
  return j;
}

void stage_gen_data(const RunConfig& c, StageRun& run) {
  Dataset ds = generate_tagged(c.dataset, c.splits);
  run.log("generated " + std::to_string(ds.size()) + " samples");
  run.write(artifacts::kDataset, serialize_dataset(ds));
  run.write_json(artifacts::kDatasetSummary,
                 {{"config", to_json(c.dataset)},
                  {"splits", to_json(c.splits)},
                  {"class_names", ds.class_names},
                  {"class_counts", split_counts(ds)}});
}

void stage_train(const RunConfig& c, StageRun& run) {
  Splits s = make_splits(run.dataset(), c.eval_split);
  Network net(c.architecture, c.init_seed);
  const Dataset* val = s.validation.size() > 0 ? &s.validation : nullptr;
  TrainingLog log = train_sgd(net, s.train, val, c.train);
  net.metadata()["train"] = to_json(c.train);
  EvalMetrics m = evaluate(net, s.eval);
  run.log(std::string(split_tag_name(c.eval_split)) + " accuracy " + format_fixed(m.accuracy, 4));
  run.write(artifacts::kModel, serialize_checkpoint(net));
  run.write_json(artifacts::kTrainLog, {{"log", to_json(log)},
                                        {"eval_split", split_tag_name(c.eval_split)},
                                        {"eval", to_json(m)}});
}

void stage_attribute(const RunConfig& c, StageRun& run) {
  Network net = run.model();
  Dataset train = run.dataset().with_tag(SplitTag::kTrain);
  for (std::size_t layer : c.attribution_layers) {
    std::size_t next_report = 0;
    ProgressFn progress = [&](std::size_t done, std::size_t total) {
      if (done * 10 >= next_report * total) {
        run.log("layer " + std::to_string(layer) + " " + std::to_string(done) + "/" +
                std::to_string(total));
        next_report = done * 10 / total + 1;
      }
    };
    AttributionSet set = attribute_dataset(net, layer, train, c.ig, progress);
    std::string rel = artifacts::attribution(layer);
    run.write(rel, serialize_attributions(set));
    run.write(replace_ext(rel, ".csv"), attribution_csv(set, c.csv_max_samples));
    run.write_json(replace_ext(rel, ".json"), attribution_sidecar(set));
  }
}

AttributionSet read_attributions(StageRun& run, std::size_t layer) {
  std::string rel = artifacts::attribution(layer);
  run.need(rel, "attribution file", Stage::kAttribute);
  return deserialize_attributions(read_file(run.path(rel)));
}

void write_rank(StageRun& run, const std::string& rel, const RankVector& rv) {
  run.write_json(rel, to_json(rv));
  run.write(replace_ext(rel, ".csv"), rank_csv(rv));
}

void stage_rank(const RunConfig& c, StageRun& run) {
  Network net = run.model();
  std::vector<std::string> names;
  for (const ClassSpec& cs : c.dataset.classes) names.push_back(cs.name);
  for (std::size_t layer : c.attribution_layers) {
    AttributionSet set = read_attributions(run, layer);
    EATable table = conditional_ea(set, EmptyClassPolicy::kError, names);
    RankVector cw = rank_class_weighted(table);
    RankVector lb = rank_loss_based(set);
    std::string prefix = "rank/layer_" + std::to_string(layer);
    run.write(prefix + "_ea.csv", ea_table_csv(table));
    write_rank(run, artifacts::rank(layer, RankMethod::kClassWeighted), cw);
    write_rank(run, artifacts::rank(layer, RankMethod::kLossBased), lb);
    if (net.architecture().layers[layer].kind == LayerKind::kDense) {
      write_rank(run, artifacts::rank(layer, RankMethod::kL1Baseline),
                 rank_l1_baseline(net, layer));
    }
    const RankVector& chosen = c.rank_method == RankMethod::kLossBased ? lb : cw;
    run.write_json(prefix + "_hist.json", to_json(rank_histogram(chosen, c.histogram_bins)));

    std::vector<RankVector> per_category;
    for (std::size_t k = 0; k < set.num_classes; ++k) {
      per_category.push_back(rank_category(set, k));
      write_rank(run, artifacts::category_rank(layer, k), per_category.back());
    }
    OverlapResult ov = top_overlap(per_category, c.overlap_fraction);
    run.write_json(prefix + "_overlap.json", to_json(ov));
    run.log("layer " + std::to_string(layer) + ": " + std::to_string(cw.live_count()) + "/" +
            std::to_string(cw.size()) + " live, top-list single fraction " +
            format_fixed(ov.single_fraction(), 3));
  }
}

RankVector read_rank(StageRun& run, const std::string& rel) {
  return rank_vector_from_json(run.read_json(rel, "rank file", Stage::kRank));
}

void stage_sweep(const RunConfig& c, const StageOptions& options, StageRun& run) {
  std::vector<SweepStrategy> strategies = options.strategies.value_or(c.sweep_strategies);
  require(!strategies.empty(), ErrorKind::kInvalidArgument, "no sweep strategies");
  for (SweepStrategy s : strategies) {
    require(s != SweepStrategy::kCategory, ErrorKind::kInvalidArgument,
            "category pruning runs in the category-sweep stage");
  }
  Network net = run.model();
  Dataset eval = run.dataset().with_tag(c.eval_split);
  std::string eval_name(split_tag_name(c.eval_split));
  for (std::size_t layer : c.sweep_layers) {
    RankVector rv = read_rank(run, artifacts::rank(layer, c.rank_method));
    for (SweepStrategy s : strategies) {
      SweepOptions o;
      o.strategy = s;
      o.stride = c.sweep_stride;
      if (s == SweepStrategy::kRandom) o.random_seed = c.sweep_seed;
      SweepResult r = prune_sweep(net, layer, rv, eval, o, eval_name);
      std::string rel = artifacts::sweep(layer, s);
      run.write_json(rel, to_json(r));
      SweepResult one[] = {r};
      run.write(replace_ext(rel, ".csv"), sweep_csv(one, eval.class_names));
      run.log("layer " + std::to_string(layer) + " " + std::string(sweep_strategy_name(s)) +
              " accuracy AUC " + format_fixed(r.accuracy_auc(), 4));
    }
  }
}

void stage_category_sweep(const RunConfig& c, StageRun& run) {
  Network net = run.model();
  Dataset eval = run.dataset().with_tag(c.eval_split);
  std::string eval_name(split_tag_name(c.eval_split));
  for (std::size_t layer : c.category_layers) {
    for (std::size_t k = 0; k < c.dataset.classes.size(); ++k) {
      RankVector rv = read_rank(run, artifacts::category_rank(layer, k));
      SweepResult r = category_sweep(net, layer, rv, eval, c.category_stride, eval_name);
      std::string rel = artifacts::category_sweep(layer, k);
      run.write_json(rel, to_json(r));
      SweepResult one[] = {r};
      run.write(replace_ext(rel, ".csv"), sweep_csv(one, eval.class_names));
    }
    run.log("layer " + std::to_string(layer) + " done");
  }
}

std::vector<std::size_t> retrain_layers(const RunConfig& c) {
  return c.retrain_layers.empty() ? c.attribution_layers : c.retrain_layers;
}

void stage_retrain(const RunConfig& c, StageRun& run) {
  Network net = run.model();
  Splits s = make_splits(run.dataset(), c.eval_split);
  std::vector<std::size_t> layers = retrain_layers(c);
  std::vector<RankVector> ranks;
  for (std::size_t l : layers) ranks.push_back(read_rank(run, artifacts::rank(l, c.rank_method)));

  PruneMask mask = joint_mask(net, layers, ranks, c.retrain_fraction);
  EvalMetrics base = evaluate(net, s.eval);
  EvalMetrics pre = evaluate(net, s.eval, &mask);
  EvalMetrics pre_train = evaluate(net, s.train, &mask);
  const Dataset* val = s.validation.size() > 0 ? &s.validation : nullptr;
  RetrainResult rr = retrain_masked(net, mask, s.train, val, c.retrain);
  EvalMetrics post = evaluate(rr.network, s.eval, &mask);
  EvalMetrics post_train = evaluate(rr.network, s.train, &mask);
  run.log("accuracy base " + format_fixed(base.accuracy, 4) + ", pruned " +
          format_fixed(pre.accuracy, 4) + ", retrained " + format_fixed(post.accuracy, 4));

  json pruned = json::object();
  for (std::size_t l : layers) pruned[std::to_string(l)] = mask.pruned_count(l);
  run.write(artifacts::kRetrainModel, serialize_checkpoint(rr.network));
  run.write_json(artifacts::kRetrainMask, to_json(mask));
  run.write_json(artifacts::kRetrainSummary,
                 {{"fraction", c.retrain_fraction},
                  {"layers", layers},
                  {"pruned", pruned},
                  {"eval_split", split_tag_name(c.eval_split)},
                  {"baseline", to_json(base)},
                  {"pruned_eval", to_json(pre)},
                  {"retrained_eval", to_json(post)},
                  {"pruned_train", to_json(pre_train)},
                  {"retrained_train", to_json(post_train)},
                  {"parameters", param_count(net)},
                  {"parameters_after", masked_param_count(net, mask)},
                  {"log", to_json(rr.log)}});
}

void write_report(StageRun& run, const std::string& stem, const Report& r) {
  // The CSV twin goes first so a plot never exists without its values.
  run.write("report/" + stem + ".csv", r.csv);
  run.write("report/" + stem + ".svg", r.svg);
}

void stage_report(const RunConfig& c, StageRun& run) {
  Network net = run.model();
  std::vector<std::string> names;
  for (const ClassSpec& cs : c.dataset.classes) names.push_back(cs.name);
  const std::size_t classes = names.size();

  for (std::size_t layer : c.attribution_layers) {
    AttributionSet set = read_attributions(run, layer);
    RankVector rv = read_rank(run, artifacts::rank(layer, c.rank_method));
    EATable table = conditional_ea(set, EmptyClassPolicy::kError, names);
    std::string L = "L" + std::to_string(layer);

    // The top- and bottom-ranked live neurons, plus the first dead one.
    std::vector<std::size_t> shown;
    std::vector<std::size_t> desc = rv.descending();
    for (std::size_t i : desc) {
      if (rv.live[i]) {
        shown.push_back(i);
        break;
      }
    }
    for (auto it = desc.rbegin(); it != desc.rend(); ++it) {
      if (rv.live[*it]) {
        if (shown.empty() || shown.front() != *it) shown.push_back(*it);
        break;
      }
    }
    for (std::size_t i = 0; i < rv.size(); ++i) {
      if (!rv.live[i]) {
        shown.push_back(i);
        break;
      }
    }
    if (shown.empty()) shown.push_back(0);
    for (std::size_t i : shown) {
      write_report(run, "ea_map_" + L + "_n" + std::to_string(i),
                   ea_map_report(table, i, rv.values[i], names));
    }
    write_report(run, "rank_hist_" + L,
                 rank_hist_report(rank_histogram(rv, c.histogram_bins),
                                  "Rank histogram, layer " + std::to_string(layer)));
    write_report(run, "sorted_ea_" + L, sorted_ea_report(table, names));

    std::vector<RankVector> per_category;
    for (std::size_t k = 0; k < classes; ++k) {
      per_category.push_back(read_rank(run, artifacts::category_rank(layer, k)));
    }
    write_report(run, "overlap_" + L, overlap_report(top_overlap(per_category, c.overlap_fraction)));
  }

  std::size_t sweeps_found = 0;
  for (std::size_t layer : c.sweep_layers) {
    std::vector<SweepResult> sweeps;
    for (SweepStrategy s :
         {SweepStrategy::kBottomFirst, SweepStrategy::kTopFirst, SweepStrategy::kRandom}) {
      std::string rel = artifacts::sweep(layer, s);
      if (!run.exists(rel)) continue;
      sweeps.push_back(sweep_result_from_json(run.read_json(rel, "sweep file", Stage::kSweep)));
    }
    if (sweeps.empty()) continue;
    sweeps_found += sweeps.size();
    write_report(run, "sweep_curves_L" + std::to_string(layer), sweep_curves_report(sweeps));
  }
  if (sweeps_found == 0 && !c.sweep_layers.empty()) {
    SweepStrategy first =
        c.sweep_strategies.empty() ? SweepStrategy::kBottomFirst : c.sweep_strategies.front();
    run.need(artifacts::sweep(c.sweep_layers.front(), first), "sweep file", Stage::kSweep);
  }

  for (std::size_t layer : c.category_layers) {
    for (std::size_t k = 0; k < classes; ++k) {
      std::string rel = artifacts::category_sweep(layer, k);
      if (!run.exists(rel)) continue;
      SweepResult r = sweep_result_from_json(run.read_json(rel, "category sweep", Stage::kCategorySweep));
      write_report(run, "category_curves_L" + std::to_string(layer) + "_" + std::to_string(k),
                   category_curves_report(r, names));
    }
  }

  if (!c.param_percentages.empty()) {
    write_report(run, "param_table",
                 param_table_report(prune_report(net.architecture(), c.param_percentages)));
  }
}

}  // namespace

void RunConfig::validate() const {
  require(!workspace.empty(), ErrorKind::kInvalidArgument, "workspace is not set");
  dataset.validate();
  architecture.validate(true);
  train.validate();
  retrain.validate();
  ig.validate();
  require(shape_size(architecture.input_shape) ==
              dataset.channels * dataset.image_size * dataset.image_size,
          ErrorKind::kShapeMismatch, "architecture input does not match the dataset image size");
  require(architecture.shapes().back() == Shape{dataset.classes.size()},
          ErrorKind::kShapeMismatch, "architecture output does not match the class count");
  if (!splits.sizes.empty()) {
    std::size_t total = 0;
    for (std::size_t s : splits.sizes) total += s;
    require(total == dataset.count, ErrorKind::kInvalidArgument,
            "split sizes sum to " + std::to_string(total) + ", dataset count is " +
                std::to_string(dataset.count));
  }
  for (std::size_t l : attribution_layers) {
    require(architecture.is_rankable(l), ErrorKind::kInvalidArgument,
            "layer " + std::to_string(l) + " is not rankable");
  }
  check_subset(sweep_layers, attribution_layers, "sweep");
  check_subset(category_layers, attribution_layers, "category sweep");
  check_subset(retrain_layers, attribution_layers, "retrain");
  require(rank_method == RankMethod::kClassWeighted || rank_method == RankMethod::kLossBased,
          ErrorKind::kInvalidArgument, "ranking method must be class_weighted or loss_based");
  require(overlap_fraction > 0.0 && overlap_fraction <= 1.0, ErrorKind::kInvalidArgument,
          "overlap fraction must be in (0, 1]");
  require(sweep_stride > 0 && category_stride > 0, ErrorKind::kInvalidArgument,
          "strides must be positive");
  require(retrain_fraction >= 0.0 && retrain_fraction <= 1.0, ErrorKind::kInvalidArgument,
          "retrain fraction must be in [0, 1]");
  for (double p : param_percentages) {
    require(p >= 0.0 && p <= 100.0, ErrorKind::kInvalidArgument,
            "parameter percentages must be in [0, 100]");
  }
}

json to_json(const RunConfig& c) {
  std::vector<std::string> strategies;
  for (SweepStrategy s : c.sweep_strategies) strategies.emplace_back(sweep_strategy_name(s));
  json ig = to_json(c.ig);
  ig["layers"] = c.attribution_layers;
  ig["csv_max_samples"] = c.csv_max_samples;
  json retrain = to_json(c.retrain);
  retrain["fraction"] = c.retrain_fraction;
  retrain["layers"] = c.retrain_layers;
  return {{"dataset", to_json(c.dataset)},
          {"splits", to_json(c.splits)},
          {"architecture", to_json(c.architecture)},
          {"init_seed", c.init_seed},
          {"train", to_json(c.train)},
          {"attribution", ig},
          {"ranking",
           {{"method", rank_method_name(c.rank_method)},
            {"histogram_bins", c.histogram_bins},
            {"overlap_fraction", c.overlap_fraction}}},
          {"sweep",
           {{"layers", c.sweep_layers},
            {"strategies", strategies},
            {"stride", c.sweep_stride},
            {"random_seed", c.sweep_seed},
            {"eval_split", split_tag_name(c.eval_split)}}},
          {"category_sweep", {{"layers", c.category_layers}, {"stride", c.category_stride}}},
          {"retrain", retrain},
          {"report", {{"param_percentages", c.param_percentages}}}};
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    require(j.is_object(), ErrorKind::kInvalidArgument, "run config must be a JSON object");
    if (j.contains("workspace")) {
      fs::path ws = j.at("workspace").get<std::string>();
      c.workspace = ws.is_relative() && !base_dir.empty() ? base_dir / ws : ws;
    }
    require(j.contains("dataset"), ErrorKind::kInvalidArgument, "run config needs 'dataset'");
    require(j.contains("architecture"), ErrorKind::kInvalidArgument,
            "run config needs 'architecture'");
    c.dataset = dataset_config_from_json(load_json_ref(j.at("dataset"), base_dir));
    c.splits = j.contains("splits") ? split_spec_from_json(j.at("splits"))
                                    : SplitSpec::from_sizes({c.dataset.count});
    c.architecture = architecture_from_json(load_json_ref(j.at("architecture"), base_dir));
    c.init_seed = j.value("init_seed", std::uint64_t{0});
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));

    json a = j.value("attribution", json::object());
    c.ig = ig_settings_from_json(a);
    c.attribution_layers = numbers<std::size_t>(a, "layers", c.architecture.rankable_layers());
    c.csv_max_samples = a.value("csv_max_samples", c.csv_max_samples);

    json r = j.value("ranking", json::object());
    if (r.contains("method")) c.rank_method = parse_rank_method(r.at("method").get<std::string>());
    c.histogram_bins = r.value("histogram_bins", c.histogram_bins);
    c.overlap_fraction = r.value("overlap_fraction", c.overlap_fraction);

    json s = j.value("sweep", json::object());
    c.sweep_layers = numbers<std::size_t>(s, "layers", c.attribution_layers);
    std::vector<std::string> strategies = numbers<std::string>(
        s, "strategies", {"bottom_first", "top_first", "random"});
    for (const std::string& name : strategies) {
      c.sweep_strategies.push_back(parse_sweep_strategy(name));
    }
    c.sweep_stride = s.value("stride", c.sweep_stride);
    c.sweep_seed = s.value("random_seed", c.sweep_seed);
    if (s.contains("eval_split")) {
      c.eval_split = parse_split_tag(s.at("eval_split").get<std::string>());
    }

    json cs = j.value("category_sweep", json::object());
    c.category_layers = numbers<std::size_t>(cs, "layers", c.sweep_layers);
    c.category_stride = cs.value("stride", c.category_stride);

    json rt = j.value("retrain", json::object());
    c.retrain = train_config_from_json(rt);
    c.retrain_fraction = rt.value("fraction", c.retrain_fraction);
    c.retrain_layers = numbers<std::size_t>(rt, "layers", {});

    json rep = j.value("report", json::object());
    c.param_percentages = numbers<double>(rep, "param_percentages", {10, 25, 50, 75, 90});
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  require(fs::exists(path), ErrorKind::kMissingArtifact,
          "missing run config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, "cannot parse '" + path.string() + "': " + e.what());
  }
  RunConfig c = run_config_from_json(j, path.parent_path());
  if (const char* env = std::getenv("NEUROPRUNE_WORKSPACE"); env != nullptr && *env != '\0') {
    c.workspace = env;
  }
  return c;
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kGenData: return "gen-data";
    case Stage::kTrain: return "train";
    case Stage::kAttribute: return "attribute";
    case Stage::kRank: return "rank";
    case Stage::kSweep: return "sweep";
    case Stage::kCategorySweep: return "category-sweep";
    case Stage::kRetrain: return "retrain";
    case Stage::kReport: return "report";
    case Stage::kAll: return "all";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::kGenData, Stage::kTrain, Stage::kAttribute, Stage::kRank, Stage::kSweep,
                  Stage::kCategorySweep, Stage::kRetrain, Stage::kReport, Stage::kAll}) {
    if (stage_name(s) == name) return s;
  }
  fail(ErrorKind::kInvalidArgument, "unknown stage '" + std::string(name) + "'");
}

void run_stage(const RunConfig& config, Stage stage, const StageOptions& options,
               const LogFn& log) {
  config.validate();
  if (stage == Stage::kAll) {
    for (Stage s : {Stage::kGenData, Stage::kTrain, Stage::kAttribute, Stage::kRank,
                    Stage::kSweep, Stage::kCategorySweep, Stage::kRetrain, Stage::kReport}) {
      run_stage(config, s, options, log);
    }
    return;
  }
  std::error_code ec;
  fs::create_directories(config.workspace, ec);
  require(!ec, ErrorKind::kIo,
          "cannot create workspace '" + config.workspace.string() + "': " + ec.message());

  StageRun run(config, stage, log);
  switch (stage) {
    case Stage::kGenData: stage_gen_data(config, run); break;
    case Stage::kTrain: stage_train(config, run); break;
    case Stage::kAttribute: stage_attribute(config, run); break;
    case Stage::kRank: stage_rank(config, run); break;
    case Stage::kSweep: stage_sweep(config, options, run); break;
    case Stage::kCategorySweep: stage_category_sweep(config, run); break;
    case Stage::kRetrain: stage_retrain(config, run); break;
    case Stage::kReport: stage_report(config, run); break;
    case Stage::kAll: break;
  }
  run.commit();
}

}  // namespace neuroprune
