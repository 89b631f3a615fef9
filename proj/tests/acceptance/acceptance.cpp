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

// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N]... [--only N]...
//
// Exits non-zero when a criterion fails that was not listed with
// --expect-fail. Expected failures are still printed as FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "neuroprune/attribution.hpp"
#include "neuroprune/io.hpp"
#include "neuroprune/pruning.hpp"
#include "neuroprune/ranking.hpp"
#include "neuroprune/workflow.hpp"

using namespace neuroprune;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

// 1. Completeness on untrained toy split networks.
Outcome completeness() {
  RunConfig config = fixtures::toy_config();
  Dataset test = fixtures::toy_data(config).test;
  std::vector<std::size_t> layers = config.architecture.rankable_layers();
  auto t0 = Clock::now();
  double worst64 = 0.0, worst4096 = 0.0;
  const std::size_t nets = 50;
  for (std::size_t n = 0; n < nets; ++n) {
    Network net(config.architecture, 1000 + n);
    std::size_t layer = layers[n % layers.size()];
    std::span<const float> x = test.image((n * 37) % test.size());
    for (std::size_t steps : {std::size_t{64}, std::size_t{4096}}) {
      IgSettings s = config.ig;
      s.steps = steps;
      InternalAttributor attributor(net, layer, s);
      AttributionMatrix m = attributor.attribute(x);
      double g = *std::max_element(m.gaps.begin(), m.gaps.end());
      (steps == 64 ? worst64 : worst4096) = std::max(steps == 64 ? worst64 : worst4096, g);
    }
  }
  double secs = seconds_since(t0);
  bool pass = worst64 < 1e-3 && worst4096 < 1e-5 && secs < 60.0;
  return {pass, "50 nets, max gap " + fmt("%.2e", worst64) + " @64, " + fmt("%.2e", worst4096) +
                    " @4096, " + fmt("%.1fs", secs)};
}

// 2. A linear pre-softmax tail gives H_i * W_ji exactly at one step.
Outcome linearity() {
  RunConfig config = fixtures::toy_config();
  Dataset test = fixtures::toy_data(config).test;
  const std::size_t layer = fixtures::toy_dense2(config.architecture);
  IgSettings s;
  s.steps = 1;
  s.target = TargetMode::kLogit;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : kSeeds) {
    Network net(config.architecture, seed);
    InternalAttributor attributor(net, layer, s);
    const auto& w = attributor.split().tail.params(0).weights;
    for (std::size_t i = 0; i < 10; ++i) {
      std::span<const float> x = test.image(i * 13);
      AttributionMatrix m = attributor.attribute(x);
      for (std::size_t a = 0; a < m.neurons; ++a) {
        for (std::size_t j = 0; j < m.outputs; ++j) {
          double expected = m.activations[a] * static_cast<double>(w[j * m.neurons + a]);
          worst = std::max(worst, std::abs(m.at(a, j) - expected));
          ++checked;
        }
      }
    }
  }
  return {worst <= 1e-6, std::to_string(checked) + " entries, max deviation " + fmt("%.2e", worst)};
}

// 3. Dead neurons of the trained toy net are exactly zero everywhere.
Outcome dead_neurons() {
  RunConfig config = fixtures::toy_config();
  std::size_t dead = 0;
  bool clean = true;
  for (std::size_t layer : config.attribution_layers) {
    AttributionSet set = fixtures::toy_attributions(1, layer);
    EATable t = conditional_ea(set);
    RankVector cw = rank_class_weighted(t);
    RankVector lb = rank_loss_based(set);
    for (std::size_t i = 0; i < set.neurons; ++i) {
      bool fired = false;
      for (std::size_t s = 0; s < set.size(); ++s) fired |= set.sample_activations(s)[i] != 0.0;
      if (fired) continue;
      ++dead;
      for (std::size_t s = 0; s < set.size(); ++s) {
        for (std::size_t j = 0; j < set.outputs; ++j) {
          clean &= set.sample_values(s)[i * set.outputs + j] == 0.0;
        }
        clean &= set.sample_loss(s)[i] == 0.0;
      }
      for (std::size_t j = 0; j < t.outputs; ++j) {
        for (std::size_t k = 0; k < t.classes; ++k) clean &= t.at(i, j, k) == 0.0;
      }
      clean &= cw.values[i] == 0.0 && lb.values[i] == 0.0 && !cw.live[i] && !lb.live[i];
    }
  }
  return {clean && dead > 0, std::to_string(dead) + " dead neurons across " +
                                 std::to_string(config.attribution_layers.size()) + " layers"};
}

// 4. Law of total expectation against the direct mean.
Outcome total_expectation() {
  RunConfig config = fixtures::toy_config();
  double worst = 0.0;
  for (std::size_t layer : config.attribution_layers) {
    AttributionSet set = fixtures::toy_attributions(1, layer);
    std::vector<double> a = conditional_ea(set).total();
    std::vector<double> b = direct_mean_ea(set);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return {worst <= 1e-12, "max deviation " + fmt("%.2e", worst)};
}

// 5. Backprop against central differences on nets with every layer kind.
Outcome gradients() {
  std::set<LayerKind> kinds;
  double worst = 0.0;
  std::size_t entries = 0;
  const std::size_t nets = 24;
  for (std::uint64_t seed = 0; seed < nets; ++seed) {
    Network net = fixtures::every_kind_net(seed);
    for (const LayerSpec& l : net.architecture().layers) kinds.insert(l.kind);
    BasicNetwork<double> net64 = net.cast<double>();
    std::vector<float> xf = fixtures::random_input(net.input_size(), 70 + seed);
    std::vector<double> x(xf.begin(), xf.end());
    std::vector<double> c;
    for (std::size_t j = 0; j < net.output_size(); ++j) c.push_back(std::sin(1.0 + seed + j));
    fixtures::GradientCheck g = fixtures::gradient_check(net64, x, c, 1e-5);
    worst = std::max(worst, g.max_relative_error);
    entries += g.entries;
  }
  bool pass = worst < 1e-3 && kinds.size() == 7;
  return {pass, std::to_string(nets) + " nets, " + std::to_string(entries) + " entries, " +
                    std::to_string(kinds.size()) + " layer kinds, max rel error " +
                    fmt("%.2e", worst)};
}

struct SeedCurves {
  SweepResult bottom, top, random;
};

SeedCurves seed_curves(std::uint64_t seed) {
  RunConfig config = fixtures::toy_config();
  const std::size_t layer = fixtures::toy_dense2(config.architecture);
  Network net = fixtures::trained_toy(seed);
  RankVector rank = rank_class_weighted(conditional_ea(fixtures::toy_attributions(seed, layer)));
  Dataset eval = fixtures::toy_data(config).test;
  SweepOptions o;
  SeedCurves c;
  o.strategy = SweepStrategy::kBottomFirst;
  c.bottom = prune_sweep(net, layer, rank, eval, o);
  o.strategy = SweepStrategy::kTopFirst;
  c.top = prune_sweep(net, layer, rank, eval, o);
  o.strategy = SweepStrategy::kRandom;
  o.random_seed = config.sweep_seed;
  c.random = prune_sweep(net, layer, rank, eval, o);
  return c;
}

// 6. Pruning order on the second dense layer across five training seeds.
Outcome ranked_pruning() {
  auto t0 = Clock::now();
  std::size_t passed = 0;
  std::string per_seed;
  for (std::uint64_t seed : kSeeds) {
    SeedCurves c = seed_curves(seed);
    const double base = c.bottom.points.front().metrics.accuracy;
    const std::size_t m = c.bottom.width;
    const double ab = c.bottom.accuracy_auc(), ar = c.random.accuracy_auc(),
                 at = c.top.accuracy_auc();

    bool top_drop = false;
    for (const SweepPoint& p : c.top.points) {
      if (10 * p.n_pruned <= m && p.metrics.accuracy < 0.5 * base) top_drop = true;
    }
    bool bottom_holds = true;
    for (const SweepPoint& p : c.bottom.points) {
      if (p.n_pruned <= c.bottom.at_or_after((m + 1) / 2).n_pruned) {
        bottom_holds &= p.metrics.accuracy > 0.9 * base;
      }
    }
    bool ok = ab > ar && ar > at && top_drop && bottom_holds;
    passed += ok ? 1 : 0;
    per_seed += " s" + std::to_string(seed) + "[" + fmt("%.3f", ab) + "/" + fmt("%.3f", ar) +
                "/" + fmt("%.3f", at) + (top_drop ? " drop" : " nodrop") +
                (bottom_holds ? " hold" : " nohold") + "]";
  }
  double secs = seconds_since(t0);
  return {passed >= 4 && secs < 600.0, std::to_string(passed) + "/5 seeds, AUC b/r/t" + per_seed +
                                           ", " + fmt("%.0fs", secs)};
}

// 7. Category-specific pruning of the top 20% per category.
Outcome category_pruning() {
  RunConfig config = fixtures::toy_config();
  const std::size_t layer = fixtures::toy_dense2(config.architecture);
  Network net = fixtures::trained_toy(1);
  AttributionSet set = fixtures::toy_attributions(1, layer);
  Dataset test = fixtures::toy_data(config).test;
  EvalMetrics base = evaluate(net, test);
  const std::size_t take =
      static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(set.neurons)));
  std::size_t passed = 0;
  std::string detail;
  for (std::size_t k = 0; k < test.num_classes(); ++k) {
    RankVector rv = rank_category(set, k);
    std::vector<std::size_t> order;
    for (std::size_t i : rv.descending()) {
      if (rv.live[i]) order.push_back(i);
    }
    PruneMask mask = mask_from_order(net.architecture(), layer, order, std::min(take, order.size()));
    EvalMetrics m = evaluate(net, test, &mask);
    bool ok = m.class_accuracy[k] < 0.2;
    for (std::size_t c = 0; c < test.num_classes(); ++c) {
      if (c != k) ok &= m.class_accuracy[c] > 0.8 * base.class_accuracy[c];
    }
    passed += ok ? 1 : 0;
    detail += " k" + std::to_string(k) + "=" + fmt("%.2f", m.class_accuracy[k]) + (ok ? "" : "!");
  }
  return {passed >= 4, std::to_string(passed) + "/5 categories, pruned " + std::to_string(take) +
                           " of " + std::to_string(set.neurons) + ";" + detail};
}

// 8. Joint 95% pruning then masked retraining.
Outcome retrain_recovery() {
  RunConfig config = fixtures::toy_config();
  Network net = fixtures::trained_toy(1);
  fixtures::Splits data = fixtures::toy_data(config);
  std::vector<std::size_t> layers = config.retrain_layers.empty() ? config.attribution_layers
                                                                  : config.retrain_layers;
  std::vector<RankVector> ranks;
  for (std::size_t l : layers) {
    ranks.push_back(rank_class_weighted(conditional_ea(fixtures::toy_attributions(1, l))));
  }
  PruneMask mask = joint_mask(net, layers, ranks, config.retrain_fraction);
  double base = evaluate(net, data.test).accuracy;
  double pre = evaluate(net, data.test, &mask).accuracy;
  RetrainResult r = retrain_masked(net, mask, data.train, &data.validation, config.retrain);
  double post = evaluate(r.network, data.test, &mask).accuracy;
  bool pass = base - post <= 0.02 && pre < post;
  return {pass, "base " + fmt("%.4f", base) + ", pruned " + fmt("%.4f", pre) + ", retrained " +
                    fmt("%.4f", post)};
}

// 9. Parameter accounting.
Outcome parameter_accounting() {
  Architecture small;
  small.input_shape = {4};
  small.layers = {LayerSpec::dense(4, 3), LayerSpec::relu(), LayerSpec::dense(3, 2),
                  LayerSpec::softmax()};
  bool exact = param_count(small) == 23;
  for (std::size_t n = 0; n < 3; ++n) {
    PruneMask one = PruneMask::all_active(small);
    one.set_active(0, n, false);
    exact &= param_count(small) - masked_param_count(small, one) == 7;
  }
  PruneMask two = PruneMask::all_active(small);
  two.set_active(0, 0, false);
  two.set_active(0, 2, false);
  exact &= param_count(small) - masked_param_count(small, two) == 14;

  Architecture toy = fixtures::toy_config().architecture;
  std::vector<double> pcts = {10, 20, 30, 40, 50, 60, 70, 80, 90, 95};
  bool dominates = true;
  std::string row50;
  for (const ParameterRow& r : prune_report(toy, pcts)) {
    dominates &= r.cut_percent > r.mask_percent;
    if (r.mask_percent == 50) row50 = fmt("%.2f%%", r.cut_percent);
  }
  return {exact && dominates, std::string("4-3-2 fixture ") + (exact ? "exact" : "WRONG") +
                                  ", toy 50% mask cuts " + row50 + ", cut > mask on " +
                                  std::to_string(pcts.size()) + " rows"};
}

// 10. Whole-workspace determinism.
Outcome determinism() {
  auto hash_tree = [](const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
    }
    return out;
  };
  std::vector<std::map<std::string, std::string>> trees;
  for (const char* name : {"acceptance_det_a", "acceptance_det_b"}) {
    RunConfig c = fixtures::tiny_config();
    c.workspace = fixtures::scratch_dir(name);
    run_stage(c, Stage::kAll);
    trees.push_back(hash_tree(c.workspace));
  }
  // Stage-by-stage rerun in place must reproduce the same bytes.
  RunConfig c = fixtures::tiny_config();
  c.workspace = fixtures::cache_dir() / "scratch" / "acceptance_det_a";
  for (Stage s : {Stage::kGenData, Stage::kTrain, Stage::kAttribute, Stage::kRank, Stage::kSweep,
                  Stage::kCategorySweep, Stage::kRetrain, Stage::kReport}) {
    run_stage(c, s);
  }
  trees.push_back(hash_tree(c.workspace));
  bool pass = trees[0] == trees[1] && trees[0] == trees[2];
  return {pass, std::to_string(trees[0].size()) + " files hashed over 3 runs"};
}

// 11. Top-5% lists per category are mostly disjoint.
Outcome overlap() {
  RunConfig config = fixtures::toy_config();
  const std::size_t layer = fixtures::toy_dense2(config.architecture);
  AttributionSet set = fixtures::toy_attributions(1, layer);
  std::vector<RankVector> per;
  for (std::size_t k = 0; k < set.num_classes; ++k) per.push_back(rank_category(set, k));
  OverlapResult o = top_overlap(per, 0.05);
  double f = o.single_fraction();
  return {f >= 0.6, fmt("%.3f", f) + " of listed neurons in exactly one list (" +
                        std::to_string(o.list_size) + " per category)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_fail, only;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    int n = std::atoi(argv[i + 1]);
    if (flag == "--expect-fail") {
      expected_fail.insert(n);
    } else if (flag == "--only") {
      only.insert(n);
    } else {
      std::fprintf(stderr, "unknown argument %s\n", argv[i]);
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"completeness", completeness},
      {"linearity", linearity},
      {"dead-neuron zero", dead_neurons},
      {"total expectation", total_expectation},
      {"gradient check", gradients},
      {"pruning order", ranked_pruning},
      {"category pruning", category_pruning},
      {"retrain recovery", retrain_recovery},
      {"parameter accounting", parameter_accounting},
      {"determinism", determinism},
      {"top overlap", overlap},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %2d %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str(), !o.pass && expected_fail.count(id) ? " (expected)" : "");
    std::fflush(stdout);
    if (!o.pass && !expected_fail.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
