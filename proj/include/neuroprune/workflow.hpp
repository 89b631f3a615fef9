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

#ifndef NEUROPRUNE_WORKFLOW_HPP_
#define NEUROPRUNE_WORKFLOW_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/architecture.hpp"
#include "neuroprune/attribution.hpp"
#include "neuroprune/dataset.hpp"
#include "neuroprune/pruning.hpp"
#include "neuroprune/ranking.hpp"
#include "neuroprune/training.hpp"

namespace neuroprune {

std::string_view tool_version();

// Everything a run depends on. Every seed lives here; nothing else feeds
// randomness into a run.
struct RunConfig {
  std::filesystem::path workspace;

  DatasetConfig dataset;
  SplitSpec splits;
  Architecture architecture;
  std::uint64_t init_seed = 0;
  TrainConfig train;

  std::vector<std::size_t> attribution_layers;
  IgSettings ig;
  std::size_t csv_max_samples = 64;

  RankMethod rank_method = RankMethod::kClassWeighted;
  std::size_t histogram_bins = 0;  // 0 = Freedman-Diaconis
  double overlap_fraction = 0.05;

  std::vector<std::size_t> sweep_layers;
  std::vector<SweepStrategy> sweep_strategies;
  std::size_t sweep_stride = 1;
  std::uint64_t sweep_seed = 0;
  SplitTag eval_split = SplitTag::kTest;

  std::vector<std::size_t> category_layers;
  std::size_t category_stride = 1;

  double retrain_fraction = 0.95;
  std::vector<std::size_t> retrain_layers;  // empty = every attributed layer
  TrainConfig retrain;

  std::vector<double> param_percentages;

  void validate() const;
};

// The workspace path is left out: it does not change any output.
nlohmann::json to_json(const RunConfig& config);

// "dataset" and "architecture" may be inline objects or paths to JSON files,
// resolved against base_dir like a relative workspace.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});

// Reads a RunConfig file; NEUROPRUNE_WORKSPACE, when set, replaces the
// workspace it names.
RunConfig load_run_config(const std::filesystem::path& path);

enum class Stage {
  kGenData,
  kTrain,
  kAttribute,
  kRank,
  kSweep,
  kCategorySweep,
  kRetrain,
  kReport,
  kAll,
};

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);

struct StageOptions {
  // Replaces the configured sweep strategies for the sweep stage.
  std::optional<std::vector<SweepStrategy>> strategies;
};

using LogFn = std::function<void(std::string_view line)>;

// Runs one stage (or all of them in order) in the config's workspace. Each
// stage checks its inputs first and fails with kMissingArtifact naming the
// first missing file. Outputs are written atomically and recorded in
// workspace/manifest.json together with the hashes of the inputs they were
// computed from.
void run_stage(const RunConfig& config, Stage stage, const StageOptions& options = {},
               const LogFn& log = {});

// Workspace-relative artifact paths.
namespace artifacts {
inline constexpr std::string_view kDataset = "data/dataset.npds";
inline constexpr std::string_view kDatasetSummary = "data/dataset.json";
inline constexpr std::string_view kModel = "model/model.nprn";
inline constexpr std::string_view kTrainLog = "model/train_log.json";
inline constexpr std::string_view kRetrainModel = "retrain/model.nprn";
inline constexpr std::string_view kRetrainMask = "retrain/mask.json";
inline constexpr std::string_view kRetrainSummary = "retrain/summary.json";
inline constexpr std::string_view kManifest = "manifest.json";

std::string attribution(std::size_t layer);
std::string rank(std::size_t layer, RankMethod method);
std::string category_rank(std::size_t layer, std::size_t category);
std::string sweep(std::size_t layer, SweepStrategy strategy);
std::string category_sweep(std::size_t layer, std::size_t category);
}  // namespace artifacts

}  // namespace neuroprune

#endif  // NEUROPRUNE_WORKFLOW_HPP_
