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

#ifndef NEUROPRUNE_DATASET_HPP_
#define NEUROPRUNE_DATASET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuroprune/tensor.hpp"

namespace neuroprune {

enum class SplitTag : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

std::string_view split_tag_name(SplitTag tag);
SplitTag parse_split_tag(std::string_view name);

// Parametric image families standing in for the five rover categories.
enum class Renderer { kDisk, kGradient, kAnnulus, kGrating, kPoint };

std::string_view renderer_name(Renderer r);
Renderer parse_renderer(std::string_view name);

struct ClassSpec {
  std::string name;
  Renderer renderer = Renderer::kDisk;
  double prior = 0.0;
};

struct DatasetConfig {
  std::vector<ClassSpec> classes;
  std::size_t count = 0;  // total samples
  std::size_t image_size = 32;
  std::size_t channels = 1;
  double noise = 0.1;  // uniform pixel noise amplitude
  std::uint64_t seed = 0;

  // Five classes with the rover training-set imbalance: the priors are the
  // class counts 1422/342/252/190/182 out of 2388.
  static DatasetConfig rover_default(std::size_t count, std::uint64_t seed);

  void validate() const;
};

nlohmann::json to_json(const DatasetConfig& config);
DatasetConfig dataset_config_from_json(const nlohmann::json& j);

// Images in [0,1], stored [N x C x H x W]. `ids` are stable sample ids that
// survive subsetting; `tags` assign every sample to train/val/test.
struct Dataset {
  Shape image_shape;  // {C, H, W}
  std::vector<float> images;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint32_t> ids;
  std::vector<SplitTag> tags;
  std::vector<std::string> class_names;
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return class_names.size(); }
  std::size_t image_size() const { return shape_size(image_shape); }
  std::span<const float> image(std::size_t i) const {
    return std::span<const float>(images).subspan(i * image_size(), image_size());
  }

  std::vector<std::size_t> class_counts() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset with_tag(SplitTag tag) const;
  Dataset with_label(std::size_t label) const;

  bool operator==(const Dataset&) const = default;
};

// Per-class counts for `total` samples: floor(total * prior) plus the
// remaining units to the largest fractional parts, ties to the lower class.
std::vector<std::size_t> allocate_counts(std::span<const double> priors, std::size_t total);

Dataset generate(const DatasetConfig& config);

struct SplitSpec {
  // Either fractions summing to 1 or absolute sizes summing to the dataset
  // size; exactly one is non-empty.
  std::vector<double> fractions;
  std::vector<std::size_t> sizes;

  static SplitSpec from_fractions(std::vector<double> f);
  static SplitSpec from_sizes(std::vector<std::size_t> s);
};

nlohmann::json to_json(const SplitSpec& spec);
SplitSpec split_spec_from_json(const nlohmann::json& j);

// Stratified, deterministic assignment of tags: every (class, split) cell is
// within one sample of its proportional share, split totals are exact.
void assign_splits(Dataset& dataset, const SplitSpec& spec, std::uint64_t seed);

// Returns {train, validation, test} after assign_splits.
std::array<Dataset, 3> split(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed);

// Generates a dataset with split tags already assigned. Each split's class
// counts are allocate_counts(priors, split size), so every split, including
// the training split, matches the priors within one sample per class.
// config.count must equal the split total.
Dataset generate_tagged(const DatasetConfig& config, const SplitSpec& spec);

// "NPDS1\n" | JSON header | "\n\0" | f32 images | u8 labels
inline constexpr std::string_view kDatasetMagic = "NPDS1\n";

std::string serialize_dataset(const Dataset& dataset);
Dataset deserialize_dataset(std::string_view bytes);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace neuroprune

#endif  // NEUROPRUNE_DATASET_HPP_
