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

#include "neuroprune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"
#include "neuroprune/rng.hpp"

namespace neuroprune {

namespace {

constexpr std::array<std::pair<Renderer, std::string_view>, 5> kRendererNames = {{
    {Renderer::kDisk, "disk"},
    {Renderer::kGradient, "gradient"},
    {Renderer::kAnnulus, "annulus"},
    {Renderer::kGrating, "grating"},
    {Renderer::kPoint, "point"},
}};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Renders one noiseless H x W intensity plane for the given family.
void render(Renderer renderer, std::size_t size, Rng& rng, std::vector<double>& plane) {
  const double s = static_cast<double>(size);
  plane.assign(size * size, 0.0);
  auto at = [&](std::size_t y, std::size_t x) -> double& { return plane[y * size + x]; };
  auto dist = [](double x, double y, double cx, double cy) {
    return std::hypot(x - cx, y - cy);
  };

  switch (renderer) {
    case Renderer::kDisk: {
      const double cx = rng.uniform(0.3 * s, 0.7 * s), cy = rng.uniform(0.3 * s, 0.7 * s);
      const double r = rng.uniform(0.15 * s, 0.3 * s);
      const double fg = rng.uniform(0.6, 1.0), bg = rng.uniform(0.0, 0.25);
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x)
          at(y, x) = dist(x + 0.5, y + 0.5, cx, cy) <= r ? fg : bg;
      break;
    }
    case Renderer::kGradient: {
      const double theta = rng.uniform(0.0, kTwoPi);
      const double lo = rng.uniform(0.0, 0.2), hi = rng.uniform(0.7, 1.0);
      const double c = s / 2.0;
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double t = ((x + 0.5 - c) * std::cos(theta) + (y + 0.5 - c) * std::sin(theta)) / s;
          at(y, x) = lo + (hi - lo) * std::clamp(0.5 + t, 0.0, 1.0);
        }
      }
      break;
    }
    case Renderer::kAnnulus: {
      const double cx = rng.uniform(0.35 * s, 0.65 * s), cy = rng.uniform(0.35 * s, 0.65 * s);
      const double outer = rng.uniform(0.25 * s, 0.4 * s);
      const double width = std::max(1.5, rng.uniform(0.08 * s, 0.15 * s));
      const double fg = rng.uniform(0.6, 1.0), bg = rng.uniform(0.0, 0.25);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double d = dist(x + 0.5, y + 0.5, cx, cy);
          at(y, x) = (d <= outer && d >= outer - width) ? fg : bg;
        }
      }
      break;
    }
    case Renderer::kGrating: {
      const double theta = rng.uniform(0.0, std::numbers::pi);
      const double period = std::max(3.0, rng.uniform(s / 8.0, s / 4.0));
      const double phase = rng.uniform(0.0, kTwoPi);
      const double fg = rng.uniform(0.6, 1.0), bg = rng.uniform(0.0, 0.25);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double t = x * std::cos(theta) + y * std::sin(theta);
          at(y, x) = std::sin(kTwoPi * t / period + phase) > 0.0 ? fg : bg;
        }
      }
      break;
    }
    case Renderer::kPoint: {
      const double cx = rng.uniform(0.2 * s, 0.8 * s), cy = rng.uniform(0.2 * s, 0.8 * s);
      const double sigma = std::max(0.75, rng.uniform(0.04 * s, 0.08 * s));
      const double peak = rng.uniform(0.8, 1.0), bg = rng.uniform(0.0, 0.1);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double d = dist(x + 0.5, y + 0.5, cx, cy);
          at(y, x) = bg + peak * std::exp(-d * d / (2.0 * sigma * sigma));
        }
      }
      break;
    }
  }
}

}  // namespace

std::string_view split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain: return "train";
    case SplitTag::kValidation: return "val";
    case SplitTag::kTest: return "test";
  }
  return "unknown";
}

SplitTag parse_split_tag(std::string_view name) {
  if (name == "train") return SplitTag::kTrain;
  if (name == "val" || name == "validation") return SplitTag::kValidation;
  if (name == "test") return SplitTag::kTest;
  fail(ErrorKind::kInvalidArgument, "unknown split '" + std::string(name) + "'");
}

std::string_view renderer_name(Renderer r) {
  for (const auto& [k, name] : kRendererNames) {
    if (k == r) return name;
  }
  return "unknown";
}

Renderer parse_renderer(std::string_view name) {
  for (const auto& [k, n] : kRendererNames) {
    if (n == name) return k;
  }
  fail(ErrorKind::kInvalidArgument, "unknown renderer '" + std::string(name) + "'");
}

DatasetConfig DatasetConfig::rover_default(std::size_t count, std::uint64_t seed) {
  constexpr std::array<double, 5> kCounts = {1422, 342, 252, 190, 182};
  constexpr double kTotal = 2388;
  DatasetConfig c;
  c.classes = {
      {"close_up_rock", Renderer::kDisk, kCounts[0] / kTotal},
      {"distant_landscape", Renderer::kGradient, kCounts[1] / kTotal},
      {"drill_hole", Renderer::kAnnulus, kCounts[2] / kTotal},
      {"rover_part", Renderer::kGrating, kCounts[3] / kTotal},
      {"sun", Renderer::kPoint, kCounts[4] / kTotal},
  };
  c.count = count;
  c.seed = seed;
  return c;
}

void DatasetConfig::validate() const {
  require(!classes.empty() && classes.size() <= 255, ErrorKind::kInvalidArgument,
          "dataset needs between 1 and 255 classes");
  double sum = 0.0;
  for (const ClassSpec& c : classes) {
    require(c.prior >= 0.0, ErrorKind::kInvalidArgument,
            "class '" + c.name + "' has a negative prior");
    sum += c.prior;
  }
  require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::kInvalidArgument,
          "class priors must sum to 1, got " + format_double(sum));
  require(count >= classes.size(), ErrorKind::kInvalidArgument,
          "sample count " + std::to_string(count) + " is smaller than the class count");
  require(image_size >= 8, ErrorKind::kInvalidArgument,
          "image size " + std::to_string(image_size) + " too small for the renderers (< 8)");
  require(channels >= 1, ErrorKind::kInvalidArgument, "channels must be positive");
  require(noise >= 0.0, ErrorKind::kInvalidArgument, "noise amplitude must be non-negative");
}

nlohmann::json to_json(const DatasetConfig& config) {
  nlohmann::json classes = nlohmann::json::array();
  for (const ClassSpec& c : config.classes) {
    classes.push_back({{"name", c.name}, {"renderer", renderer_name(c.renderer)}, {"prior", c.prior}});
  }
  return {{"classes", classes},       {"count", config.count},
          {"image_size", config.image_size}, {"channels", config.channels},
          {"noise", config.noise},    {"seed", config.seed}};
}

DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
  DatasetConfig c = DatasetConfig::rover_default(j.value("count", std::size_t{2388}),
                                                 j.value("seed", std::uint64_t{0}));
  try {
    if (j.contains("classes")) {
      c.classes.clear();
      for (const auto& e : j.at("classes")) {
        c.classes.push_back({e.at("name").get<std::string>(),
                             parse_renderer(e.at("renderer").get<std::string>()),
                             e.at("prior").get<double>()});
      }
    }
    c.image_size = j.value("image_size", c.image_size);
    c.channels = j.value("channels", c.channels);
    c.noise = j.value("noise", c.noise);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid dataset config: ") + e.what());
  }
  return c;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (std::uint8_t l : labels) ++counts[l];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.image_shape = image_shape;
  out.class_names = class_names;
  out.seed = seed;
  const std::size_t n = image_size();
  out.images.reserve(indices.size() * n);
  for (std::size_t i : indices) {
    require(i < size(), ErrorKind::kInvalidArgument, "subset index out of range");
    const auto img = image(i);
    out.images.insert(out.images.end(), img.begin(), img.end());
    out.labels.push_back(labels[i]);
    out.ids.push_back(ids[i]);
    out.tags.push_back(tags[i]);
  }
  return out;
}

Dataset Dataset::with_tag(SplitTag tag) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (tags[i] == tag) idx.push_back(i);
  }
  return subset(idx);
}

Dataset Dataset::with_label(std::size_t label) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (labels[i] == label) idx.push_back(i);
  }
  return subset(idx);
}

std::vector<std::size_t> allocate_counts(std::span<const double> priors, std::size_t total) {
  std::vector<std::size_t> counts(priors.size());
  std::vector<double> remainder(priors.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < priors.size(); ++k) {
    const double quota = priors[k] * static_cast<double>(total);
    counts[k] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[k] = quota - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  std::vector<std::size_t> order(priors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size(), ++assigned) {
    ++counts[order[i]];
  }
  return counts;
}

namespace {

std::vector<double> priors_of(const DatasetConfig& config) {
  std::vector<double> priors;
  for (const ClassSpec& c : config.classes) priors.push_back(c.prior);
  return priors;
}

Dataset render_dataset(const DatasetConfig& config, const std::vector<std::size_t>& counts) {

  Dataset ds;
  ds.image_shape = {config.channels, config.image_size, config.image_size};
  ds.seed = config.seed;
  for (const ClassSpec& c : config.classes) ds.class_names.push_back(c.name);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    ds.labels.insert(ds.labels.end(), counts[k], static_cast<std::uint8_t>(k));
  }
  Rng order_rng(mix_seed(config.seed, 0xda7a));
  order_rng.shuffle(std::span<std::uint8_t>(ds.labels));

  const std::size_t plane = config.image_size * config.image_size;
  ds.images.resize(config.count * config.channels * plane);
  ds.ids.resize(config.count);
  ds.tags.assign(config.count, SplitTag::kTrain);
  std::vector<double> intensity;
  for (std::size_t i = 0; i < config.count; ++i) {
    ds.ids[i] = static_cast<std::uint32_t>(i);
    Rng rng(mix_seed(config.seed, i));
    render(config.classes[ds.labels[i]].renderer, config.image_size, rng, intensity);
    float* dst = ds.images.data() + i * config.channels * plane;
    for (std::size_t c = 0; c < config.channels; ++c) {
      for (std::size_t p = 0; p < plane; ++p) {
        const double v = intensity[p] + rng.uniform(-config.noise, config.noise);
        dst[c * plane + p] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return ds;
}

}  // namespace

Dataset generate(const DatasetConfig& config) {
  config.validate();
  return render_dataset(config, allocate_counts(priors_of(config), config.count));
}

SplitSpec SplitSpec::from_fractions(std::vector<double> f) {
  SplitSpec s;
  s.fractions = std::move(f);
  return s;
}

SplitSpec SplitSpec::from_sizes(std::vector<std::size_t> sizes) {
  SplitSpec s;
  s.sizes = std::move(sizes);
  return s;
}

nlohmann::json to_json(const SplitSpec& spec) {
  if (!spec.sizes.empty()) return {{"sizes", spec.sizes}};
  return {{"fractions", spec.fractions}};
}

SplitSpec split_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("sizes")) return SplitSpec::from_sizes(j.at("sizes").get<std::vector<std::size_t>>());
    return SplitSpec::from_fractions(j.at("fractions").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid split spec: ") + e.what());
  }
}

namespace {

std::vector<std::size_t> split_totals(const SplitSpec& spec, std::size_t n) {
  std::vector<std::size_t> totals;
  if (!spec.sizes.empty()) {
    require(spec.fractions.empty(), ErrorKind::kInvalidArgument,
            "split spec has both sizes and fractions");
    totals = spec.sizes;
    const std::size_t sum = std::accumulate(totals.begin(), totals.end(), std::size_t{0});
    require(sum == n, ErrorKind::kInvalidArgument,
            "split sizes sum to " + std::to_string(sum) + ", dataset has " + std::to_string(n));
  } else {
    const double sum = std::accumulate(spec.fractions.begin(), spec.fractions.end(), 0.0);
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::kInvalidArgument,
            "split fractions must sum to 1, got " + format_double(sum));
    for (double f : spec.fractions) {
      require(f >= 0.0, ErrorKind::kInvalidArgument, "split fractions must be non-negative");
    }
    totals = allocate_counts(spec.fractions, n);
  }
  require(totals.size() == 3, ErrorKind::kInvalidArgument,
          "split spec needs exactly three entries (train, val, test)");
  return totals;
}

}  // namespace

void assign_splits(Dataset& dataset, const SplitSpec& spec, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  const std::vector<std::size_t> totals = split_totals(spec, n);
  const auto class_n = dataset.class_counts();
  const std::size_t k_n = class_n.size();
  const std::size_t used_splits =
      static_cast<std::size_t>(std::count_if(totals.begin(), totals.end(), [](std::size_t t) { return t > 0; }));
  for (std::size_t c = 0; c < k_n; ++c) {
    require(class_n[c] >= used_splits, ErrorKind::kInvalidArgument,
            "class '" + dataset.class_names[c] + "' has " + std::to_string(class_n[c]) +
                " samples, too small to stratify across " + std::to_string(used_splits) +
                " splits");
  }

  // cells[c][s]: floor of the proportional share, then the deficits are
  // distributed greedily (rows with the largest deficit first, each to the
  // columns with the largest remaining deficit).
  std::vector<std::array<std::size_t, 3>> cells(k_n);
  std::vector<std::array<double, 3>> frac(k_n);
  std::array<std::size_t, 3> col_deficit = {totals[0], totals[1], totals[2]};
  std::vector<std::size_t> row_deficit(k_n);
  for (std::size_t c = 0; c < k_n; ++c) {
    std::size_t placed = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      const double quota = static_cast<double>(class_n[c]) * static_cast<double>(totals[s]) /
                           static_cast<double>(n);
      cells[c][s] = static_cast<std::size_t>(std::floor(quota + 1e-9));
      frac[c][s] = quota - static_cast<double>(cells[c][s]);
      placed += cells[c][s];
      col_deficit[s] -= cells[c][s];
    }
    row_deficit[c] = class_n[c] - placed;
  }
  std::vector<std::size_t> rows(k_n);
  std::iota(rows.begin(), rows.end(), 0);
  std::stable_sort(rows.begin(), rows.end(),
                   [&](std::size_t a, std::size_t b) { return row_deficit[a] > row_deficit[b]; });
  for (std::size_t c : rows) {
    std::array<bool, 3> bumped{};
    for (std::size_t unit = 0; unit < row_deficit[c]; ++unit) {
      std::size_t best = 3;
      for (std::size_t s = 0; s < 3; ++s) {
        if (bumped[s] || col_deficit[s] == 0) continue;
        if (best == 3 || col_deficit[s] > col_deficit[best] ||
            (col_deficit[s] == col_deficit[best] && frac[c][s] > frac[c][best])) {
          best = s;
        }
      }
      require(best < 3, ErrorKind::kInternal, "stratified split allocation failed");
      bumped[best] = true;
      ++cells[c][best];
      --col_deficit[best];
    }
  }

  for (std::size_t c = 0; c < k_n; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (dataset.labels[i] == c) members.push_back(i);
    }
    Rng rng(mix_seed(seed, c));
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t u = 0; u < cells[c][s]; ++u) {
        dataset.tags[members[pos++]] = static_cast<SplitTag>(s);
      }
    }
  }
}

std::array<Dataset, 3> split(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed) {
  Dataset tagged = dataset;
  assign_splits(tagged, spec, seed);
  return {tagged.with_tag(SplitTag::kTrain), tagged.with_tag(SplitTag::kValidation),
          tagged.with_tag(SplitTag::kTest)};
}

Dataset generate_tagged(const DatasetConfig& config, const SplitSpec& spec) {
  config.validate();
  const std::vector<std::size_t> totals = split_totals(spec, config.count);
  const std::vector<double> priors = priors_of(config);
  std::vector<std::vector<std::size_t>> cells;
  std::vector<std::size_t> class_total(priors.size(), 0);
  for (std::size_t total : totals) {
    cells.push_back(allocate_counts(priors, total));
    for (std::size_t k = 0; k < priors.size(); ++k) class_total[k] += cells.back()[k];
  }
  Dataset ds = render_dataset(config, class_total);
  for (std::size_t k = 0; k < priors.size(); ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == k) members.push_back(i);
    }
    Rng rng(mix_seed(mix_seed(config.seed, 0x5b17), k));
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t pos = 0;
    for (std::size_t s = 0; s < cells.size(); ++s) {
      for (std::size_t u = 0; u < cells[s][k]; ++u) {
        ds.tags[members[pos++]] = static_cast<SplitTag>(s);
      }
    }
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  std::vector<int> tags(ds.tags.size());
  std::transform(ds.tags.begin(), ds.tags.end(), tags.begin(),
                 [](SplitTag t) { return static_cast<int>(t); });
  std::string blob;
  append_f32(blob, ds.images);
  const std::size_t image_bytes = blob.size();
  blob.append(reinterpret_cast<const char*>(ds.labels.data()), ds.labels.size());
  nlohmann::json header = {
      {"format", "neuroprune-dataset"},
      {"dtype", "f32"},
      {"endianness", "little"},
      {"count", ds.size()},
      {"image_shape", ds.image_shape},
      {"num_classes", ds.num_classes()},
      {"class_names", ds.class_names},
      {"seed", ds.seed},
      {"ids", ds.ids},
      {"split_tags", tags},
      {"image_bytes", image_bytes},
      {"label_bytes", ds.labels.size()},
  };
  return pack_container(kDatasetMagic, header, blob);
}

Dataset deserialize_dataset(std::string_view bytes) {
  const Container c = unpack_container(bytes, kDatasetMagic);
  const nlohmann::json& h = c.header;
  Dataset ds;
  std::size_t count = 0, num_classes = 0, image_bytes = 0, label_bytes = 0;
  std::vector<int> tags;
  try {
    require(h.at("format") == "neuroprune-dataset", ErrorKind::kCorruptHeader,
            "corrupt header: not a neuroprune dataset");
    require(h.at("dtype") == "f32", ErrorKind::kDtypeMismatch, "dtype mismatch: expected f32");
    require(h.at("endianness") == "little", ErrorKind::kEndiannessMismatch,
            "endianness mismatch: expected little");
    count = h.at("count").get<std::size_t>();
    ds.image_shape = h.at("image_shape").get<Shape>();
    num_classes = h.at("num_classes").get<std::size_t>();
    ds.class_names = h.at("class_names").get<std::vector<std::string>>();
    ds.seed = h.at("seed").get<std::uint64_t>();
    ds.ids = h.at("ids").get<std::vector<std::uint32_t>>();
    tags = h.at("split_tags").get<std::vector<int>>();
    image_bytes = h.at("image_bytes").get<std::size_t>();
    label_bytes = h.at("label_bytes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kCorruptHeader, std::string("corrupt header: ") + e.what());
  }
  require(ds.image_shape.size() == 3 && shape_size(ds.image_shape) > 0, ErrorKind::kCorruptHeader,
          "corrupt header: image_shape must be [C,H,W]");
  require(num_classes >= 1 && num_classes <= 255 && ds.class_names.size() == num_classes,
          ErrorKind::kCorruptHeader, "corrupt header: class names do not match num_classes");
  require(ds.ids.size() == count && tags.size() == count, ErrorKind::kCorruptHeader,
          "corrupt header: ids/split_tags length does not match count");
  require(image_bytes == count * shape_size(ds.image_shape) * sizeof(float) &&
              label_bytes == count,
          ErrorKind::kSizeMismatch, "size mismatch: header byte counts disagree with shape");
  require(c.payload.size() >= image_bytes + label_bytes, ErrorKind::kTruncatedBlob,
          "truncated blob: expected " + std::to_string(image_bytes + label_bytes) +
              " bytes, found " + std::to_string(c.payload.size()));
  require(c.payload.size() == image_bytes + label_bytes, ErrorKind::kSizeMismatch,
          "size mismatch: trailing bytes after label block");

  ds.images.resize(count * shape_size(ds.image_shape));
  read_f32(c.payload.substr(0, image_bytes), ds.images);
  const std::string_view labels = c.payload.substr(image_bytes, label_bytes);
  ds.labels.assign(labels.begin(), labels.end());
  for (std::uint8_t l : ds.labels) {
    require(l < num_classes, ErrorKind::kCorruptHeader,
            "label " + std::to_string(l) + " outside header class range [0," +
                std::to_string(num_classes) + ")");
  }
  ds.tags.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    require(tags[i] >= 0 && tags[i] <= 2, ErrorKind::kCorruptHeader,
            "corrupt header: invalid split tag");
    ds.tags[i] = static_cast<SplitTag>(tags[i]);
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(read_file(path));
}

}  // namespace neuroprune
