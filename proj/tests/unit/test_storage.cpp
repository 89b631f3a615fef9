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

// Checkpoint and dataset containers.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "neuroprune/checkpoint.hpp"
#include "neuroprune/dataset.hpp"
#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"

using namespace neuroprune;

namespace {

ErrorKind load_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInternal;
}

std::string rewrite_header(const std::string& bytes, std::string_view magic,
                           const std::function<void(nlohmann::json&)>& edit) {
  Container c = unpack_container(bytes, magic);
  nlohmann::json h = c.header;
  edit(h);
  return pack_container(magic, h, c.payload);
}

DatasetConfig uniform_config(std::size_t count) {
  DatasetConfig c = DatasetConfig::rover_default(count, 5);
  for (ClassSpec& k : c.classes) k.prior = 1.0 / static_cast<double>(c.classes.size());
  c.image_size = 8;
  return c;
}

}  // namespace

TEST_CASE("checkpoint save, load, save is byte-identical") {
  auto dir = fixtures::scratch_dir("checkpoint");
  Network net = fixtures::every_kind_net(4);
  net.metadata()["note"] = "fixture";
  save(net, dir / "a.nprn");
  Network back = load(dir / "a.nprn");
  CHECK(back.same_weights(net));
  CHECK(back.seed() == net.seed());
  save(back, dir / "b.nprn");
  CHECK(read_file(dir / "a.nprn") == read_file(dir / "b.nprn"));
}

TEST_CASE("checkpoint corruption maps to distinct error kinds") {
  Architecture a;
  a.input_shape = {4};
  a.layers = {LayerSpec::dense(4, 3), LayerSpec::relu(), LayerSpec::dense(3, 2),
              LayerSpec::softmax()};
  const std::string bytes = serialize_checkpoint(Network(a, 9));

  std::string truncated = bytes.substr(0, bytes.size() - 4);
  CHECK(load_error([&] { deserialize_checkpoint(truncated); }) == ErrorKind::kTruncatedBlob);

  std::string wider = rewrite_header(bytes, kCheckpointMagic, [](nlohmann::json& h) {
    h["architecture"]["layers"][0]["out"] = 4;
    h["architecture"]["layers"][2]["in"] = 4;
  });
  CHECK(load_error([&] { deserialize_checkpoint(wider); }) == ErrorKind::kSizeMismatch);

  std::string f64 = rewrite_header(bytes, kCheckpointMagic,
                                   [](nlohmann::json& h) { h["dtype"] = "f64"; });
  CHECK(load_error([&] { deserialize_checkpoint(f64); }) == ErrorKind::kDtypeMismatch);

  std::string big = rewrite_header(bytes, kCheckpointMagic,
                                   [](nlohmann::json& h) { h["endianness"] = "big"; });
  CHECK(load_error([&] { deserialize_checkpoint(big); }) == ErrorKind::kEndiannessMismatch);

  std::string garbage = bytes;
  garbage[0] = 'X';
  CHECK(load_error([&] { deserialize_checkpoint(garbage); }) == ErrorKind::kCorruptHeader);
}

TEST_CASE("default generator reproduces the five class counts") {
  Dataset d = generate(DatasetConfig::rover_default(2388, 1));
  std::vector<std::size_t> expected = {1422, 342, 252, 190, 182};
  CHECK(d.class_counts() == expected);
}

TEST_CASE("uniform priors split the count evenly") {
  Dataset d = generate(uniform_config(100));
  CHECK(d.class_counts() == std::vector<std::size_t>(5, 20));
}

TEST_CASE("same seed gives the same dataset file") {
  auto dir = fixtures::scratch_dir("dataset_seed");
  DatasetConfig c = uniform_config(50);
  save_dataset(generate(c), dir / "a.npds");
  save_dataset(generate(c), dir / "b.npds");
  CHECK(sha256_file(dir / "a.npds") == sha256_file(dir / "b.npds"));
  c.seed += 1;
  save_dataset(generate(c), dir / "c.npds");
  CHECK(sha256_file(dir / "a.npds") != sha256_file(dir / "c.npds"));
}

TEST_CASE("fractional splits are sized, disjoint, complete and stratified") {
  Dataset d = generate(uniform_config(1000));
  SplitSpec spec = SplitSpec::from_fractions({0.8, 0.1, 0.1});
  std::array<Dataset, 3> parts = split(d, spec, 13);
  CHECK(parts[0].size() == 800);
  CHECK(parts[1].size() == 100);
  CHECK(parts[2].size() == 100);

  std::vector<std::uint32_t> ids;
  for (const Dataset& p : parts) ids.insert(ids.end(), p.ids.begin(), p.ids.end());
  std::vector<std::uint32_t> original = d.ids;
  std::sort(ids.begin(), ids.end());
  std::sort(original.begin(), original.end());
  CHECK(ids == original);

  std::vector<std::size_t> parent = d.class_counts();
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<std::size_t> counts = parts[s].class_counts();
    for (std::size_t k = 0; k < parent.size(); ++k) {
      double want = spec.fractions[s] * static_cast<double>(parent[k]);
      CHECK(std::abs(static_cast<double>(counts[k]) - want) <= 1.0);
    }
  }
}

TEST_CASE("absolute split sizes must add up to the dataset size") {
  Dataset d = generate(uniform_config(100));
  CHECK(load_error([&] { split(d, SplitSpec::from_sizes({50, 20, 20}), 1); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("dataset round trip and corruption") {
  auto dir = fixtures::scratch_dir("dataset_io");
  Dataset d = generate_tagged(uniform_config(60), SplitSpec::from_fractions({0.5, 0.25, 0.25}));
  save_dataset(d, dir / "d.npds");
  Dataset back = load_dataset(dir / "d.npds");
  CHECK(back == d);
  save_dataset(back, dir / "e.npds");
  CHECK(read_file(dir / "d.npds") == read_file(dir / "e.npds"));

  const std::string bytes = serialize_dataset(d);
  std::string shorter = rewrite_header(bytes, kDatasetMagic, [](nlohmann::json& h) {
    h["image_bytes"] = h["image_bytes"].get<std::size_t>() - 4;
  });
  CHECK(load_error([&] { deserialize_dataset(shorter); }) == ErrorKind::kSizeMismatch);
  CHECK(load_error([&] { deserialize_dataset(bytes.substr(0, bytes.size() - 1)); }) ==
        ErrorKind::kTruncatedBlob);

  std::string bad_label = bytes;
  bad_label.back() = static_cast<char>(d.num_classes());
  CHECK(load_error([&] { deserialize_dataset(bad_label); }) == ErrorKind::kCorruptHeader);

  CHECK(load_error([&] { load_dataset(dir / "absent.npds"); }) == ErrorKind::kMissingArtifact);
}
