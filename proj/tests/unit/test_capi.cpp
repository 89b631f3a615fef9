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

// Exercises the shared library through its C interface only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "neuroprune/neuroprune.h"

namespace fs = std::filesystem;

namespace {

const fs::path kConfig = fs::path(NEUROPRUNE_SOURCE_DIR) / "configs" / "tiny.json";

fs::path fresh_workspace(const std::string& name) {
  fs::path p = fs::path(NEUROPRUNE_TEST_CACHE_DIR) / "scratch" / name;
  fs::remove_all(p);
  return p;
}

struct Run {
  np_run* run = nullptr;
  explicit Run(const fs::path& ws) {
    REQUIRE(np_run_load(kConfig.c_str(), &run) == NP_OK);
    REQUIRE(np_run_set_workspace(run, ws.c_str()) == NP_OK);
  }
  ~Run() { np_run_free(run); }
};

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(np_version()).size() > 0);
  CHECK(std::string(np_status_name(NP_OK)) == "ok");
  CHECK(std::string(np_status_name(NP_ERR_MISSING_ARTIFACT)) == "missing_artifact");
  CHECK(std::string(np_status_name(static_cast<np_status>(99))) == "unknown");
}

TEST_CASE("null arguments and bad names are reported, not crashed on") {
  np_run* run = nullptr;
  CHECK(np_run_load(nullptr, &run) == NP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(np_last_error_message()).find("null") != std::string::npos);
  CHECK(np_run_load("/nonexistent/config.json", &run) == NP_ERR_MISSING_ARTIFACT);
  CHECK(run == nullptr);
  CHECK(np_run_from_json("{not json", nullptr, &run) == NP_ERR_INVALID_ARGUMENT);

  Run r(fresh_workspace("capi_bad"));
  CHECK(np_run_stage(r.run, "polish", nullptr) == NP_ERR_INVALID_ARGUMENT);
  CHECK(np_run_stage(r.run, "sweep", "sideways") == NP_ERR_INVALID_ARGUMENT);
  CHECK(np_network_input_size(nullptr) == 0);
}

TEST_CASE("workspace path query follows the size protocol") {
  Run r(fs::path("/tmp/np-capi"));
  size_t needed = 0;
  CHECK(np_run_workspace(r.run, nullptr, 0, &needed) == NP_OK);
  CHECK(needed == std::string("/tmp/np-capi").size() + 1);
  std::vector<char> small(4);
  CHECK(np_run_workspace(r.run, small.data(), small.size(), &needed) == NP_ERR_INVALID_ARGUMENT);
  std::vector<char> buf(needed);
  CHECK(np_run_workspace(r.run, buf.data(), buf.size(), nullptr) == NP_OK);
  CHECK(std::string(buf.data()) == "/tmp/np-capi");
}

TEST_CASE("stages, networks and datasets through the C interface") {
  fs::path ws = fresh_workspace("capi_run");
  Run r(ws);
  std::vector<std::string> lines;
  np_log_fn log = [](const char* line, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(line);
  };
  REQUIRE(np_run_set_log(r.run, log, &lines) == NP_OK);

  CHECK(np_run_stage(r.run, "rank", nullptr) == NP_ERR_MISSING_ARTIFACT);
  CHECK(np_run_stage(r.run, "gen-data", nullptr) == NP_OK);
  CHECK(np_run_stage(r.run, "train", nullptr) == NP_OK);
  CHECK(!lines.empty());

  np_network* net = nullptr;
  REQUIRE(np_network_load((ws / "model" / "model.nprn").c_str(), &net) == NP_OK);
  np_dataset* ds = nullptr;
  REQUIRE(np_dataset_load((ws / "data" / "dataset.npds").c_str(), &ds) == NP_OK);

  CHECK(np_network_input_size(net) == np_dataset_image_size(ds));
  CHECK(np_network_output_size(net) == np_dataset_num_classes(ds));
  CHECK(np_dataset_size(ds) == 400);

  std::vector<float> image(np_dataset_image_size(ds));
  uint32_t label = 99;
  REQUIRE(np_dataset_sample(ds, 0, image.data(), image.size(), &label) == NP_OK);
  CHECK(label < 5);
  CHECK(np_dataset_sample(ds, 400, nullptr, 0, nullptr) == NP_ERR_INVALID_ARGUMENT);

  std::vector<float> probs(5);
  REQUIRE(np_network_forward(net, image.data(), image.size(), probs.data(), probs.size()) ==
          NP_OK);
  CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(np_network_forward(net, image.data(), image.size(), probs.data(), 2) ==
        NP_ERR_SHAPE_MISMATCH);
  CHECK(np_network_forward(net, image.data(), 3, probs.data(), 5) == NP_ERR_SHAPE_MISMATCH);

  std::vector<double> attr(32);
  CHECK(np_ig_internal(net, 6, image.data(), image.size(), label, 64, attr.data(),
                       attr.size()) == NP_OK);
  CHECK(np_ig_internal(net, 1, image.data(), image.size(), label, 64, attr.data(),
                       attr.size()) == NP_ERR_INVALID_ARGUMENT);

  double acc = -1, loss = -1;
  CHECK(np_evaluate(net, ds, &acc, &loss) == NP_OK);
  CHECK(acc > 0.5);
  CHECK(std::isfinite(loss));

  np_dataset_free(ds);
  np_network_free(net);
}
