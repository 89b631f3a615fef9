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

#include "neuroprune/neuroprune.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "neuroprune/attribution.hpp"
#include "neuroprune/checkpoint.hpp"
#include "neuroprune/dataset.hpp"
#include "neuroprune/error.hpp"
#include "neuroprune/network.hpp"
#include "neuroprune/training.hpp"
#include "neuroprune/workflow.hpp"

struct np_run {
  neuroprune::RunConfig config;
  np_log_fn log = nullptr;
  void* log_user = nullptr;
};

struct np_network {
  neuroprune::Network net;
};

struct np_dataset {
  neuroprune::Dataset data;
};

namespace {

thread_local std::string g_last_error;

// Runs fn, translating exceptions into status codes and the thread-local
// error message.
template <class Fn>
np_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NP_OK;
  } catch (const neuroprune::Error& e) {
    g_last_error = e.what();
    return static_cast<np_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  neuroprune::require(p != nullptr, neuroprune::ErrorKind::kInvalidArgument,
                      std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* np_version(void) {
  static const std::string v(neuroprune::tool_version());
  return v.c_str();
}

const char* np_last_error_message(void) { return g_last_error.c_str(); }

const char* np_status_name(np_status status) {
  if (status == NP_OK) return "ok";
  if (status < NP_ERR_INVALID_ARGUMENT || status > NP_ERR_INTERNAL) return "unknown";
  return neuroprune::error_kind_name(static_cast<neuroprune::ErrorKind>(status)).data();
}

np_status np_run_load(const char* config_path, np_run** out) {
  return guarded([&] {
    need(config_path, "config path");
    need(out, "out");
    *out = nullptr;
    auto run = std::make_unique<np_run>();
    run->config = neuroprune::load_run_config(config_path);
    *out = run.release();
  });
}

np_status np_run_from_json(const char* json, const char* base_dir, np_run** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      neuroprune::fail(neuroprune::ErrorKind::kInvalidArgument,
                       std::string("cannot parse run config: ") + e.what());
    }
    auto run = std::make_unique<np_run>();
    run->config = neuroprune::run_config_from_json(j, base_dir ? base_dir : "");
    *out = run.release();
  });
}

void np_run_free(np_run* run) { delete run; }

np_status np_run_set_workspace(np_run* run, const char* workspace) {
  return guarded([&] {
    need(run, "run");
    need(workspace, "workspace");
    run->config.workspace = workspace;
  });
}

np_status np_run_workspace(const np_run* run, char* buf, size_t size, size_t* needed) {
  return guarded([&] {
    need(run, "run");
    std::string ws = run->config.workspace.string();
    if (needed) *needed = ws.size() + 1;
    if (buf == nullptr) return;
    neuroprune::require(size > ws.size(), neuroprune::ErrorKind::kInvalidArgument,
                        "buffer too small for the workspace path");
    std::memcpy(buf, ws.c_str(), ws.size() + 1);
  });
}

np_status np_run_set_log(np_run* run, np_log_fn fn, void* user) {
  return guarded([&] {
    need(run, "run");
    run->log = fn;
    run->log_user = user;
  });
}

np_status np_run_stage(np_run* run, const char* stage, const char* strategies) {
  return guarded([&] {
    need(run, "run");
    need(stage, "stage");
    neuroprune::StageOptions options;
    if (strategies != nullptr && *strategies != '\0') {
      std::vector<neuroprune::SweepStrategy> list;
      std::stringstream ss(strategies);
      std::string item;
      while (std::getline(ss, item, ',')) list.push_back(neuroprune::parse_sweep_strategy(item));
      options.strategies = std::move(list);
    }
    neuroprune::LogFn log;
    if (run->log != nullptr) {
      log = [run](std::string_view line) {
        std::string s(line);
        run->log(s.c_str(), run->log_user);
      };
    }
    neuroprune::run_stage(run->config, neuroprune::parse_stage(stage), options, log);
  });
}

np_status np_network_load(const char* path, np_network** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new np_network{neuroprune::load(path)};
  });
}

void np_network_free(np_network* net) { delete net; }

size_t np_network_input_size(const np_network* net) { return net ? net->net.input_size() : 0; }
size_t np_network_output_size(const np_network* net) { return net ? net->net.output_size() : 0; }
size_t np_network_num_layers(const np_network* net) { return net ? net->net.num_layers() : 0; }

np_status np_network_forward(const np_network* net, const float* x, size_t n, float* out,
                             size_t out_n) {
  return guarded([&] {
    need(net, "network");
    need(x, "input");
    need(out, "output");
    std::vector<float> y = neuroprune::forward(net->net, std::span<const float>(x, n));
    neuroprune::require(out_n >= y.size(), neuroprune::ErrorKind::kShapeMismatch,
                        "output buffer holds " + std::to_string(out_n) + " values, need " +
                            std::to_string(y.size()));
    std::memcpy(out, y.data(), y.size() * sizeof(float));
  });
}

np_status np_ig_internal(const np_network* net, size_t layer, const float* x, size_t n, size_t j,
                         size_t steps, double* out, size_t out_n) {
  return guarded([&] {
    need(net, "network");
    need(x, "input");
    need(out, "output");
    neuroprune::IgSettings s;
    s.steps = steps;
    std::vector<double> a =
        neuroprune::ig_internal(net->net, layer, std::span<const float>(x, n), j, s);
    neuroprune::require(out_n >= a.size(), neuroprune::ErrorKind::kShapeMismatch,
                        "output buffer holds " + std::to_string(out_n) + " values, need " +
                            std::to_string(a.size()));
    std::memcpy(out, a.data(), a.size() * sizeof(double));
  });
}

np_status np_dataset_load(const char* path, np_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new np_dataset{neuroprune::load_dataset(path)};
  });
}

void np_dataset_free(np_dataset* ds) { delete ds; }

size_t np_dataset_size(const np_dataset* ds) { return ds ? ds->data.size() : 0; }
size_t np_dataset_num_classes(const np_dataset* ds) { return ds ? ds->data.num_classes() : 0; }
size_t np_dataset_image_size(const np_dataset* ds) { return ds ? ds->data.image_size() : 0; }

np_status np_dataset_sample(const np_dataset* ds, size_t index, float* image, size_t n,
                            uint32_t* label) {
  return guarded([&] {
    need(ds, "dataset");
    neuroprune::require(index < ds->data.size(), neuroprune::ErrorKind::kInvalidArgument,
                        "sample index out of range");
    if (image != nullptr) {
      auto img = ds->data.image(index);
      neuroprune::require(n >= img.size(), neuroprune::ErrorKind::kShapeMismatch,
                          "image buffer too small");
      std::memcpy(image, img.data(), img.size() * sizeof(float));
    }
    if (label != nullptr) *label = ds->data.labels[index];
  });
}

np_status np_evaluate(const np_network* net, const np_dataset* ds, double* accuracy,
                      double* loss) {
  return guarded([&] {
    need(net, "network");
    need(ds, "dataset");
    neuroprune::EvalMetrics m = neuroprune::evaluate(net->net, ds->data);
    if (accuracy) *accuracy = m.accuracy;
    if (loss) *loss = m.loss;
  });
}

}  // extern "C"
