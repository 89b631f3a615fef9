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

// Command-line driver. Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "neuroprune/neuroprune.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int exit_code(np_status s) {
  switch (s) {
    case NP_OK:
      return kExitOk;
    case NP_ERR_IO:
    case NP_ERR_NUMERICAL:
    case NP_ERR_STATE:
    case NP_ERR_INTERNAL:
      return kExitRuntime;
    default:
      return kExitValidation;
  }
}

struct ErrorSink {
  bool json = false;

  int report(int code, const std::string& kind, const std::string& message) const {
    if (json) {
      nlohmann::json j = {{"error", kind}, {"exit_code", code}, {"message", message}};
      std::cerr << j.dump() << "\n";
    } else {
      std::cerr << "neuroprune: " << kind << ": " << message << "\n";
    }
    return code;
  }

  int report(np_status s) const {
    return report(exit_code(s), np_status_name(s), np_last_error_message());
  }
};

void log_line(const char* line, void* user) {
  if (*static_cast<bool*>(user)) return;
  std::fprintf(stderr, "%s\n", line);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribution-based neuron ranking and pruning"};
  app.set_version_flag("--version", std::string(np_version()));
  app.require_subcommand(1);
  app.fallthrough();

  ErrorSink errors;
  bool quiet = false;
  app.add_flag("--json-errors", errors.json, "Report errors as one JSON line on stderr");
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  std::string config_path;
  std::string workspace;
  std::vector<std::string> strategies;

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"gen-data", "Generate the synthetic dataset"},
      {"train", "Train the reference network"},
      {"attribute", "Integrated-gradients attributions of every configured layer"},
      {"rank", "Expected attributions, rankings, histograms and top-list overlap"},
      {"sweep", "Prune one neuron at a time in rank order and evaluate"},
      {"category-sweep", "Prune by per-category rankings"},
      {"retrain", "Jointly prune the configured fraction and retrain"},
      {"report", "Write CSV tables and SVG plots"},
      {"all", "Run every stage in order"},
  };
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", config_path, "Run config (JSON)")->required();
    sub->add_option("-w,--workspace", workspace,
                    "Workspace directory (overrides the config and NEUROPRUNE_WORKSPACE)");
    if (std::string(c.name) == "sweep" || std::string(c.name) == "all") {
      sub->add_option("-s,--strategy", strategies,
                      "bottom_first, top_first or random; repeatable")
          ->check(CLI::IsMember({"bottom_first", "top_first", "random"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return errors.report(kExitUsage, "usage", e.what());
  }

  std::string stage = app.get_subcommands().front()->get_name();
  std::string joined;
  for (const std::string& s : strategies) joined += (joined.empty() ? "" : ",") + s;

  np_run* run = nullptr;
  np_status s = np_run_load(config_path.c_str(), &run);
  if (s != NP_OK) return errors.report(s);
  if (!workspace.empty()) s = np_run_set_workspace(run, workspace.c_str());
  if (s == NP_OK) s = np_run_set_log(run, &log_line, &quiet);
  if (s == NP_OK) s = np_run_stage(run, stage.c_str(), joined.empty() ? nullptr : joined.c_str());
  int code = s == NP_OK ? kExitOk : errors.report(s);
  np_run_free(run);
  return code;
}
