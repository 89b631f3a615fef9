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

#ifndef NEUROPRUNE_REPORT_HPP_
#define NEUROPRUNE_REPORT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuroprune/pruning.hpp"
#include "neuroprune/ranking.hpp"

namespace neuroprune {

enum class ReportKind {
  kEaMap,
  kRankHist,
  kSortedEa,
  kOverlap,
  kSweepCurves,
  kCategoryCurves,
  kParamTable,
};

std::string_view report_kind_name(ReportKind kind);
ReportKind parse_report_kind(std::string_view name);

// A rendered figure and the CSV holding exactly the values it plots.
struct Report {
  ReportKind kind = ReportKind::kEaMap;
  std::string csv;
  std::string svg;
};

// Plot primitives. Output depends only on the inputs: fixed palette, fixed
// number formatting, no timestamps.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one bar per series name
};

struct BarPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> series_names;
  std::vector<BarGroup> groups;
  std::string annotation;  // drawn in the plot area when non-empty
};

struct TablePlot {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// All three throw kInvalidArgument on empty data.
std::string render_line_svg(const LinePlot& plot);
std::string render_bar_svg(const BarPlot& plot);
std::string render_table_svg(const TablePlot& plot);

// Conditional EAs of one neuron: a bar group per output class, one bar per
// true class. Dead neurons carry a "rank 0 (dead)" annotation.
Report ea_map_report(const EATable& table, std::size_t neuron, double rank,
                     std::span<const std::string> class_names);

Report rank_hist_report(const Histogram& hist, std::string_view title);

// Per output class, the total EA of every neuron sorted in descending order.
Report sorted_ea_report(const EATable& table, std::span<const std::string> class_names);

Report overlap_report(const OverlapResult& overlap);

// Loss and accuracy against neurons pruned, one series per sweep. The first
// CSV row is the first sweep's unpruned point.
Report sweep_curves_report(std::span<const SweepResult> sweeps);

// Per-class accuracy along a category sweep.
Report category_curves_report(const SweepResult& sweep,
                              std::span<const std::string> class_names);

Report param_table_report(std::span<const ParameterRow> rows);

}  // namespace neuroprune

#endif  // NEUROPRUNE_REPORT_HPP_
