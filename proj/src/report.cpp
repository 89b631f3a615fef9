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

#include "neuroprune/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"

namespace neuroprune {
namespace {

constexpr std::array<std::string_view, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string num(double v) { return format_fixed(v, 2); }

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string svg_open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" "
         "fill=\"white\"/>\n";
}

std::string text(double x, double y, std::string_view s, std::string_view anchor = "start",
                 std::string_view extra = "") {
  std::string out = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" +
                    std::string(anchor) + "\"";
  if (!extra.empty()) out += " " + std::string(extra);
  return out + ">" + escape(s) + "</text>\n";
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    double pad = std::abs(lo) > 0.0 ? std::abs(lo) * 0.5 : 0.5;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

// Frame with axis labels and five ticks per axis; returns the mapping
// helpers' box.
struct Frame {
  double x0, y0, w, h;
  Range xr, yr;
  double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

std::string axes(const Frame& f, std::string_view title, std::string_view x_label,
                 std::string_view y_label, bool x_ticks) {
  std::string out;
  out += text(f.x0 + f.w / 2, f.y0 - 14, title, "middle", "font-size=\"14\"");
  out += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) +
         "\" height=\"" + num(f.h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    double fy = f.yr.lo + (f.yr.hi - f.yr.lo) * t / 4.0;
    double y = f.py(fy);
    out += "<line x1=\"" + num(f.x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.x0) +
           "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    out += text(f.x0 - 6, y + 4, format_fixed(fy, 3), "end");
    if (x_ticks) {
      double fx = f.xr.lo + (f.xr.hi - f.xr.lo) * t / 4.0;
      double x = f.px(fx);
      out += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.y0 + f.h) + "\" x2=\"" + num(x) +
             "\" y2=\"" + num(f.y0 + f.h + 4) + "\" stroke=\"black\"/>\n";
      out += text(x, f.y0 + f.h + 17, format_fixed(fx, 2), "middle");
    }
  }
  out += text(f.x0 + f.w / 2, f.y0 + f.h + 38, x_label, "middle");
  out += text(f.x0 - 52, f.y0 + f.h / 2, y_label, "middle",
              "transform=\"rotate(-90 " + num(f.x0 - 52) + " " + num(f.y0 + f.h / 2) + ")\"");
  return out;
}

std::string legend(double x, double y, std::span<const std::string> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    double ly = y + 18.0 * static_cast<double>(i);
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(ly - 9) +
           "\" width=\"12\" height=\"10\" fill=\"" + std::string(kPalette[i % kPalette.size()]) +
           "\"/>\n";
    out += text(x + 18, ly, names[i]);
  }
  return out;
}

std::string line_panel(const LinePlot& plot, double ox, double oy) {
  require(!plot.series.empty(), ErrorKind::kInvalidArgument, "line plot has no series");
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  bool first = true;
  for (const Series& s : plot.series) {
    require(!s.x.empty() && s.x.size() == s.y.size(), ErrorKind::kInvalidArgument,
            "series '" + s.name + "' is empty or has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xlo = xhi = s.x[i];
        ylo = yhi = s.y[i];
        first = false;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  Frame f{ox + kLeft, oy + kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom,
          padded(xlo, xhi), padded(ylo, yhi)};
  std::string out = axes(f, plot.title, plot.x_label, plot.y_label, true);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& s = plot.series[k];
    names.push_back(s.name);
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" +
           std::string(kPalette[k % kPalette.size()]) + "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out.push_back(' ');
      out += num(f.px(s.x[i])) + "," + num(f.py(s.y[i]));
    }
    out += "\"/>\n";
  }
  out += legend(f.x0 + f.w + 16, f.y0 + 10, names);
  return out;
}

}  // namespace

std::string_view report_kind_name(ReportKind kind) {
  switch (kind) {
    case ReportKind::kEaMap: return "ea_map";
    case ReportKind::kRankHist: return "rank_hist";
    case ReportKind::kSortedEa: return "sorted_ea";
    case ReportKind::kOverlap: return "overlap";
    case ReportKind::kSweepCurves: return "sweep_curves";
    case ReportKind::kCategoryCurves: return "category_curves";
    case ReportKind::kParamTable: return "param_table";
  }
  return "unknown";
}

ReportKind parse_report_kind(std::string_view name) {
  for (ReportKind k : {ReportKind::kEaMap, ReportKind::kRankHist, ReportKind::kSortedEa,
                       ReportKind::kOverlap, ReportKind::kSweepCurves,
                       ReportKind::kCategoryCurves, ReportKind::kParamTable}) {
    if (report_kind_name(k) == name) return k;
  }
  fail(ErrorKind::kInvalidArgument, "unknown report kind '" + std::string(name) + "'");
}

std::string render_line_svg(const LinePlot& plot) {
  std::string body = line_panel(plot, 0, 0);
  return svg_open(kWidth, kHeight) + body + "</svg>\n";
}

std::string render_bar_svg(const BarPlot& plot) {
  require(!plot.groups.empty() && !plot.series_names.empty(), ErrorKind::kInvalidArgument,
          "bar plot has no data");
  double lo = 0.0, hi = 0.0;
  for (const BarGroup& g : plot.groups) {
    require(g.values.size() == plot.series_names.size(), ErrorKind::kInvalidArgument,
            "bar group '" + g.label + "' does not match the series count");
    for (double v : g.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Frame f{kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom, {0.0, 1.0},
          padded(lo, hi)};
  std::string out = svg_open(kWidth, kHeight);
  out += axes(f, plot.title, plot.x_label, plot.y_label, false);

  const double slot = f.w / static_cast<double>(plot.groups.size());
  const double bar = slot * 0.8 / static_cast<double>(plot.series_names.size());
  const double zero = f.py(0.0);
  out += "<line x1=\"" + num(f.x0) + "\" y1=\"" + num(zero) + "\" x2=\"" + num(f.x0 + f.w) +
         "\" y2=\"" + num(zero) + "\" stroke=\"#555\"/>\n";
  for (std::size_t g = 0; g < plot.groups.size(); ++g) {
    double gx = f.x0 + slot * static_cast<double>(g) + slot * 0.1;
    for (std::size_t s = 0; s < plot.series_names.size(); ++s) {
      double v = plot.groups[g].values[s];
      double y = f.py(v);
      out += "<rect x=\"" + num(gx + bar * static_cast<double>(s)) + "\" y=\"" +
             num(std::min(y, zero)) + "\" width=\"" + num(bar) + "\" height=\"" +
             num(std::abs(zero - y)) + "\" fill=\"" +
             std::string(kPalette[s % kPalette.size()]) + "\"/>\n";
    }
    out += text(f.x0 + slot * (static_cast<double>(g) + 0.5), f.y0 + f.h + 17,
                plot.groups[g].label, "middle", "font-size=\"10\"");
  }
  if (plot.series_names.size() > 1) out += legend(f.x0 + f.w + 16, f.y0 + 10, plot.series_names);
  if (!plot.annotation.empty()) {
    out += text(f.x0 + f.w / 2, f.y0 + 20, plot.annotation, "middle",
                "font-weight=\"bold\" fill=\"#b00\"");
  }
  return out + "</svg>\n";
}

std::string render_table_svg(const TablePlot& plot) {
  require(!plot.header.empty() && !plot.rows.empty(), ErrorKind::kInvalidArgument,
          "table has no rows");
  const double col = 130.0;
  const double row = 22.0;
  double w = 20.0 + col * static_cast<double>(plot.header.size());
  double h = 60.0 + row * static_cast<double>(plot.rows.size() + 1);
  std::string out = svg_open(w, h);
  out += text(w / 2, 24, plot.title, "middle", "font-size=\"14\"");
  auto emit_row = [&](const std::vector<std::string>& cells, double y, bool bold) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out += text(10.0 + col * (static_cast<double>(c) + 1) - 8, y, cells[c], "end",
                  bold ? "font-weight=\"bold\"" : "");
    }
  };
  emit_row(plot.header, 50, true);
  out += "<line x1=\"10\" y1=\"56\" x2=\"" + num(w - 10) + "\" y2=\"56\" stroke=\"black\"/>\n";
  for (std::size_t r = 0; r < plot.rows.size(); ++r) {
    require(plot.rows[r].size() == plot.header.size(), ErrorKind::kInvalidArgument,
            "table row " + std::to_string(r) + " has the wrong width");
    emit_row(plot.rows[r], 50 + row * static_cast<double>(r + 1), false);
  }
  return out + "</svg>\n";
}

Report ea_map_report(const EATable& table, std::size_t neuron, double rank,
                     std::span<const std::string> class_names) {
  require(table.neurons > 0 && table.outputs > 0 && table.classes > 0,
          ErrorKind::kInvalidArgument, "EA table is empty");
  require(neuron < table.neurons, ErrorKind::kInvalidArgument,
          "neuron " + std::to_string(neuron) + " out of range");
  require(class_names.size() == table.classes, ErrorKind::kInvalidArgument,
          "class name count does not match the EA table");
  Report r{ReportKind::kEaMap, "neuron,output_class,true_class,ea\n", {}};
  BarPlot plot;
  plot.title = "Layer " + std::to_string(table.split_index) + " neuron " +
               std::to_string(neuron) + ", rank " + format_fixed(rank, 4);
  plot.x_label = "output class";
  plot.y_label = "expected attribution";
  plot.series_names.assign(class_names.begin(), class_names.end());
  for (std::size_t j = 0; j < table.outputs; ++j) {
    BarGroup g{j < class_names.size() ? class_names[j] : std::to_string(j), {}};
    for (std::size_t k = 0; k < table.classes; ++k) {
      double v = table.at(neuron, j, k);
      g.values.push_back(v);
      r.csv += std::to_string(neuron) + "," + csv_field(g.label) + "," +
               csv_field(class_names[k]) + "," + format_double(v) + "\n";
    }
    plot.groups.push_back(std::move(g));
  }
  if (!table.live(neuron)) plot.annotation = "rank 0 (dead)";
  r.svg = render_bar_svg(plot);
  return r;
}

Report rank_hist_report(const Histogram& hist, std::string_view title) {
  require(!hist.counts.empty() && hist.edges.size() == hist.counts.size() + 1,
          ErrorKind::kInvalidArgument, "histogram is empty");
  Report r{ReportKind::kRankHist, "bin_lo,bin_hi,count\n", {}};
  BarPlot plot{std::string(title), "rank", "neurons", {"neurons"}, {}, {}};
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    r.csv += format_double(hist.edges[b]) + "," + format_double(hist.edges[b + 1]) + "," +
             std::to_string(hist.counts[b]) + "\n";
    // Label every fourth bin to keep the axis readable.
    std::string label = b % 4 == 0 ? format_fixed(hist.edges[b], 3) : "";
    plot.groups.push_back({label, {static_cast<double>(hist.counts[b])}});
  }
  r.svg = render_bar_svg(plot);
  return r;
}

Report sorted_ea_report(const EATable& table, std::span<const std::string> class_names) {
  require(table.neurons > 0 && table.outputs > 0, ErrorKind::kInvalidArgument,
          "EA table is empty");
  std::vector<double> total = table.total();
  Report r{ReportKind::kSortedEa, "output_class,position,neuron,ea\n", {}};
  LinePlot plot{"Sorted expected attribution, layer " + std::to_string(table.split_index),
                "neuron (sorted)", "expected attribution", {}};
  for (std::size_t j = 0; j < table.outputs; ++j) {
    std::vector<std::size_t> order(table.neurons);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return total[a * table.outputs + j] > total[b * table.outputs + j];
    });
    Series s{j < class_names.size() ? class_names[j] : std::to_string(j), {}, {}};
    for (std::size_t p = 0; p < order.size(); ++p) {
      double v = total[order[p] * table.outputs + j];
      s.x.push_back(static_cast<double>(p));
      s.y.push_back(v);
      r.csv += csv_field(s.name) + "," + std::to_string(p) + "," + std::to_string(order[p]) +
               "," + format_double(v) + "\n";
    }
    plot.series.push_back(std::move(s));
  }
  r.svg = render_line_svg(plot);
  return r;
}

Report overlap_report(const OverlapResult& overlap) {
  require(overlap.histogram.size() > 1, ErrorKind::kInvalidArgument, "overlap is empty");
  Report r{ReportKind::kOverlap, "lists,neurons\n", {}};
  BarPlot plot{"Top-" + std::to_string(overlap.list_size) + " neuron overlap",
               "number of category lists", "neurons", {"neurons"}, {}, {}};
  // Count 0 (neurons in no list) is not plotted.
  for (std::size_t c = 1; c < overlap.histogram.size(); ++c) {
    r.csv += std::to_string(c) + "," + std::to_string(overlap.histogram[c]) + "\n";
    plot.groups.push_back({std::to_string(c), {static_cast<double>(overlap.histogram[c])}});
  }
  r.svg = render_bar_svg(plot);
  return r;
}

Report sweep_curves_report(std::span<const SweepResult> sweeps) {
  require(!sweeps.empty(), ErrorKind::kInvalidArgument, "no sweeps to plot");
  Report r{ReportKind::kSweepCurves, "strategy,layer,n_pruned,loss,accuracy\n", {}};
  LinePlot loss{"Loss vs neurons pruned, layer " + std::to_string(sweeps.front().layer_index),
                "neurons pruned", "loss", {}};
  LinePlot acc{"Accuracy vs neurons pruned", "neurons pruned", "accuracy", {}};
  for (const SweepResult& s : sweeps) {
    require(!s.points.empty(), ErrorKind::kInvalidArgument, "sweep has no points");
    std::string name(sweep_strategy_name(s.strategy));
    Series sl{name, {}, {}}, sa{name, {}, {}};
    for (const SweepPoint& p : s.points) {
      double n = static_cast<double>(p.n_pruned);
      sl.x.push_back(n);
      sl.y.push_back(p.metrics.loss);
      sa.x.push_back(n);
      sa.y.push_back(p.metrics.accuracy);
      r.csv += name + "," + std::to_string(s.layer_index) + "," + std::to_string(p.n_pruned) +
               "," + format_double(p.metrics.loss) + "," + format_double(p.metrics.accuracy) +
               "\n";
    }
    loss.series.push_back(std::move(sl));
    acc.series.push_back(std::move(sa));
  }
  r.svg = svg_open(kWidth, 2 * kHeight) + line_panel(loss, 0, 0) + line_panel(acc, 0, kHeight) +
          "</svg>\n";
  return r;
}

Report category_curves_report(const SweepResult& sweep,
                              std::span<const std::string> class_names) {
  require(!sweep.points.empty(), ErrorKind::kInvalidArgument, "category sweep has no points");
  require(!class_names.empty(), ErrorKind::kInvalidArgument, "no class names");
  Report r{ReportKind::kCategoryCurves, "category,n_pruned,class,accuracy\n", {}};
  std::string cat = sweep.category < class_names.size() ? class_names[sweep.category]
                                                        : std::to_string(sweep.category);
  LinePlot plot{"Pruning by " + cat + " rank, layer " + std::to_string(sweep.layer_index),
                "neurons pruned", "class accuracy", {}};
  for (std::size_t k = 0; k < class_names.size(); ++k) {
    Series s{class_names[k], {}, {}};
    for (const SweepPoint& p : sweep.points) {
      double a = k < p.metrics.class_accuracy.size() ? p.metrics.class_accuracy[k] : 0.0;
      s.x.push_back(static_cast<double>(p.n_pruned));
      s.y.push_back(a);
      r.csv += csv_field(cat) + "," + std::to_string(p.n_pruned) + "," +
               csv_field(class_names[k]) + "," + format_double(a) + "\n";
    }
    plot.series.push_back(std::move(s));
  }
  r.svg = render_line_svg(plot);
  return r;
}

Report param_table_report(std::span<const ParameterRow> rows) {
  require(!rows.empty(), ErrorKind::kInvalidArgument, "no parameter rows");
  TablePlot plot{"Parameters after pruning",
                 {"mask %", "total parameters", "parameters cut", "cut %"},
                 {}};
  for (const ParameterRow& row : rows) {
    plot.rows.push_back({format_fixed(row.mask_percent, 2), std::to_string(row.total_parameters),
                         std::to_string(row.parameters_cut), format_fixed(row.cut_percent, 2)});
  }
  return {ReportKind::kParamTable, parameter_csv(rows), render_table_svg(plot)};
}

}  // namespace neuroprune
