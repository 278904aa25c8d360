// Copyright 2026 The mavg Authors. All Rights Reserved.
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
// =============================================================================

#include "mavg/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include "mavg/core.hpp"
#include "mavg/errors.hpp"
#include "mavg/harness.hpp"

namespace mavg {
namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool finite_point(double x, double y) {
  return std::isfinite(x) && std::isfinite(y);
}

}  // namespace

Extent chart_extent(const Chart& chart) {
  Extent e{std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!finite_point(s.x[i], s.y[i])) continue;
      any = true;
      e.xmin = std::min(e.xmin, s.x[i]);
      e.xmax = std::max(e.xmax, s.x[i]);
      e.ymin = std::min(e.ymin, s.y[i]);
      e.ymax = std::max(e.ymax, s.y[i]);
    }
  if (!any) return {};
  return e;
}

std::string render_svg(const Chart& chart) {
  const Extent e = chart_extent(chart);
  // Degenerate ranges still need a nonzero span to draw.
  const double xspan = e.xmax > e.xmin ? e.xmax - e.xmin : 1.0;
  const double yspan = e.ymax > e.ymin ? e.ymax - e.ymin : 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - e.xmin) / xspan * pw; };
  auto py = [&](double y) { return kTop + ph - (y - e.ymin) / yspan * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" data-xmin=\"{}\" data-xmax=\"{}\" "
      "data-ymin=\"{}\" data-ymax=\"{}\">\n",
      kWidth, kHeight, kWidth, kHeight, format_number(e.xmin),
      format_number(e.xmax), format_number(e.ymin), format_number(e.ymax));
  out += fmt::format(
      "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
      kWidth, kHeight);
  out += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, pw, ph);
  if (!chart.title.empty())
    out += fmt::format(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}"
        "</text>\n",
        kLeft + pw / 2, escape(chart.title));

  for (int t = 0; t <= 4; ++t) {
    const double fx = e.xmin + xspan * t / 4.0;
    const double fy = e.ymin + yspan * t / 4.0;
    out += fmt::format(
        "<text class=\"tick\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" "
        "font-size=\"11\">{:.4g}</text>\n",
        px(fx), kTop + ph + 16, fx);
    out += fmt::format(
        "<text class=\"tick\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" "
        "font-size=\"11\">{:.4g}</text>\n",
        kLeft - 6, py(fy) + 4, fy);
  }
  out += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}"
      "</text>\n",
      kLeft + pw / 2, kHeight - 16, escape(chart.x_label));
  out += fmt::format(
      "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" "
      "transform=\"rotate(-90 18 {})\">{}</text>\n",
      kTop + ph / 2, kTop + ph / 2, escape(chart.y_label));

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!finite_point(s.x[i], s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", px(s.x[i]), py(s.y[i]));
    }
    out += fmt::format(
        "<polyline class=\"series\" data-label=\"{}\" fill=\"none\" "
        "stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        escape(s.label), color, points);
    const double ly = kTop + 10 + 18 * static_cast<double>(k);
    out += fmt::format(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n",
        kWidth - kRight + 12, ly, kWidth - kRight + 32, ly, color);
    out += fmt::format(
        "<text class=\"legend\" x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
        kWidth - kRight + 38, ly + 4, escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

namespace {

std::vector<double> column(const CsvTable& t, std::size_t col) {
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) v.push_back(t.number(i, col));
  return v;
}

// Rows grouped by the text of one column, groups in first-appearance order.
std::vector<Series> grouped(const CsvTable& t, std::size_t xc, std::size_t yc,
                            std::optional<std::size_t> gc) {
  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string key = gc ? t.rows[i][*gc] : std::string();
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) out.push_back({key, {}, {}});
    auto& s = out[it->second];
    s.x.push_back(t.number(i, xc));
    s.y.push_back(t.number(i, yc));
  }
  return out;
}

bool varies(const CsvTable& t, std::size_t col) {
  std::set<std::string> seen;
  for (const auto& r : t.rows) seen.insert(r[col]);
  return seen.size() > 1;
}

}  // namespace

Chart chart_from_files(const std::vector<std::filesystem::path>& files,
                       const PlotOptions& options) {
  if (files.empty()) throw ArgumentError("plot: no input files");
  Chart chart;
  chart.title = options.title;
  const auto trace_header = split(kTraceHeader, ',');
  const auto aggregate_header = split(kAggregateHeader, ',');

  std::vector<CsvTable> tables;
  for (const auto& f : files) tables.push_back(read_csv(f));

  const bool all_traces = std::all_of(
      tables.begin(), tables.end(),
      [&](const CsvTable& t) { return t.header == trace_header; });
  if (all_traces) {
    chart.x_label = options.x.empty() ? "n" : options.x;
    chart.y_label = options.y.empty() ? "f_value" : options.y;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      const auto& t = tables[i];
      Series s;
      s.label = files[i].stem().string();
      s.x = column(t, t.column(chart.x_label));
      s.y = column(t, t.column(chart.y_label));
      chart.series.push_back(std::move(s));
    }
    return chart;
  }
  if (tables.size() != 1)
    throw ArgumentError(
        "plot: several inputs are only supported for trace files");
  const CsvTable& t = tables.front();

  if (t.header == std::vector<std::string>{"mu", "n", "mean_f_value"}) {
    chart.x_label = "n";
    chart.y_label = "mean_f_value";
    chart.series = grouped(t, 1, 2, 0);
    return chart;
  }

  std::string x = options.x, y = options.y, group = options.group;
  if (t.header == aggregate_header) {
    if (y.empty()) y = "mean_avg_grad_sq";
    std::vector<std::string> axes;
    for (const char* a : {"mu", "eta", "K", "P", "B"})
      if (varies(t, t.column(a))) axes.push_back(a);
    if (x.empty()) x = axes.empty() ? "mu" : axes.front();
    if (group.empty())
      for (const auto& a : axes)
        if (a != x) {
          group = a;
          break;
        }
  }
  if (x.empty() || y.empty())
    throw ArgumentError("plot: unrecognized CSV schema; pass --x and --y");
  chart.x_label = x;
  chart.y_label = y;
  std::optional<std::size_t> gc;
  if (!group.empty()) gc = t.column(group);
  chart.series = grouped(t, t.column(x), t.column(y), gc);
  if (gc)
    for (auto& s : chart.series) s.label = group + "=" + s.label;
  else if (!chart.series.empty())
    chart.series.front().label = y;
  return chart;
}

}  // namespace mavg
