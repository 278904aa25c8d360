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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mavg/csv.hpp"

namespace mavg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Data extent over finite points; axes span exactly these values.
struct Extent {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

Extent chart_extent(const Chart& chart);

/// Static SVG line chart, one polyline per series with a legend. The root
/// element carries data-xmin/xmax/ymin/ymax attributes with the axis ranges.
std::string render_svg(const Chart& chart);

struct PlotOptions {
  std::string x;      // column for the x axis; empty picks a default
  std::string y;      // column for the y axis; empty picks a default
  std::string group;  // column splitting rows into series; empty picks one
  std::string title;
};

/// Builds a chart from CSV files. Recognizes trace files (one series per
/// file, f_value against n), race curves (one series per mu) and sweep
/// aggregates (metric against a swept axis); any other CSV needs x and y.
Chart chart_from_files(const std::vector<std::filesystem::path>& files,
                       const PlotOptions& options);

}  // namespace mavg
