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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <regex>
#include <sstream>

#include "mavg/csv.hpp"
#include "mavg/errors.hpp"
#include "mavg/harness.hpp"
#include "mavg/plot.hpp"

using namespace mavg;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> all_matches(const std::string& text,
                                     const std::string& pattern) {
  std::vector<std::string> out;
  const std::regex re(pattern);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it)
    out.push_back((*it)[1].str());
  return out;
}

double attr(const std::string& svg, const std::string& name) {
  const auto m = all_matches(svg, name + "=\"([^\"]*)\"");
  REQUIRE(!m.empty());
  return parse_double(m.front(), 0);
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mavg_plot_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

HyperParams small(std::size_t N) {
  HyperParams h;
  h.num_learners = 2;
  h.batch_size = 4;
  h.local_steps = 3;
  h.step_size = 0.02;
  h.momentum = 0.5;
  h.meta_iters = N;
  h.master_seed = 3;
  return h;
}

}  // namespace

TEST_CASE("single trace renders one polyline with N vertices") {
  const auto dir = scratch("trace");
  const auto path = dir / "trace.csv";
  write_trace_csv(run(*make_logcosh(), small(37)), path);
  const std::string before = read_file(path);

  const auto svg = render_svg(chart_from_files({path}, {}));
  const auto polys = all_matches(svg, "points=\"([^\"]*)\"");
  REQUIRE(polys.size() == 1);
  std::istringstream pts(polys[0]);
  std::string pt;
  std::size_t count = 0;
  while (pts >> pt) ++count;
  CHECK(count == 37);

  // Axis ranges equal the min/max of the plotted columns.
  const auto table = read_csv(path);
  double fmin = 1e300, fmax = -1e300;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double v = table.number(r, table.column("f_value"));
    fmin = std::min(fmin, v);
    fmax = std::max(fmax, v);
  }
  CHECK(attr(svg, "data-xmin") == 1.0);
  CHECK(attr(svg, "data-xmax") == 37.0);
  CHECK(attr(svg, "data-ymin") == fmin);
  CHECK(attr(svg, "data-ymax") == fmax);

  CHECK(read_file(path) == before);
  fs::remove_all(dir);
}

TEST_CASE("race curves get one legend entry per momentum") {
  const auto dir = scratch("race");
  const auto f = make_logcosh();
  const auto report = race(*f, small(30), {1, 2}, 5.0, {0.5});
  write_file(dir / "race_curves.csv", race_curves_csv(report));
  const auto svg = render_svg(chart_from_files({dir / "race_curves.csv"}, {}));
  const auto legend = all_matches(svg, "<text class=\"legend\"[^>]*>([^<]*)<");
  CHECK(legend == std::vector<std::string>{"0", "0.5"});
  fs::remove_all(dir);
}

TEST_CASE("aggregate tables plot the metric against the swept axis") {
  const auto dir = scratch("agg");
  SweepSpec spec;
  spec.base = small(10);
  spec.axes.mu = {0.0, 0.3, 0.6};
  spec.axes.K = {2, 4};
  spec.seeds = {1};
  spec.output_dir = dir;
  run_sweep(spec);
  const auto chart = chart_from_files({dir / "aggregate.csv"}, {});
  REQUIRE(chart.series.size() == 2);
  CHECK(chart.series[0].label == "K=2");
  CHECK(chart.series[0].x == std::vector<double>{0.0, 0.3, 0.6});
  const auto e = chart_extent(chart);
  CHECK(e.xmin == 0.0);
  CHECK(e.xmax == 0.6);
  fs::remove_all(dir);
}

TEST_CASE("malformed input reports the line") {
  const auto dir = scratch("bad");
  write_file(dir / "t.csv",
             "n,f_value,grad_sq_norm,d_norm,v_norm,wallclock_s,"
             "assumption_violated\n1,2,3,4,5,0,0\n2,oops,3,4,5,0,0\n");
  try {
    chart_from_files({dir / "t.csv"}, {});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  write_file(dir / "g.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(chart_from_files({dir / "g.csv"}, {}), ArgumentError);
  PlotOptions o;
  o.x = "a";
  o.y = "b";
  CHECK(chart_from_files({dir / "g.csv"}, o).series.at(0).y ==
        std::vector<double>{2.0});
  fs::remove_all(dir);
}
