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

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "mavg/csv.hpp"
#include "mavg/errors.hpp"
#include "mavg/harness.hpp"
#include "oracles/kavg.hpp"

using namespace mavg;
namespace fs = std::filesystem;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

HyperParams base(double mu = 0.0, std::size_t N = 20) {
  HyperParams h;
  h.num_learners = 3;
  h.batch_size = 4;
  h.local_steps = 5;
  h.step_size = 0.02;
  h.momentum = mu;
  h.meta_iters = N;
  return h;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mavg_harness_" + name);
  fs::remove_all(p);
  return p;
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return out;
}

}  // namespace

TEST_CASE("summaries") {
  const auto s = summarize({1.0, 2.0, 6.0});
  CHECK(s.mean == 3.0);
  CHECK(s.median == 2.0);
  CHECK(s.stddev == doctest::Approx(std::sqrt(7.0)));
  CHECK(median({1.0, 3.0}) == 2.0);
  CHECK(median({1.0, kInf}) == kInf);
  CHECK(median({1.0, 2.0, kInf}) == 2.0);
  CHECK(std::isnan(median({})));
  CHECK(summarize({4.0}).stddev == 0.0);
}

TEST_CASE("sweep tuples nest P, B, K, eta, mu") {
  SweepSpec spec;
  spec.base = base();
  spec.axes.K = {1, 2};
  spec.axes.mu = {0.0, 0.5, 0.9};
  spec.seeds = {1};
  const auto t = spec.tuples();
  REQUIRE(t.size() == 6);
  CHECK(t[0].local_steps == 1);
  CHECK(t[1].momentum == 0.5);
  CHECK(t[3].local_steps == 2);
  CHECK(t[5].num_learners == 3);
  spec.seeds.clear();
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.seeds = {1};
  spec.axes.mu = {1.0};
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
}

TEST_CASE("degenerate sweep equals one direct run") {
  SweepSpec spec;
  spec.base = base(0.4);
  spec.seeds = {9};
  const auto r = run_sweep(spec);
  REQUIRE(r.rows.size() == 1);
  REQUIRE(r.cells.size() == 1);
  const auto f = make_logcosh();
  auto h = spec.base;
  h.master_seed = 9;
  const auto t = run(*f, h);
  CHECK(r.rows[0].final_f.mean == t.iterations.back().f_value);
  CHECK(r.rows[0].avg_grad_sq.mean == t.mean_grad_sq_norm());
  const auto b = theorem_bound(0.4, 20, 0.02, 3, 4, 5, bound_inputs_for(*f));
  CHECK(r.rows[0].bound_total == b.total);
  CHECK(r.rows[0].feasible == b.conditions_met);
  CHECK(std::isnan(r.rows[0].median_iters_to_threshold));
}

TEST_CASE("zero-momentum sweep rows match the K-AVG reference") {
  SweepSpec spec;
  spec.base = base();
  spec.axes.mu = {0.0, 0.5};
  spec.seeds = {1, 2, 3};
  const auto r = run_sweep(spec);
  const auto f = make_logcosh();
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& cell = r.cells[s];
    REQUIRE(cell.hyper.momentum == 0.0);
    const auto ref = oracle::kavg_reference(*f, cell.hyper);
    CHECK(cell.final_f == f->value(ref[19]));
    double g = 0.0;
    for (std::size_t n = 0; n < 20; ++n) g += norm_sq(f->gradient(ref[n]));
    CHECK(cell.avg_grad_sq == g / 20.0);
  }
}

TEST_CASE("sweeps are byte-identical across repeats and worker counts") {
  SweepSpec spec;
  spec.base = base();
  spec.axes.mu = {0.0, 0.5};
  spec.axes.K = {2, 4};
  spec.seeds = {1, 2};
  spec.loss_threshold = 10.0;
  spec.output_dir = scratch("a");
  run_sweep(spec);
  const auto a = snapshot(spec.output_dir);
  spec.output_dir = scratch("b");
  spec.threads = 3;
  run_sweep(spec);
  const auto b = snapshot(spec.output_dir);
  CHECK(a.size() == 2 + 8);
  CHECK(a == b);
  CHECK(a.at("aggregate.csv").rfind(kAggregateHeader, 0) == 0);
  CHECK(a.count("cells/P3_B4_K2_eta0.02_mu0.5_seed2.csv") == 1);
  fs::remove_all(scratch("a"));
  fs::remove_all(scratch("b"));
}

TEST_CASE("removing a tuple leaves other cells unchanged") {
  SweepSpec spec;
  spec.base = base();
  spec.axes.mu = {0.0, 0.3, 0.6};
  spec.seeds = {4, 5};
  const auto full = run_sweep(spec);
  spec.axes.mu = {0.6};
  const auto part = run_sweep(spec);
  CHECK(part.rows[0].final_f.mean == full.rows[2].final_f.mean);
  CHECK(part.rows[0].avg_grad_sq.mean == full.rows[2].avg_grad_sq.mean);
  CHECK(part.rows[0].bound_total == full.rows[2].bound_total);
}

TEST_CASE("aggregate replays from the cell traces") {
  SweepSpec spec;
  spec.base = base(0.5);
  spec.axes.eta = {0.01, 0.02};
  spec.seeds = {1, 2, 3};
  spec.loss_threshold = 8.0;
  spec.output_dir = scratch("replay");
  const auto r = run_sweep(spec);
  const auto agg = read_csv(spec.output_dir / "aggregate.csv");
  REQUIRE(agg.rows.size() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    std::vector<double> finals, grads, hits;
    for (std::size_t s = 0; s < 3; ++s) {
      const auto rows = read_trace_csv(
          spec.output_dir / "cells" / cell_trace_name(r.cells[t * 3 + s].hyper));
      double g = 0.0, hit = kInf;
      for (const auto& row : rows) {
        g += row.grad_sq_norm;
        if (row.f_value <= 8.0 && std::isinf(hit)) hit = row.n;
      }
      finals.push_back(rows.back().f_value);
      grads.push_back(g / rows.size());
      hits.push_back(hit);
    }
    CHECK(agg.number(t, agg.column("mean_final_f")) == summarize(finals).mean);
    CHECK(agg.number(t, agg.column("mean_avg_grad_sq")) == summarize(grads).mean);
    CHECK(agg.number(t, agg.column("median_iters_to_threshold")) ==
          median(hits));
  }
  const auto manifest = read_file(spec.output_dir / "manifest.json");
  CHECK(manifest.find("\"seeds\"") != std::string::npos);
  fs::remove_all(spec.output_dir);
}

TEST_CASE("empirical mean against the bound") {
  SUBCASE("noiseless tiny step is far under the bound") {
    const auto f = make_logcosh(20, 0.0);
    auto h = base(0.0, 50);
    h.step_size = 1e-3;
    const auto c = empirical_vs_bound(*f, h, {1, 2});
    CHECK(c.satisfied);
    CHECK(c.empirical_mean < 0.5 * c.bound_total);
    CHECK(c.feasibility.feasible);
  }
  SUBCASE("per-seed values replay through run") {
    const auto f = make_logcosh();
    auto h = base(0.5, 30);
    const auto c = empirical_vs_bound(*f, h, {3, 4}, 2);
    REQUIRE(c.per_seed.size() == 2);
    h.master_seed = 4;
    CHECK(c.per_seed[1] == run(*f, h).mean_grad_sq_norm());
    CHECK(c.empirical_mean == (c.per_seed[0] + c.per_seed[1]) / 2.0);
  }
  SUBCASE("infeasible tuple is refused") {
    auto h = base(0.9, 10);
    h.step_size = 0.5;
    h.local_steps = 64;
    CHECK_THROWS_AS(empirical_vs_bound(*make_logcosh(), h, {1}),
                    InfeasibleError);
  }
}

TEST_CASE("race against zero momentum") {
  SUBCASE("self comparison") {
    const auto r = race(*make_logcosh(), base(0.0, 50), {1, 2}, 5.0, {0.0});
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].ratio_vs_zero == 1.0);
    CHECK(r.mean_curves[0].size() == 50);
  }
  SUBCASE("noiseless quadratic follows the scalar recursion") {
    const std::size_t d = 4;
    const auto f = make_quadratic(d, 10.0, 0.0);
    auto h = base(0.0, 200);
    h.step_size = 0.05;
    h.local_steps = 2;
    const double threshold = *f->spec().race_threshold;
    const auto r = race(*f, h, {1}, threshold, {0.2, 0.5});
    REQUIRE(r.rows.size() == 3);
    const double c = std::pow(1.0 - h.step_size, h.local_steps);
    for (const auto& row : r.rows) {
      double x = f->spec().init_point[0], v = 0.0, hit = kInf;
      for (std::size_t n = 1; n <= 200; ++n) {
        if (0.5 * d * x * x <= threshold) {
          hit = n;
          break;
        }
        const double a = c * x;
        const double step = a - x;
        const double v_old = v;
        v = row.mu * v + step;
        x = a + row.mu * v_old;
      }
      CAPTURE(row.mu);
      CHECK(row.hits[0] == hit);
      CHECK(row.finished == 1);
    }
    CHECK(r.rows[1].median_hit < r.rows[0].median_hit);
  }
  SUBCASE("unreached threshold counts as no finish") {
    const auto r = race(*make_logcosh(), base(0.0, 5), {1, 2}, -1.0, {0.5});
    CHECK(r.rows[0].finished == 0);
    CHECK(std::isinf(r.rows[0].median_hit));
    const auto csv = race_csv(r);
    CHECK(csv.rfind("mu,seed_count,finished,median_iters_to_threshold", 0) == 0);
  }
  SUBCASE("log-cosh: some momentum beats none") {
    auto h = base(0.0, 400);
    h.num_learners = 4;
    h.batch_size = 16;
    h.local_steps = 8;
    h.step_size = 0.01;
    const auto f = make_logcosh();
    const auto r = race(*f, h, {1, 2, 3, 4, 5}, *f->spec().race_threshold,
                        {0.3, 0.5, 0.7});
    double best = kInf;
    for (std::size_t i = 1; i < r.rows.size(); ++i)
      best = std::min(best, r.rows[i].median_hit);
    CHECK(best < r.rows[0].median_hit);
  }
}

TEST_CASE("parallel_for visits every index and rethrows") {
  std::vector<int> seen(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { seen[i] += 1; });
  CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw ArgumentError("boom");
                               }),
                  ArgumentError);
}
